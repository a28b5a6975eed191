//! Trainable networks of the steering loop: the descriptor conditioner, the
//! latent critic and the edge-aware graph discriminator with its EMA
//! teacher. Gradients are derived by hand.

mod conditioner;
mod critic;
mod dense;
mod gine;

pub use conditioner::{
    conditioner_inputs, latent_axis_scores, pearson, rank_latent_axes, Conditioner,
    ConditionerConfig, Standardizer, CONDITIONER_DESCRIPTORS,
};
pub use critic::{CriticConfig, CriticNet};
pub use dense::{
    mse_train_step, mse_with_grad, Activation, DenseGrad, DenseLayer, DenseNet, DenseTrace,
};
pub use gine::{
    bce_with_logits, discriminator_train_step, ema_update, graph_features, DiscriminatorConfig,
    EmaState, GraphDiscriminator, GraphFeatures, EDGE_FEATURES, NODE_FEATURES,
};

use crate::blob::BlobError;

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("graph has no atoms")]
    EmptyGraph,
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Blob(#[from] BlobError),
}
