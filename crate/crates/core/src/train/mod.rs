//! The steering phase: a frozen patch generator, a trainable descriptor
//! conditioner, and the reward, critic and discriminator around them.

mod corpus;
mod reward;
mod select;
mod trainer;

pub use corpus::{
    quantile_sorted, read_latent_matrix, synthetic_latent_matrix, Corpus, ReferenceMol, SkippedLine,
};
pub use reward::{
    chemistry_reward, conditioner_objective, median, normalize_rewards, select_topk, warmup_lambda,
    RewardConfig,
};
pub use select::{
    is_good_at_chem, select_checkpoint, validate_good_at_chem, CheckpointMeta, ValidationStats,
};
pub use trainer::{
    conditioner_file, decode_codes, EpochMetrics, TrainConfig, TrainReport, TrainSetup, Trainer,
};

use crate::assemble::AssembleError;
use crate::blob::BlobError;
use crate::chem::ChemError;
use crate::nets::NetError;
use crate::qpatch::QError;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("empty candidate list")]
    EmptyList,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Blob(#[from] BlobError),
    #[error(transparent)]
    Quantum(#[from] QError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
}
