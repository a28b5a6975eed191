//! Evaluation harness: validity, uniqueness and novelty, fingerprint
//! diversity, Fréchet distance on projected fingerprints, Pareto fronts,
//! drug-likeness rule checks, rank-correlation audits, the streaming
//! mode-collapse probe, diversity picking and logP calibration.

mod admet;
mod calibrate;
mod frechet;
mod pairs;
mod pareto;
mod report;
mod spearman;
mod stress;
mod vun;

pub use admet::{admet_fast_pass, AdmetFlags, AdmetReport, AdmetRules};
pub use calibrate::{logp_quantile_calibration, MonotoneMap};
pub use frechet::{
    fingerprint_pca, frechet_distance, frechet_gaussian, gaussian_fit, FdConfig, FdResult,
    GaussianFit, Pca,
};
pub use pairs::{
    diversity_mean_tanimoto, maxmin_diverse_select, pair_from_index, Diversity, DEFAULT_PAIR_BUDGET,
};
pub use pareto::{dominates, pareto_front, pareto_front_constrained, ParetoConfig, ParetoPoint};
pub use report::{MetricsReport, PropertyMeans, Provenance, ScaffoldCounts, METRICS_SCHEMA};
pub use spearman::{average_ranks, spearman, spearman_audit, Correlation, SpearmanAudit};
pub use stress::{
    aromatic_ring_audit, aromatic_ring_audit_descriptors, rolling_mean_tanimoto,
    rolling_tanimoto_stress, AromaticAudit, StressCurve,
};
pub use vun::{canonical_set, vun_metrics, VunMetrics};

use crate::chem::ChemError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("need at least {needed} items, got {got}")]
    InsufficientInput { needed: usize, got: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Chem(#[from] ChemError),
}
