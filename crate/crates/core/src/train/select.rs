//! Validation statistics and checkpoint selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::chem::Descriptors;

/// Strict drug-likeness gate: QED > 0.5, SA < 5 and logP < 5.
pub fn is_good_at_chem(d: &Descriptors) -> bool {
    d.qed > 0.5 && d.sa < 5.0 && d.logp < 5.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationStats {
    pub n: usize,
    pub good_count: usize,
    pub good_at_chem: f64,
    pub mean_qed: f64,
    pub mean_sa: f64,
    pub mean_logp: f64,
}

/// Good@chem fraction and property means; an empty set yields zeros.
pub fn validate_good_at_chem(ds: &[Descriptors]) -> ValidationStats {
    if ds.is_empty() {
        return ValidationStats::default();
    }
    let n = ds.len() as f64;
    let good_count = ds.iter().filter(|d| is_good_at_chem(d)).count();
    ValidationStats {
        n: ds.len(),
        good_count,
        good_at_chem: good_count as f64 / n,
        mean_qed: ds.iter().map(|d| d.qed).sum::<f64>() / n,
        mean_sa: ds.iter().map(|d| d.sa).sum::<f64>() / n,
        mean_logp: ds.iter().map(|d| d.logp).sum::<f64>() / n,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub epoch: usize,
    pub seed: u64,
    pub good_at_chem: f64,
    pub mean_qed: f64,
    pub mean_sa: f64,
    pub mean_logp: f64,
}

impl CheckpointMeta {
    pub fn from_stats(epoch: usize, seed: u64, s: &ValidationStats) -> Self {
        CheckpointMeta {
            epoch,
            seed,
            good_at_chem: s.good_at_chem,
            mean_qed: s.mean_qed,
            mean_sa: s.mean_sa,
            mean_logp: s.mean_logp,
        }
    }

    /// Lexicographic preference: more Good@chem, higher QED, lower SA,
    /// lower logP.
    fn preference(&self, other: &Self) -> Ordering {
        self.good_at_chem
            .total_cmp(&other.good_at_chem)
            .then(self.mean_qed.total_cmp(&other.mean_qed))
            .then(other.mean_sa.total_cmp(&self.mean_sa))
            .then(other.mean_logp.total_cmp(&self.mean_logp))
    }
}

/// Best candidate under the lexicographic preference, earliest epoch on a
/// full tie.
pub fn select_checkpoint(candidates: &[CheckpointMeta]) -> Result<&CheckpointMeta, TrainError> {
    let mut best = candidates.first().ok_or(TrainError::EmptyList)?;
    for c in &candidates[1..] {
        match c.preference(best) {
            Ordering::Greater => best = c,
            Ordering::Equal if c.epoch < best.epoch => best = c,
            _ => {}
        }
    }
    Ok(best)
}
