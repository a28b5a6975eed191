//! Validity, uniqueness and novelty under one canonicalization.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chem::{canonical_smiles, mol_from_smiles};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VunMetrics {
    pub n_generated: usize,
    pub n_valid: usize,
    pub n_unique: usize,
    pub n_novel: usize,
    pub validity: f64,
    pub uniqueness: f64,
    pub novelty: f64,
}

fn canonicalize<S: AsRef<str> + Sync>(smiles: &[S]) -> Vec<Option<String>> {
    smiles
        .par_iter()
        .map(|s| {
            mol_from_smiles(s.as_ref())
                .ok()
                .map(|m| canonical_smiles(&m))
        })
        .collect()
}

/// Canonical forms of every parseable entry; the rest are dropped.
pub fn canonical_set<S: AsRef<str> + Sync>(smiles: &[S]) -> BTreeSet<String> {
    canonicalize(smiles).into_iter().flatten().collect()
}

/// Validity is the sanitizable share of `generated`, uniqueness the share of
/// distinct canonical forms among valid entries, novelty the share of those
/// distinct forms absent from the canonicalized reference.
pub fn vun_metrics<S: AsRef<str> + Sync, R: AsRef<str> + Sync>(
    generated: &[S],
    reference: &[R],
) -> VunMetrics {
    let canon = canonicalize(generated);
    let valid: Vec<&String> = canon.iter().flatten().collect();
    let unique: BTreeSet<&String> = valid.iter().copied().collect();
    let refs = canonical_set(reference);
    let n_novel = unique.iter().filter(|s| !refs.contains(s.as_str())).count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    VunMetrics {
        n_generated: generated.len(),
        n_valid: valid.len(),
        n_unique: unique.len(),
        n_novel,
        validity: ratio(valid.len(), generated.len()),
        uniqueness: ratio(unique.len(), valid.len()),
        novelty: ratio(n_novel, unique.len()),
    }
}
