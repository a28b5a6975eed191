//! Streaming mode-collapse probe and the aromatic ring audit.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::chem::{
    canonical_smiles, compute_descriptors, morgan_fingerprint, murcko_scaffold, tanimoto,
    Descriptors, Fingerprint, MolGraph, DEFAULT_RADIUS, DEFAULT_WIDTH,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StressCurve {
    pub window: usize,
    /// Mean pairwise Tanimoto similarity over the last `min(t, window)`
    /// molecules after step `t`; `None` while fewer than two are present.
    pub rolling_mean: Vec<Option<f64>>,
    pub unique_smiles: Vec<usize>,
    /// Distinct non-empty Murcko scaffolds; acyclic molecules add none.
    pub unique_scaffolds: Vec<usize>,
}

/// Rolling mean similarity maintained incrementally: each arrival adds its
/// similarities to the current window and each eviction removes the
/// departing molecule's, so every pair in the window is counted exactly.
pub fn rolling_mean_tanimoto(
    fps: &[Fingerprint],
    window: usize,
) -> Result<Vec<Option<f64>>, EvalError> {
    if window < 2 {
        return Err(EvalError::Config(format!(
            "window must be at least 2, got {window}"
        )));
    }
    let mut buf: VecDeque<usize> = VecDeque::with_capacity(window);
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(fps.len());
    for (t, fp) in fps.iter().enumerate() {
        if buf.len() == window {
            let old = buf.pop_front().expect("full window");
            for &b in &buf {
                sum -= tanimoto(&fps[old], &fps[b])?;
            }
        }
        for &b in &buf {
            sum += tanimoto(fp, &fps[b])?;
        }
        buf.push_back(t);
        let c = buf.len();
        out.push((c >= 2).then(|| sum / (c * (c - 1) / 2) as f64));
    }
    Ok(out)
}

/// Runs the probe over a generation stream in arrival order.
pub fn rolling_tanimoto_stress(
    stream: &[MolGraph],
    window: usize,
) -> Result<StressCurve, EvalError> {
    let per_mol: Vec<(Fingerprint, String, String)> = stream
        .par_iter()
        .map(|m| {
            let scaffold = murcko_scaffold(m);
            let key = if scaffold.is_empty() {
                String::new()
            } else {
                canonical_smiles(&scaffold)
            };
            (
                morgan_fingerprint(m, DEFAULT_RADIUS, DEFAULT_WIDTH),
                canonical_smiles(m),
                key,
            )
        })
        .collect();
    let fps: Vec<Fingerprint> = per_mol.iter().map(|p| p.0.clone()).collect();
    let rolling_mean = rolling_mean_tanimoto(&fps, window)?;
    let (mut smiles, mut scaffolds) = (BTreeSet::new(), BTreeSet::new());
    let (mut us, mut uf) = (
        Vec::with_capacity(stream.len()),
        Vec::with_capacity(stream.len()),
    );
    for (_, s, k) in &per_mol {
        smiles.insert(s.as_str());
        if !k.is_empty() {
            scaffolds.insert(k.as_str());
        }
        us.push(smiles.len());
        uf.push(scaffolds.len());
    }
    Ok(StressCurve {
        window,
        rolling_mean,
        unique_smiles: us,
        unique_scaffolds: uf,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AromaticAudit {
    pub n: usize,
    /// Share of molecules with at least one aromatic ring, in [0, 1].
    pub frac_with_aromatic_ring: f64,
    pub mean_aromatic_rings: f64,
    pub mean_total_rings: f64,
    pub mean_aromatic_atoms: f64,
}

pub fn aromatic_ring_audit_descriptors(ds: &[Descriptors]) -> AromaticAudit {
    if ds.is_empty() {
        return AromaticAudit::default();
    }
    let n = ds.len() as f64;
    let mean = |f: fn(&Descriptors) -> u32| ds.iter().map(|d| f(d) as f64).sum::<f64>() / n;
    AromaticAudit {
        n: ds.len(),
        frac_with_aromatic_ring: ds.iter().filter(|d| d.n_aromatic_rings > 0).count() as f64 / n,
        mean_aromatic_rings: mean(|d| d.n_aromatic_rings),
        mean_total_rings: mean(|d| d.n_rings),
        mean_aromatic_atoms: mean(|d| d.n_aromatic_atoms),
    }
}

pub fn aromatic_ring_audit(mols: &[MolGraph]) -> AromaticAudit {
    let ds: Vec<Descriptors> = mols.par_iter().map(compute_descriptors).collect();
    aromatic_ring_audit_descriptors(&ds)
}
