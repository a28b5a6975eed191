//! Reference corpus ingestion and latent matrices.

use std::io::Read;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::TrainError;
use crate::blob::Blob;
use crate::chem::{
    canonical_smiles, compute_descriptors, mol_from_smiles, read_smiles_lines, Descriptors,
    MolGraph,
};
use crate::nets::{conditioner_inputs, graph_features, GraphFeatures, Standardizer};

#[derive(Clone, Debug)]
pub struct ReferenceMol {
    pub smiles: String,
    pub mol: MolGraph,
    pub descriptors: Descriptors,
    pub inputs: Vec<f64>,
    pub features: GraphFeatures,
}

impl ReferenceMol {
    pub fn from_smiles(s: &str) -> Result<Self, TrainError> {
        let mol = mol_from_smiles(s)?;
        let descriptors = compute_descriptors(&mol);
        Ok(ReferenceMol {
            smiles: canonical_smiles(&mol),
            inputs: conditioner_inputs(&descriptors),
            features: graph_features(&mol)?,
            descriptors,
            mol,
        })
    }
}

/// A line of the corpus file that could not be used.
#[derive(Clone, Debug, PartialEq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub mols: Vec<ReferenceMol>,
    pub skipped: Vec<SkippedLine>,
}

impl Corpus {
    /// Parses one SMILES per line; malformed or invalid entries are skipped
    /// and recorded.
    pub fn from_smiles_text(text: &str) -> Self {
        let mut c = Corpus::default();
        for (line, s) in read_smiles_lines(text) {
            match ReferenceMol::from_smiles(s) {
                Ok(m) => c.mols.push(m),
                Err(e) => c.skipped.push(SkippedLine {
                    line,
                    reason: e.to_string(),
                }),
            }
        }
        c
    }

    pub fn read(path: &Path) -> Result<Self, TrainError> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        Ok(Self::from_smiles_text(&text))
    }

    pub fn len(&self) -> usize {
        self.mols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mols.is_empty()
    }

    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.mols.iter().map(|m| m.inputs.clone()).collect()
    }

    /// `n` molecules drawn without replacement under `seed`, in corpus
    /// order.
    pub fn subset(&self, n: usize, seed: u64) -> Corpus {
        let n = n.min(self.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, self.len(), n).into_vec();
        idx.sort_unstable();
        Corpus {
            mols: idx.into_iter().map(|i| self.mols[i].clone()).collect(),
            skipped: Vec::new(),
        }
    }

    /// Interquartile range of each conditioner input.
    pub fn input_iqr(&self) -> Vec<f64> {
        let inputs = self.inputs();
        let w = inputs.first().map_or(0, |r| r.len());
        (0..w)
            .map(|j| {
                let mut col: Vec<f64> = inputs.iter().map(|r| r[j]).collect();
                col.sort_by(f64::total_cmp);
                quantile_sorted(&col, 0.75) - quantile_sorted(&col, 0.25)
            })
            .collect()
    }
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Stand-in for an encoder's latent matrix when none is supplied: column
/// `j` mixes the standardized inputs along a random unit direction with
/// signal weight `s_j = 1 − j/m` and fills the rest with independent
/// noise, so the columns have a known relevance order.
pub fn synthetic_latent_matrix(
    inputs: &[Vec<f64>],
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, TrainError> {
    let std = Standardizer::fit(inputs)?;
    let p = std.mean.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let v: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    Ok(inputs
        .iter()
        .map(|x| {
            let xs = std.apply(x);
            (0..m)
                .map(|j| {
                    let s = 1.0 - j as f64 / m as f64;
                    let signal: f64 = dirs[j].iter().zip(&xs).map(|(a, b)| a * b).sum();
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    s * signal + (1.0 - s * s).sqrt() * noise
                })
                .collect()
        })
        .collect())
}

/// Latent matrix from a headerless numeric CSV or a tensor blob holding a
/// rank-2 tensor named `latent`.
pub fn read_latent_matrix(path: &Path) -> Result<Vec<Vec<f64>>, TrainError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(crate::blob::MAGIC) {
        let b = Blob::from_bytes(&bytes)?;
        let t = b.get("latent")?;
        if t.shape.len() != 2 {
            return Err(TrainError::Config(format!(
                "latent tensor must be rank 2, got {:?}",
                t.shape
            )));
        }
        return Ok(t
            .data
            .chunks(t.shape[1].max(1))
            .map(|r| r.to_vec())
            .collect());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes.as_slice());
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| TrainError::Config(format!("latent CSV: {e}")))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| TrainError::Config(format!("latent CSV row {}: {e}", k + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_bad_lines_and_keeps_line_numbers() {
        let c = Corpus::from_smiles_text("CCO\n# note\nC1CC\nc1ccccc1 benzene\nCX\n");
        assert_eq!(c.len(), 2);
        assert_eq!(
            c.skipped.iter().map(|s| s.line).collect::<Vec<_>>(),
            vec![3, 5]
        );
        assert_eq!(c.mols[1].smiles, "c1ccccc1");
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.25), 2.0);
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&[0.0, 1.0], 0.25), 0.25);
    }

    #[test]
    fn synthetic_matrix_shape_and_seeding() {
        let c = Corpus::from_smiles_text(
            "CCO\nCCCCO\nc1ccccc1\nCC(=O)O\nCCN\nc1ccncc1\nCCCCCCCC\nOCCO\nCC(C)C\nc1ccccc1O\nCOC\nCC(F)(F)F",
        );
        let z = synthetic_latent_matrix(&c.inputs(), 8, 3).unwrap();
        assert_eq!((z.len(), z[0].len()), (12, 8));
        assert_eq!(z, synthetic_latent_matrix(&c.inputs(), 8, 3).unwrap());
    }
}
