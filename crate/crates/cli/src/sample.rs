//! Latent codes for generation: conditioner outputs on descriptor targets,
//! or plain Gaussian draws.

use std::path::Path;

use clap::ValueEnum;
use patchmol::nets::{Conditioner, CONDITIONER_DESCRIPTORS};
use patchmol::train::{quantile_sorted, Corpus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::Serialize;

use crate::config::GenerateConfig;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Descriptor,
    RandomLatent,
}

/// Stream tags keep generation draws independent of training draws made
/// under the same seed.
pub const TAG_GENERATE: u64 = 0x67_656e;
pub const TAG_CALIBRATE: u64 = 0x74_6175;

pub fn stream_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(tag.wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
}

/// One generation attempt before decoding.
#[derive(Clone, Debug)]
pub struct Draw {
    /// Row of the target grid behind this attempt.
    pub target: Option<usize>,
    pub code: Vec<f64>,
}

/// Where descriptor-mode inputs come from.
pub enum Source<'a> {
    /// Attempt `i` uses row `i mod len`.
    Grid(&'a [Vec<f64>]),
    /// Uniform corpus rows with IQR-scaled jitter.
    Corpus(&'a Corpus),
}

pub fn random_latent(n: usize, dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<Draw> {
    (0..n)
        .map(|_| Draw {
            target: None,
            code: (0..dim)
                .map(|_| {
                    let e: f64 = StandardNormal.sample(rng);
                    scale * e
                })
                .collect(),
        })
        .collect()
}

pub fn descriptor_codes(
    n: usize,
    source: &Source<'_>,
    conditioner: &Conditioner,
    gc: &GenerateConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Draw>, CliError> {
    let iqr = match source {
        Source::Corpus(c) => c.input_iqr(),
        Source::Grid(_) => Vec::new(),
    };
    let code_noise = (gc.latent_jitter > 0.0)
        .then(|| Normal::new(0.0, gc.latent_jitter).expect("positive sigma"));
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (target, x) = match source {
            Source::Grid(rows) => (Some(i % rows.len()), rows[i % rows.len()].clone()),
            Source::Corpus(c) => {
                let row = &c.mols[rng.random_range(0..c.len())].inputs;
                let x = row
                    .iter()
                    .zip(&iqr)
                    .map(|(v, q)| {
                        let s = gc.descriptor_jitter * q;
                        if s > 0.0 {
                            let e: f64 = StandardNormal.sample(rng);
                            v + s * e
                        } else {
                            *v
                        }
                    })
                    .collect();
                (None, x)
            }
        };
        let mut code = conditioner.forward(&x)?;
        if let Some(noise) = &code_noise {
            for v in code.iter_mut() {
                *v += noise.sample(rng);
            }
        }
        out.push(Draw { target, code });
    }
    Ok(out)
}

/// Reads a target grid whose header names a subset of the conditioner
/// descriptors. Absent columns take the corpus median; without a corpus
/// every column is required.
pub fn read_target_grid(path: &Path, corpus: Option<&Corpus>) -> Result<Vec<Vec<f64>>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let header = rdr.headers()?.clone();
    let mut cols = Vec::with_capacity(header.len());
    for h in header.iter() {
        let j = CONDITIONER_DESCRIPTORS
            .iter()
            .position(|d| d.eq_ignore_ascii_case(h))
            .ok_or_else(|| {
                CliError::usage(format!(
                    "{}: unknown target column {h:?}; expected some of {}",
                    path.display(),
                    CONDITIONER_DESCRIPTORS.join(", ")
                ))
            })?;
        cols.push(j);
    }
    let defaults: Vec<Option<f64>> = (0..CONDITIONER_DESCRIPTORS.len())
        .map(|j| {
            corpus.filter(|c| !c.is_empty()).map(|c| {
                let mut v: Vec<f64> = c.mols.iter().map(|m| m.inputs[j]).collect();
                v.sort_by(f64::total_cmp);
                quantile_sorted(&v, 0.5)
            })
        })
        .collect();
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut row: Vec<Option<f64>> = defaults.clone();
        for (field, &j) in rec.iter().zip(&cols) {
            let v: f64 = field.parse().map_err(|_| {
                CliError::usage(format!(
                    "{}: row {}: {field:?} is not a number",
                    path.display(),
                    k + 1
                ))
            })?;
            row[j] = Some(v);
        }
        let row: Option<Vec<f64>> = row.into_iter().collect();
        rows.push(row.ok_or_else(|| {
            CliError::usage(format!(
                "{}: columns missing and no reference corpus to fill them",
                path.display()
            ))
        })?);
    }
    if rows.is_empty() {
        return Err(CliError::usage(format!(
            "{}: target grid has no rows",
            path.display()
        )));
    }
    Ok(rows)
}

pub fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_fills_missing_columns_with_medians() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "# grid\nqed,logp\n0.5,1.0\n0.7,2.5\n").unwrap();
        let corpus = Corpus::from_smiles_text("CCO\nCCCO\nCCCCO\n");
        let rows = read_target_grid(&p, Some(&corpus)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[1][0], rows[1][1]), (0.7, 2.5));
        assert_eq!(rows[0][5], 4.0);
        assert_eq!(read_target_grid(&p, None).unwrap_err().code, 2);
        std::fs::write(&p, "qed,colour\n0.5,1\n").unwrap();
        assert_eq!(read_target_grid(&p, Some(&corpus)).unwrap_err().code, 2);
    }

    #[test]
    fn random_codes_are_seeded() {
        let a = random_latent(5, 9, 1.0, &mut rng_for(3, TAG_GENERATE));
        let b = random_latent(5, 9, 1.0, &mut rng_for(3, TAG_GENERATE));
        let c = random_latent(5, 9, 1.0, &mut rng_for(4, TAG_GENERATE));
        assert_eq!(
            a.iter().map(|d| d.code.clone()).collect::<Vec<_>>(),
            b.iter().map(|d| d.code.clone()).collect::<Vec<_>>()
        );
        assert_ne!(a[0].code, c[0].code);
    }
}
