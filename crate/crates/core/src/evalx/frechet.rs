//! Fréchet distance between Gaussian fits of PCA-projected fingerprints.
//! The projection is fitted on the reference population only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::chem::Fingerprint;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdConfig {
    pub pca_components: usize,
    /// Both populations are subsampled to the smaller of this and their
    /// sizes.
    pub sample_size: usize,
    pub shrinkage: bool,
    /// Blend weight toward `tr(Σ)/d · I` when `shrinkage` is on.
    pub shrinkage_intensity: f64,
    pub seed: u64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            pca_components: 100,
            sample_size: 5000,
            shrinkage: false,
            shrinkage_intensity: 0.1,
            seed: 0,
        }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.pca_components == 0 || self.sample_size < 2 {
            return Err(EvalError::Config(
                "pca_components must be positive and sample_size at least 2".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.shrinkage_intensity) {
            return Err(EvalError::Config(
                "shrinkage_intensity must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Sample mean and unbiased covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianFit {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianFit {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Self {
        let d = mean.len();
        GaussianFit {
            mean: DVector::from_vec(mean),
            cov: DMatrix::from_fn(d, d, |i, j| cov[i][j]),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `(1 − α)Σ + α·tr(Σ)/d·I`.
    pub fn shrunk(&self, alpha: f64) -> Self {
        let d = self.dim();
        let target = if d == 0 {
            0.0
        } else {
            self.cov.trace() / d as f64
        };
        let mut cov = self.cov.scale(1.0 - alpha);
        for i in 0..d {
            cov[(i, i)] += alpha * target;
        }
        GaussianFit {
            mean: self.mean.clone(),
            cov,
        }
    }
}

pub fn gaussian_fit(samples: &[Vec<f64>]) -> Result<GaussianFit, EvalError> {
    let n = samples.len();
    if n < 2 {
        return Err(EvalError::InsufficientInput { needed: 2, got: n });
    }
    let d = samples[0].len();
    if samples.iter().any(|s| s.len() != d) {
        return Err(EvalError::DegenerateInput(
            "samples have different dimensions".into(),
        ));
    }
    let x = DMatrix::from_fn(n, d, |i, j| samples[i][j]);
    let mean = x.row_mean().transpose();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    Ok(GaussianFit { mean, cov })
}

fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let e = SymmetricEigen::new(sym);
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Principal square root of a symmetric positive semi-definite matrix,
/// with negative eigenvalues clamped to zero.
fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(m);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| v.max(0.0).sqrt()),
    ));
    &vecs * d * vecs.transpose()
}

/// `‖μ_a − μ_b‖² + tr(Σ_a + Σ_b − 2(Σ_a Σ_b)^{1/2})`, with the cross term
/// evaluated as `tr (Σ_a^{1/2} Σ_b Σ_a^{1/2})^{1/2}`.
pub fn frechet_gaussian(a: &GaussianFit, b: &GaussianFit) -> Result<f64, EvalError> {
    if a.dim() != b.dim() {
        return Err(EvalError::DegenerateInput(format!(
            "dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    if a.mean
        .iter()
        .chain(b.mean.iter())
        .chain(a.cov.iter())
        .chain(b.cov.iter())
        .any(|v| !v.is_finite())
    {
        return Err(EvalError::DegenerateInput("non-finite moments".into()));
    }
    let diff = &a.mean - &b.mean;
    let sa = psd_sqrt(&a.cov);
    let inner = &sa * &b.cov * &sa;
    let (vals, _) = sym_eigen(&inner);
    let cross: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    let fd = diff.norm_squared() + a.cov.trace() + b.cov.trace() - 2.0 * cross;
    Ok(fd.max(0.0))
}

/// Linear projection fitted on a reference sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Pca {
    /// Input columns with non-zero reference variance.
    pub active: Vec<usize>,
    pub mean: Vec<f64>,
    /// One row per component over the active columns.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Share of the reference variance captured by the kept components.
    pub explained_variance: f64,
}

impl Pca {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let c: Vec<f64> = self
            .active
            .iter()
            .zip(&self.mean)
            .map(|(&j, m)| x[j] - m)
            .collect();
        self.components
            .iter()
            .map(|w| w.iter().zip(&c).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// PCA by covariance eigendecomposition, keeping at most `k` components in
/// descending eigenvalue order. Constant columns are dropped first; when
/// the sample is smaller than the remaining width the equivalent Gram
/// matrix is decomposed instead.
pub fn fingerprint_pca(reference: &[Vec<f64>], k: usize) -> Result<Pca, EvalError> {
    let n = reference.len();
    if n < 2 {
        return Err(EvalError::InsufficientInput { needed: 2, got: n });
    }
    let width = reference[0].len();
    let active: Vec<usize> = (0..width)
        .filter(|&j| reference.iter().any(|r| r[j] != reference[0][j]))
        .collect();
    if active.is_empty() {
        return Err(EvalError::DegenerateInput(
            "reference sample has no variance".into(),
        ));
    }
    let d = active.len();
    let mean: Vec<f64> = active
        .iter()
        .map(|&j| reference.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let x = DMatrix::from_fn(n, d, |i, c| reference[i][active[c]] - mean[c]);
    let denom = n as f64 - 1.0;
    let (mut pairs, total): (Vec<(f64, Vec<f64>)>, f64) = if d <= n {
        let cov = x.transpose() * &x / denom;
        let (vals, vecs) = sym_eigen(&cov);
        let total = cov.trace();
        (
            vals.iter()
                .enumerate()
                .map(|(c, &v)| (v, vecs.column(c).iter().copied().collect()))
                .collect(),
            total,
        )
    } else {
        let gram = &x * x.transpose() / denom;
        let (vals, vecs) = sym_eigen(&gram);
        let total = gram.trace();
        let floor = 1e-12 * vals.iter().fold(0.0f64, |m, v| m.max(*v));
        (
            vals.iter()
                .enumerate()
                .filter(|(_, &v)| v > floor)
                .map(|(c, &v)| {
                    // Right singular vector from the left one.
                    let w = x.transpose() * vecs.column(c) / (v * denom).sqrt();
                    (v, w.iter().copied().collect())
                })
                .collect(),
            total,
        )
    };
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.truncate(k.min(n - 1).max(1));
    let kept: f64 = pairs.iter().map(|p| p.0.max(0.0)).sum();
    Ok(Pca {
        active,
        mean,
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        components: pairs.into_iter().map(|p| p.1).collect(),
        explained_variance: if total > 0.0 { kept / total } else { 0.0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdResult {
    pub fd: f64,
    pub n_samples: usize,
    pub components: usize,
    pub explained_variance: f64,
    pub shrinkage: bool,
    pub seed: u64,
}

fn subsample<'a>(fps: &'a [Fingerprint], m: usize, seed: u64) -> Vec<&'a Fingerprint> {
    if fps.len() == m {
        return fps.iter().collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, fps.len(), m).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| &fps[i]).collect()
}

/// Fingerprint Fréchet distance between a generated and a reference
/// population at matched, seeded sample sizes.
pub fn frechet_distance(
    generated: &[Fingerprint],
    reference: &[Fingerprint],
    cfg: &FdConfig,
) -> Result<FdResult, EvalError> {
    cfg.validate()?;
    for set in [generated, reference] {
        if set.len() < 2 {
            return Err(EvalError::InsufficientInput {
                needed: 2,
                got: set.len(),
            });
        }
    }
    let m = cfg.sample_size.min(generated.len()).min(reference.len());
    let dense = |v: Vec<&Fingerprint>| v.into_iter().map(|f| f.to_dense()).collect::<Vec<_>>();
    let r = dense(subsample(reference, m, cfg.seed));
    let g = dense(subsample(generated, m, cfg.seed.wrapping_add(1)));
    if g[0].len() != r[0].len() {
        return Err(EvalError::DegenerateInput(
            "fingerprint widths differ".into(),
        ));
    }
    let pca = fingerprint_pca(&r, cfg.pca_components)?;
    let pr: Vec<Vec<f64>> = r.iter().map(|x| pca.project(x)).collect();
    let pg: Vec<Vec<f64>> = g.iter().map(|x| pca.project(x)).collect();
    let (mut fr, mut fg) = (gaussian_fit(&pr)?, gaussian_fit(&pg)?);
    if cfg.shrinkage {
        fr = fr.shrunk(cfg.shrinkage_intensity);
        fg = fg.shrunk(cfg.shrinkage_intensity);
    }
    Ok(FdResult {
        fd: frechet_gaussian(&fg, &fr)?,
        n_samples: m,
        components: pca.components.len(),
        explained_variance: pca.explained_variance,
        shrinkage: cfg.shrinkage,
        seed: cfg.seed,
    })
}
