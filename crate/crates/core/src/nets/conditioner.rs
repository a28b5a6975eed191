//! Descriptor conditioner and latent-axis ranking.

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::dense::{mse_train_step, Activation, DenseNet};
use super::NetError;
use crate::blob::Blob;
use crate::chem::Descriptors;

/// Descriptor columns fed to the conditioner, in input order.
pub const CONDITIONER_DESCRIPTORS: [&str; 6] =
    ["qed", "logp", "sa", "mol_weight", "tpsa", "n_heavy_atoms"];

pub fn conditioner_inputs(d: &Descriptors) -> Vec<f64> {
    vec![
        d.qed,
        d.logp,
        d.sa,
        d.mol_weight,
        d.tpsa,
        d.n_heavy_atoms as f64,
    ]
}

/// Per-column affine standardization frozen from a training corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn identity(width: usize) -> Self {
        Standardizer {
            mean: vec![0.0; width],
            std: vec![1.0; width],
        }
    }

    /// Column means and population standard deviations; constant columns
    /// get unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, NetError> {
        let first = rows.first().ok_or(NetError::EmptyBatch)?;
        let w = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; w];
        for r in rows {
            if r.len() != w {
                return Err(NetError::ShapeMismatch {
                    what: "standardizer row",
                    expected: w,
                    found: r.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut std = vec![0.0; w];
        for r in rows {
            for ((s, x), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        for s in std.iter_mut() {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Ok(Standardizer { mean, std })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionerConfig {
    pub hidden: Vec<usize>,
    pub dropout: f64,
    /// Standard deviation of the Gaussian jitter added to conditioner
    /// outputs, in latent units.
    pub jitter_sigma: f64,
}

impl Default for ConditionerConfig {
    fn default() -> Self {
        ConditionerConfig {
            hidden: vec![512, 256],
            dropout: 0.1,
            jitter_sigma: 0.05,
        }
    }
}

/// Maps raw descriptor vectors to the selected latent axes: inputs are
/// standardized with frozen statistics, then passed through a ReLU MLP
/// with a linear output.
#[derive(Clone, Debug, PartialEq)]
pub struct Conditioner {
    pub net: DenseNet,
    pub standardizer: Standardizer,
    /// Latent-matrix column behind each output, in output order.
    pub axes: Vec<usize>,
}

impl Conditioner {
    pub fn init(
        cfg: &ConditionerConfig,
        standardizer: Standardizer,
        axes: Vec<usize>,
        seed: u64,
    ) -> Result<Self, NetError> {
        if !(0.0..1.0).contains(&cfg.dropout) {
            return Err(NetError::Config(format!(
                "dropout {} outside [0, 1)",
                cfg.dropout
            )));
        }
        if axes.is_empty() {
            return Err(NetError::Config(
                "conditioner needs at least one latent axis".into(),
            ));
        }
        let mut dims = vec![standardizer.mean.len()];
        dims.extend(&cfg.hidden);
        dims.push(axes.len());
        let net = DenseNet::init(
            &dims,
            Activation::Relu,
            Activation::Identity,
            cfg.dropout,
            seed,
        );
        Ok(Conditioner {
            net,
            standardizer,
            axes,
        })
    }

    pub fn n_in(&self) -> usize {
        self.net.n_in()
    }

    pub fn n_out(&self) -> usize {
        self.net.n_out()
    }

    /// `z` for an already standardized descriptor vector.
    pub fn forward_standardized(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        self.net.forward(x)
    }

    pub fn forward(&self, raw: &[f64]) -> Result<Vec<f64>, NetError> {
        if raw.len() != self.n_in() {
            return Err(NetError::ShapeMismatch {
                what: "descriptor vector",
                expected: self.n_in(),
                found: raw.len(),
            });
        }
        self.net.forward(&self.standardizer.apply(raw))
    }

    /// One full-batch MSE step on raw descriptors with a fresh dropout mask
    /// per sample; returns the pre-step loss.
    pub fn train_step(
        &mut self,
        batch_x: &[Vec<f64>],
        batch_z: &[Vec<f64>],
        lr: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64, NetError> {
        let xs: Vec<Vec<f64>> = batch_x
            .iter()
            .map(|x| {
                if x.len() != self.n_in() {
                    return Err(NetError::ShapeMismatch {
                        what: "descriptor vector",
                        expected: self.n_in(),
                        found: x.len(),
                    });
                }
                Ok(self.standardizer.apply(x))
            })
            .collect::<Result<_, _>>()?;
        mse_train_step(&mut self.net, &xs, batch_z, lr, Some(rng))
    }

    pub fn to_blob(&self, seed: Option<u64>) -> Blob {
        let mut b = Blob::new(json!({}));
        let arch = self.net.push_to_blob(&mut b, "net");
        b.header = json!({
            "kind": "conditioner",
            "arch": arch,
            "axes": self.axes,
            "standardizer": self.standardizer,
            "inputs": CONDITIONER_DESCRIPTORS,
            "seed": seed,
        });
        b
    }

    pub fn from_blob(b: &Blob) -> Result<Self, NetError> {
        if b.header.get("kind").and_then(|k| k.as_str()) != Some("conditioner") {
            return Err(NetError::Config(
                "blob is not a conditioner checkpoint".into(),
            ));
        }
        let net = DenseNet::from_blob(b, "net", &b.header["arch"])?;
        let axes: Vec<usize> = serde_json::from_value(b.header["axes"].clone())
            .map_err(|e| NetError::Config(format!("conditioner axes: {e}")))?;
        let standardizer: Standardizer =
            serde_json::from_value(b.header["standardizer"].clone())
                .map_err(|e| NetError::Config(format!("conditioner standardizer: {e}")))?;
        if axes.len() != net.n_out()
            || standardizer.mean.len() != net.n_in()
            || standardizer.std.len() != net.n_in()
        {
            return Err(NetError::Config(
                "conditioner header disagrees with its tensors".into(),
            ));
        }
        Ok(Conditioner {
            net,
            standardizer,
            axes,
        })
    }

    pub fn save(&self, path: &Path, seed: Option<u64>) -> Result<(), NetError> {
        Ok(self.to_blob(seed).write_file(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        Self::from_blob(&Blob::read_file(path)?)
    }
}

/// Pearson correlation; zero when either side has no variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

fn check_matrix(what: &'static str, rows: &[Vec<f64>]) -> Result<usize, NetError> {
    let w = rows.first().map_or(0, |r| r.len());
    for r in rows {
        if r.len() != w {
            return Err(NetError::ShapeMismatch {
                what,
                expected: w,
                found: r.len(),
            });
        }
    }
    Ok(w)
}

/// Score of each latent column: the largest |Pearson r| against any
/// property column.
pub fn latent_axis_scores(z: &[Vec<f64>], y: &[Vec<f64>]) -> Result<Vec<f64>, NetError> {
    if z.len() < 3 {
        return Err(NetError::DegenerateInput(format!(
            "need at least 3 rows, got {}",
            z.len()
        )));
    }
    if z.len() != y.len() {
        return Err(NetError::ShapeMismatch {
            what: "property rows",
            expected: z.len(),
            found: y.len(),
        });
    }
    let m = check_matrix("latent row", z)?;
    let p = check_matrix("property row", y)?;
    let ycols: Vec<Vec<f64>> = (0..p).map(|j| y.iter().map(|r| r[j]).collect()).collect();
    Ok((0..m)
        .map(|i| {
            let zi: Vec<f64> = z.iter().map(|r| r[i]).collect();
            ycols
                .iter()
                .map(|yj| pearson(&zi, yj).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Indices of the `k` best-scoring latent columns, best first, ties to the
/// lower index.
pub fn rank_latent_axes(z: &[Vec<f64>], y: &[Vec<f64>], k: usize) -> Result<Vec<usize>, NetError> {
    let scores = latent_axis_scores(z, y)?;
    if k > scores.len() {
        return Err(NetError::DegenerateInput(format!(
            "k = {k} exceeds {} latent columns",
            scores.len()
        )));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::DenseLayer;

    #[test]
    fn zero_weights_give_output_bias() {
        let mut c = Conditioner::init(
            &ConditionerConfig::default(),
            Standardizer::identity(6),
            (0..9).collect(),
            3,
        )
        .unwrap();
        for l in c.net.layers.iter_mut() {
            l.w.iter_mut().for_each(|w| *w = 0.0);
        }
        let b3 = c.net.layers[2].b.clone();
        assert_eq!(c.forward(&[0.5, 2.0, 3.0, 250.0, 40.0, 18.0]).unwrap(), b3);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let mut l = DenseLayer::zeros(3, 3, Activation::Identity);
        for i in 0..3 {
            l.w[i * 3 + i] = 1.0;
        }
        let c = Conditioner {
            net: DenseNet::from_layers(vec![l], 0.0).unwrap(),
            standardizer: Standardizer::identity(3),
            axes: vec![0, 1, 2],
        };
        assert_eq!(
            c.forward(&[0.25, -1.5, 7.0]).unwrap(),
            vec![0.25, -1.5, 7.0]
        );
    }

    #[test]
    fn standardizer_centers_and_scales() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        assert_eq!(s.apply(&[3.0, 5.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn rank_examples() {
        let y: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64).sin(), i as f64]).collect();
        let z: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![1.0, ((i * 7) % 5) as f64, y[i][1], (i as f64 * 0.3).cos()])
            .collect();
        let scores = latent_axis_scores(&z, &y).unwrap();
        assert_eq!(scores[0], 0.0);
        assert!((scores[2] - 1.0).abs() < 1e-12);
        assert_eq!(rank_latent_axes(&z, &y, 1).unwrap(), vec![2]);
        assert!(matches!(
            rank_latent_axes(&z[..2], &y[..2], 1),
            Err(NetError::DegenerateInput(_))
        ));
    }

    #[test]
    fn checkpoint_round_trip() {
        let s = Standardizer {
            mean: vec![1.0; 6],
            std: vec![2.0; 6],
        };
        let cfg = ConditionerConfig {
            hidden: vec![8, 4],
            ..Default::default()
        };
        let c = Conditioner::init(&cfg, s, vec![3, 1], 5).unwrap();
        let back =
            Conditioner::from_blob(&Blob::from_bytes(&c.to_blob(Some(5)).to_bytes()).unwrap())
                .unwrap();
        assert_eq!(back, c);
    }
}
