//! Classical ablation head: a small residual MLP with a bottleneck as wide
//! as the qubit register, producing patches of the same shape as the
//! circuit path.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    apply_carbon_prior, check_len, patch_sigmoid, InitConfig, PatchGenerator, PatchTensor, QError,
    QuantumConfig,
};
use crate::blob::Blob;

const LN_EPS: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalConfig {
    pub residual_blocks: usize,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        ClassicalConfig { residual_blocks: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Affine {
    rows: usize,
    cols: usize,
    w: Vec<f64>,
    b: Vec<f64>,
}

impl Affine {
    fn zeros(rows: usize, cols: usize) -> Self {
        Affine {
            rows,
            cols,
            w: vec![0.0; rows * cols],
            b: vec![0.0; cols],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.b.clone();
        for (i, &xi) in x.iter().enumerate() {
            for (o, &w) in out
                .iter_mut()
                .zip(&self.w[i * self.cols..(i + 1) * self.cols])
            {
                *o += xi * w;
            }
        }
        out
    }

    fn len(&self) -> usize {
        self.w.len() + self.b.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Norm {
    gamma: Vec<f64>,
    beta: Vec<f64>,
}

impl Norm {
    fn identity(n: usize) -> Self {
        Norm {
            gamma: vec![1.0; n],
            beta: vec![0.0; n],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        x.iter()
            .zip(self.gamma.iter().zip(&self.beta))
            .map(|(v, (g, b))| (v - mean) * inv * g + b)
            .collect()
    }

    fn len(&self) -> usize {
        self.gamma.len() + self.beta.len()
    }
}

/// Tanh approximation of GELU.
fn gelu(x: f64) -> f64 {
    const C: f64 = 0.797_884_560_802_865_4;
    0.5 * x * (1.0 + (C * (x + 0.044715 * x * x * x)).tanh())
}

/// `x₀ = gelu(LN(W₀z + b₀))`, then per block `x ← x + gelu(LN(Wx + b))`,
/// and finally `sigmoid(W_out x + b_out)` reshaped to a patch.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalHead {
    config: QuantumConfig,
    head: ClassicalConfig,
    input: Affine,
    input_norm: Norm,
    blocks: Vec<(Affine, Norm)>,
    output: Affine,
}

impl ClassicalHead {
    pub fn zeros(config: QuantumConfig, head: ClassicalConfig) -> Self {
        let q = config.n_qubits;
        ClassicalHead {
            input: Affine::zeros(config.latent_dim, q),
            input_norm: Norm::identity(q),
            blocks: (0..head.residual_blocks)
                .map(|_| (Affine::zeros(q, q), Norm::identity(q)))
                .collect(),
            output: Affine::zeros(q, config.patch_width()),
            config,
            head,
        }
    }

    /// [`ClassicalHead::init_with`] under the default [`InitConfig`].
    pub fn init(config: QuantumConfig, head: ClassicalConfig, seed: u64) -> Self {
        Self::init_with(config, head, &InitConfig::default(), seed)
    }

    /// Affine weights and biases uniform in ±1/√fan_in; norms start as
    /// identity. The layer norms already give the output layer unit-scale
    /// inputs, so only `init.carbon_prior` is used here.
    pub fn init_with(
        config: QuantumConfig,
        head: ClassicalConfig,
        init: &InitConfig,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = Self::zeros(config, head);
        let mut fill = |a: &mut Affine| {
            let s = 1.0 / (a.rows as f64).sqrt();
            for x in a.w.iter_mut().chain(a.b.iter_mut()) {
                *x = rng.random_range(-s..=s);
            }
        };
        fill(&mut h.input);
        for (a, _) in h.blocks.iter_mut() {
            fill(a);
        }
        fill(&mut h.output);
        apply_carbon_prior(&mut h.output.b, h.config.f_node, init.carbon_prior);
        h
    }

    pub fn head_config(&self) -> &ClassicalConfig {
        &self.head
    }

    pub fn to_blob(&self, seed: Option<u64>) -> Blob {
        let mut b = Blob::new(json!({
            "kind": "classical",
            "config": self.config,
            "head": self.head,
            "seed": seed,
        }));
        let push_affine = |b: &mut Blob, name: &str, a: &Affine| {
            b.push(format!("{name}.w"), vec![a.rows, a.cols], a.w.clone());
            b.push(format!("{name}.b"), vec![a.cols], a.b.clone());
        };
        let push_norm = |b: &mut Blob, name: &str, n: &Norm| {
            b.push(
                format!("{name}.gamma"),
                vec![n.gamma.len()],
                n.gamma.clone(),
            );
            b.push(format!("{name}.beta"), vec![n.beta.len()], n.beta.clone());
        };
        push_affine(&mut b, "input", &self.input);
        push_norm(&mut b, "input_norm", &self.input_norm);
        for (k, (a, n)) in self.blocks.iter().enumerate() {
            push_affine(&mut b, &format!("block{k}"), a);
            push_norm(&mut b, &format!("block{k}_norm"), n);
        }
        push_affine(&mut b, "output", &self.output);
        b
    }

    pub fn from_blob(b: &Blob) -> Result<Self, QError> {
        if b.header.get("kind").and_then(|k| k.as_str()) != Some("classical") {
            return Err(QError::Config(
                "blob is not a classical-head checkpoint".into(),
            ));
        }
        let config: QuantumConfig = serde_json::from_value(b.header["config"].clone())
            .map_err(|e| QError::Config(format!("checkpoint config: {e}")))?;
        let head: ClassicalConfig = serde_json::from_value(b.header["head"].clone())
            .map_err(|e| QError::Config(format!("checkpoint head config: {e}")))?;
        config.validate()?;
        let mut h = Self::zeros(config, head);
        let load_affine = |name: &str, a: &mut Affine| -> Result<(), QError> {
            a.w = b.take(&format!("{name}.w"), &[a.rows, a.cols])?;
            a.b = b.take(&format!("{name}.b"), &[a.cols])?;
            check_len("classical weights", &a.w, a.rows * a.cols)
        };
        let load_norm = |name: &str, n: &mut Norm| -> Result<(), QError> {
            let len = n.gamma.len();
            n.gamma = b.take(&format!("{name}.gamma"), &[len])?;
            n.beta = b.take(&format!("{name}.beta"), &[len])?;
            Ok(())
        };
        load_affine("input", &mut h.input)?;
        load_norm("input_norm", &mut h.input_norm)?;
        for (k, (a, n)) in h.blocks.iter_mut().enumerate() {
            load_affine(&format!("block{k}"), a)?;
            load_norm(&format!("block{k}_norm"), n)?;
        }
        load_affine("output", &mut h.output)?;
        Ok(h)
    }

    pub fn save(&self, path: &Path, seed: Option<u64>) -> Result<(), QError> {
        Ok(self.to_blob(seed).write_file(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, QError> {
        Self::from_blob(&Blob::read_file(path)?)
    }

    pub fn forward(&self, z: &[f64]) -> Result<PatchTensor, QError> {
        check_len("latent vector", z, self.config.latent_dim)?;
        let mut x: Vec<f64> = self
            .input_norm
            .apply(&self.input.apply(z))
            .into_iter()
            .map(gelu)
            .collect();
        for (a, n) in &self.blocks {
            let r = n.apply(&a.apply(&x));
            for (xi, ri) in x.iter_mut().zip(r) {
                *xi += gelu(ri);
            }
        }
        let out = self
            .output
            .apply(&x)
            .into_iter()
            .map(patch_sigmoid)
            .collect();
        PatchTensor::new(self.config.n_nodes, self.config.f_node, out)
    }
}

impl PatchGenerator for ClassicalHead {
    fn config(&self) -> &QuantumConfig {
        &self.config
    }

    fn generate(&self, z: &[f64]) -> Result<PatchTensor, QError> {
        self.forward(z)
    }

    fn n_trainable(&self) -> usize {
        self.input.len()
            + self.input_norm.len()
            + self
                .blocks
                .iter()
                .map(|(a, n)| a.len() + n.len())
                .sum::<usize>()
            + self.output.len()
    }

    fn label(&self) -> &'static str {
        "classical"
    }
}
