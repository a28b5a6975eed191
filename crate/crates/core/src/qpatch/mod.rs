//! Simulated patch generator: an RY angle encoding of the latent code, a
//! stack of strongly entangling layers, Pauli-Z readout and a sigmoid head
//! that reshapes the expectations into a node-embedding patch. A
//! parameter-matched classical MLP can stand in for the circuit.

mod circuit;
mod classical;
mod statevector;

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::blob::{Blob, BlobError};

pub use circuit::{
    encode_angles, expectation_jacobian, generate_patch, parameter_shift_grad,
    simulate_expectations, simulate_traced, AngleGrad,
};
pub use classical::{ClassicalConfig, ClassicalHead};
pub use statevector::{rx, ry, rz, Statevector};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum QError {
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Blob(#[from] BlobError),
}

pub(crate) fn check_len(what: &'static str, v: &[f64], expected: usize) -> Result<(), QError> {
    if v.len() != expected {
        return Err(QError::ShapeMismatch {
            what,
            expected,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(QError::NonFinite(what));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantumConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_nodes: usize,
    pub f_node: usize,
    pub latent_dim: usize,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        QuantumConfig {
            n_qubits: 9,
            n_layers: 2,
            n_nodes: 48,
            f_node: 16,
            latent_dim: 9,
        }
    }
}

impl QuantumConfig {
    pub fn validate(&self) -> Result<(), QError> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(QError::Config(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {}",
                self.n_qubits
            )));
        }
        if self.n_nodes == 0 || self.f_node == 0 || self.latent_dim == 0 {
            return Err(QError::Config(
                "n_nodes, f_node and latent_dim must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn patch_width(&self) -> usize {
        self.n_nodes * self.f_node
    }
}

/// Initialization of the readout head.
///
/// Two random entangling layers leave every ⟨Z⟩ close to zero (rms about
/// 0.03 on nine qubits), so a head scaled by 1/√fan_in alone maps every
/// latent code to nearly the same inert patch. `post_gain` multiplies the
/// head weights, and `carbon_prior` is added to the bias of element channel
/// 0 of every node row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    pub post_gain: f64,
    pub carbon_prior: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            post_gain: 60.0,
            carbon_prior: 0.7,
        }
    }
}

impl InitConfig {
    /// Plain 1/√fan_in scaling with no prior.
    pub fn standard() -> Self {
        InitConfig {
            post_gain: 1.0,
            carbon_prior: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), QError> {
        if !self.post_gain.is_finite() || self.post_gain <= 0.0 || !self.carbon_prior.is_finite() {
            return Err(QError::Config(
                "post_gain must be positive and carbon_prior finite".into(),
            ));
        }
        Ok(())
    }
}

/// Trainable tensors of the circuit path, all row-major.
///
/// * `w_in`: `latent_dim × n_qubits`, `b_in`: `n_qubits`
/// * `alpha`: `n_layers × n_qubits × 3` (x, y, z rotation angles)
/// * `w_post`: `n_qubits × (n_nodes·f_node)`, `b_post`: `n_nodes·f_node`
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumParams {
    pub config: QuantumConfig,
    pub w_in: Vec<f64>,
    pub b_in: Vec<f64>,
    pub alpha: Vec<f64>,
    pub w_post: Vec<f64>,
    pub b_post: Vec<f64>,
}

impl QuantumParams {
    /// All-zero parameters.
    pub fn zeros(config: QuantumConfig) -> Self {
        let (q, l, d, w) = (
            config.n_qubits,
            config.n_layers,
            config.latent_dim,
            config.patch_width(),
        );
        QuantumParams {
            w_in: vec![0.0; d * q],
            b_in: vec![0.0; q],
            alpha: vec![0.0; l * q * 3],
            w_post: vec![0.0; q * w],
            b_post: vec![0.0; w],
            config,
        }
    }

    /// [`QuantumParams::init_with`] under the default [`InitConfig`].
    pub fn init(config: QuantumConfig, seed: u64) -> Self {
        Self::init_with(config, &InitConfig::default(), seed)
    }

    /// Angles uniform in [−π, π]; affine maps uniform in ±1/√fan_in, the head
    /// weights then scaled by `init.post_gain` and the carbon channel biased.
    pub fn init_with(config: QuantumConfig, init: &InitConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros(config);
        let s_in = 1.0 / (p.config.latent_dim as f64).sqrt();
        let s_post = 1.0 / (p.config.n_qubits as f64).sqrt();
        for x in p.w_in.iter_mut().chain(p.b_in.iter_mut()) {
            *x = rng.random_range(-s_in..=s_in);
        }
        for x in p.alpha.iter_mut() {
            *x = rng.random_range(-PI..=PI);
        }
        for x in p.w_post.iter_mut().chain(p.b_post.iter_mut()) {
            *x = rng.random_range(-s_post..=s_post);
        }
        for x in p.w_post.iter_mut() {
            *x *= init.post_gain;
        }
        apply_carbon_prior(&mut p.b_post, p.config.f_node, init.carbon_prior);
        p
    }

    pub fn validate(&self) -> Result<(), QError> {
        let c = &self.config;
        c.validate()?;
        check_len("w_in", &self.w_in, c.latent_dim * c.n_qubits)?;
        check_len("b_in", &self.b_in, c.n_qubits)?;
        check_len("alpha", &self.alpha, c.n_layers * c.n_qubits * 3)?;
        check_len("w_post", &self.w_post, c.n_qubits * c.patch_width())?;
        check_len("b_post", &self.b_post, c.patch_width())?;
        Ok(())
    }

    pub fn n_trainable(&self) -> usize {
        self.w_in.len() + self.b_in.len() + self.alpha.len() + self.w_post.len() + self.b_post.len()
    }

    pub fn to_blob(&self, seed: Option<u64>) -> Blob {
        let c = &self.config;
        let mut b = Blob::new(json!({"kind": "quantum", "config": c, "seed": seed}));
        b.push("w_in", vec![c.latent_dim, c.n_qubits], self.w_in.clone());
        b.push("b_in", vec![c.n_qubits], self.b_in.clone());
        b.push("alpha", vec![c.n_layers, c.n_qubits, 3], self.alpha.clone());
        b.push(
            "w_post",
            vec![c.n_qubits, c.patch_width()],
            self.w_post.clone(),
        );
        b.push("b_post", vec![c.patch_width()], self.b_post.clone());
        b
    }

    /// Loads a checkpoint and checks every tensor against the embedded
    /// config, and against `expected` when given.
    pub fn from_blob(b: &Blob, expected: Option<&QuantumConfig>) -> Result<Self, QError> {
        if b.header.get("kind").and_then(|k| k.as_str()) != Some("quantum") {
            return Err(QError::Config("blob is not a quantum checkpoint".into()));
        }
        let c: QuantumConfig = serde_json::from_value(b.header["config"].clone())
            .map_err(|e| QError::Config(format!("checkpoint config: {e}")))?;
        if let Some(exp) = expected {
            if exp != &c {
                return Err(QError::Config(format!(
                    "checkpoint config {c:?} differs from {exp:?}"
                )));
            }
        }
        c.validate()?;
        let p = QuantumParams {
            w_in: b.take("w_in", &[c.latent_dim, c.n_qubits])?,
            b_in: b.take("b_in", &[c.n_qubits])?,
            alpha: b.take("alpha", &[c.n_layers, c.n_qubits, 3])?,
            w_post: b.take("w_post", &[c.n_qubits, c.patch_width()])?,
            b_post: b.take("b_post", &[c.patch_width()])?,
            config: c,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn save(&self, path: &Path, seed: Option<u64>) -> Result<(), QError> {
        Ok(self.to_blob(seed).write_file(path)?)
    }

    pub fn load(path: &Path, expected: Option<&QuantumConfig>) -> Result<Self, QError> {
        Self::from_blob(&Blob::read_file(path)?, expected)
    }
}

/// `n_nodes × f_node` node-embedding patch with entries in (0, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct PatchTensor {
    pub n_nodes: usize,
    pub f_node: usize,
    pub data: Vec<f64>,
}

impl PatchTensor {
    pub fn new(n_nodes: usize, f_node: usize, data: Vec<f64>) -> Result<Self, QError> {
        if data.len() != n_nodes * f_node {
            return Err(QError::ShapeMismatch {
                what: "patch",
                expected: n_nodes * f_node,
                found: data.len(),
            });
        }
        Ok(PatchTensor {
            n_nodes,
            f_node,
            data,
        })
    }

    pub fn filled(n_nodes: usize, f_node: usize, value: f64) -> Self {
        PatchTensor {
            n_nodes,
            f_node,
            data: vec![value; n_nodes * f_node],
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.f_node..(i + 1) * self.f_node]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.f_node..(i + 1) * self.f_node]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.f_node + j]
    }
}

/// Stores a batch of equally shaped patches as one `B × n_nodes × f_node`
/// tensor.
pub fn write_patch_batch(path: &Path, patches: &[PatchTensor]) -> Result<(), QError> {
    let (n, f) = patches.first().map_or((0, 0), |p| (p.n_nodes, p.f_node));
    let mut data = Vec::with_capacity(patches.len() * n * f);
    for p in patches {
        if (p.n_nodes, p.f_node) != (n, f) {
            return Err(QError::Config(
                "patches in a batch must share one shape".into(),
            ));
        }
        data.extend_from_slice(&p.data);
    }
    let mut b = Blob::new(json!({"kind": "patch_batch"}));
    b.push("patches", vec![patches.len(), n, f], data);
    Ok(b.write_file(path)?)
}

pub fn read_patch_batch(path: &Path) -> Result<Vec<PatchTensor>, QError> {
    let b = Blob::read_file(path)?;
    let t = b.get("patches")?;
    if t.shape.len() != 3 {
        return Err(QError::Config(format!(
            "patch batch must be rank 3, got {:?}",
            t.shape
        )));
    }
    let (n, f) = (t.shape[1], t.shape[2]);
    Ok(t.data
        .chunks(n * f)
        .take(t.shape[0])
        .map(|c| PatchTensor {
            n_nodes: n,
            f_node: f,
            data: c.to_vec(),
        })
        .collect())
}

/// Latent code to patch map; the quantum circuit and the classical head are
/// interchangeable behind it.
pub trait PatchGenerator: Send + Sync {
    fn config(&self) -> &QuantumConfig;
    fn generate(&self, z: &[f64]) -> Result<PatchTensor, QError>;
    fn n_trainable(&self) -> usize;
    fn label(&self) -> &'static str;
}

impl PatchGenerator for QuantumParams {
    fn config(&self) -> &QuantumConfig {
        &self.config
    }

    fn generate(&self, z: &[f64]) -> Result<PatchTensor, QError> {
        generate_patch(z, self)
    }

    fn n_trainable(&self) -> usize {
        QuantumParams::n_trainable(self)
    }

    fn label(&self) -> &'static str {
        "quantum"
    }
}

pub(crate) fn apply_carbon_prior(bias: &mut [f64], f_node: usize, prior: f64) {
    for row in bias.chunks_mut(f_node) {
        row[0] += prior;
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Patch-head sigmoid, held inside the open unit interval where plain
/// `sigmoid` rounds to 0 or 1 in f64.
pub(crate) fn patch_sigmoid(x: f64) -> f64 {
    sigmoid(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}
