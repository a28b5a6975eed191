//! Edge-aware GINE discriminator over molecular graphs, its training step
//! and the exponential-moving-average teacher.
//!
//! Layer `l` maps node states `x` to
//! `LN(relu(W_l·a_u + b_l))` with
//! `a_u = (1+ε_l)·x_u + Σ_{v∈N(u)} relu(x_v + E_l·e_uv + c_l)`, where `LN`
//! is a layer norm without learned scale or shift. A mean pool feeds a
//! two-layer head producing one logit.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::NetError;
use crate::blob::Blob;
use crate::chem::{BondOrder, MolGraph};

/// Atomic number, total valence, degree, aromatic flag, formal charge,
/// total hydrogens.
pub const NODE_FEATURES: usize = 6;
/// Bond order (1.5 when aromatic), aromatic, conjugated, in ring.
pub const EDGE_FEATURES: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphFeatures {
    pub nodes: Vec<[f64; NODE_FEATURES]>,
    /// Undirected edges `(u, v, features)`.
    pub edges: Vec<(usize, usize, [f64; EDGE_FEATURES])>,
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn graph_features(g: &MolGraph) -> Result<GraphFeatures, NetError> {
    if g.is_empty() {
        return Err(NetError::EmptyGraph);
    }
    let nodes = (0..g.n_atoms())
        .map(|i| {
            let a = g.atom(i);
            [
                a.element.atomic_number() as f64,
                (g.explicit_valence(i) + a.implicit_hydrogens as u32) as f64,
                g.degree(i) as f64,
                flag(a.aromatic),
                a.formal_charge as f64,
                g.total_hydrogens(i) as f64,
            ]
        })
        .collect();
    let edges = g
        .bonds()
        .iter()
        .map(|b| {
            let order = if b.aromatic {
                1.5
            } else {
                match b.order {
                    BondOrder::Single => 1.0,
                    BondOrder::Double => 2.0,
                }
            };
            (
                b.a,
                b.b,
                [order, flag(b.aromatic), flag(b.conjugated), flag(b.in_ring)],
            )
        })
        .collect();
    Ok(GraphFeatures { nodes, edges })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscriminatorConfig {
    pub hidden: usize,
    pub n_layers: usize,
    pub norm_eps: f64,
    pub label_smoothing: f64,
    pub logit_clip: f64,
    pub ema_decay: f64,
}

impl Default for DiscriminatorConfig {
    fn default() -> Self {
        DiscriminatorConfig {
            hidden: 32,
            n_layers: 2,
            norm_eps: 1e-5,
            label_smoothing: 0.1,
            logit_clip: 10.0,
            ema_decay: 0.999,
        }
    }
}

impl DiscriminatorConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.hidden == 0 || self.n_layers == 0 {
            return Err(NetError::Config(
                "discriminator needs a positive width and depth".into(),
            ));
        }
        if !(0.0..0.5).contains(&self.label_smoothing) {
            return Err(NetError::Config(format!(
                "label smoothing {} outside [0, 0.5)",
                self.label_smoothing
            )));
        }
        if self.logit_clip <= 0.0 || self.norm_eps <= 0.0 {
            return Err(NetError::Config(
                "logit clip and norm eps must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.ema_decay) {
            return Err(NetError::Config(format!(
                "EMA decay {} outside [0, 1]",
                self.ema_decay
            )));
        }
        Ok(())
    }
}

/// One message-passing layer; `edge_w` is `d_in × EDGE_FEATURES` and `w` is
/// `hidden × d_in`, both row-major.
#[derive(Clone, Debug, PartialEq)]
struct GineLayer {
    d_in: usize,
    eps: f64,
    edge_w: Vec<f64>,
    edge_b: Vec<f64>,
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphDiscriminator {
    pub config: DiscriminatorConfig,
    layers: Vec<GineLayer>,
    /// `hidden × hidden`.
    head_w1: Vec<f64>,
    head_b1: Vec<f64>,
    head_w2: Vec<f64>,
    head_b2: f64,
}

struct LayerTrace {
    input: Vec<Vec<f64>>,
    /// Pre-activation of each directed message, keyed like `directed`.
    msg_pre: Vec<Vec<f64>>,
    agg: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    normed: Vec<Vec<f64>>,
    inv_sigma: Vec<f64>,
}

struct Trace {
    layers: Vec<LayerTrace>,
    pooled: Vec<f64>,
    head_pre: Vec<f64>,
    logit: f64,
}

/// Directed message list `(target u, source v, edge index)`.
fn directed(f: &GraphFeatures) -> Vec<(usize, usize, usize)> {
    let mut d = Vec::with_capacity(2 * f.edges.len());
    for (k, &(a, b, _)) in f.edges.iter().enumerate() {
        d.push((a, b, k));
        d.push((b, a, k));
    }
    d
}

fn matvec(w: &[f64], x: &[f64], rows: usize) -> Vec<f64> {
    let cols = x.len();
    (0..rows)
        .map(|r| {
            w[r * cols..(r + 1) * cols]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

impl GraphDiscriminator {
    pub fn zeros(config: DiscriminatorConfig) -> Self {
        let h = config.hidden;
        let layers = (0..config.n_layers)
            .map(|l| {
                let d_in = if l == 0 { NODE_FEATURES } else { h };
                GineLayer {
                    d_in,
                    eps: 0.0,
                    edge_w: vec![0.0; d_in * EDGE_FEATURES],
                    edge_b: vec![0.0; d_in],
                    w: vec![0.0; h * d_in],
                    b: vec![0.0; h],
                }
            })
            .collect();
        GraphDiscriminator {
            layers,
            head_w1: vec![0.0; h * h],
            head_b1: vec![0.0; h],
            head_w2: vec![0.0; h],
            head_b2: 0.0,
            config,
        }
    }

    /// Affine parameters uniform in ±1/√fan_in; every ε starts at 0.
    pub fn init(config: DiscriminatorConfig, seed: u64) -> Result<Self, NetError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = Self::zeros(config);
        let mut fill = |v: &mut [f64], fan_in: usize| {
            let s = 1.0 / (fan_in as f64).sqrt();
            for x in v.iter_mut() {
                *x = rng.random_range(-s..=s);
            }
        };
        let h = d.config.hidden;
        for l in d.layers.iter_mut() {
            fill(&mut l.edge_w, EDGE_FEATURES);
            fill(&mut l.edge_b, EDGE_FEATURES);
            fill(&mut l.w, l.d_in);
            fill(&mut l.b, l.d_in);
        }
        fill(&mut d.head_w1, h);
        fill(&mut d.head_b1, h);
        fill(&mut d.head_w2, h);
        let mut b2 = [0.0];
        fill(&mut b2, h);
        d.head_b2 = b2[0];
        Ok(d)
    }

    pub fn n_params(&self) -> usize {
        self.flat_params().len()
    }

    /// Parameters in a fixed order: per layer ε, edge weights, edge bias,
    /// node weights, node bias; then the head.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.push(l.eps);
            out.extend_from_slice(&l.edge_w);
            out.extend_from_slice(&l.edge_b);
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out.extend_from_slice(&self.head_w1);
        out.extend_from_slice(&self.head_b1);
        out.extend_from_slice(&self.head_w2);
        out.push(self.head_b2);
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<(), NetError> {
        let n = self.n_params();
        if flat.len() != n {
            return Err(NetError::ShapeMismatch {
                what: "flat discriminator parameters",
                expected: n,
                found: flat.len(),
            });
        }
        let mut at = 0;
        let mut take = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[at..at + dst.len()]);
            at += dst.len();
        };
        for l in self.layers.iter_mut() {
            let mut e = [0.0];
            take(&mut e);
            l.eps = e[0];
            take(&mut l.edge_w);
            take(&mut l.edge_b);
            take(&mut l.w);
            take(&mut l.b);
        }
        take(&mut self.head_w1);
        take(&mut self.head_b1);
        take(&mut self.head_w2);
        let mut b2 = [0.0];
        take(&mut b2);
        self.head_b2 = b2[0];
        Ok(())
    }

    pub fn with_params(&self, flat: &[f64]) -> Result<Self, NetError> {
        let mut d = self.clone();
        d.set_flat_params(flat)?;
        Ok(d)
    }

    fn check(&self, f: &GraphFeatures) -> Result<(), NetError> {
        if f.nodes.is_empty() {
            return Err(NetError::EmptyGraph);
        }
        let n = f.nodes.len();
        for &(a, b, _) in &f.edges {
            if a >= n || b >= n {
                return Err(NetError::ShapeMismatch {
                    what: "edge endpoint",
                    expected: n,
                    found: a.max(b),
                });
            }
        }
        Ok(())
    }

    fn trace(&self, f: &GraphFeatures) -> Result<Trace, NetError> {
        self.check(f)?;
        let h = self.config.hidden;
        let dir = directed(f);
        let mut x: Vec<Vec<f64>> = f.nodes.iter().map(|r| r.to_vec()).collect();
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let mut agg: Vec<Vec<f64>> = x
                .iter()
                .map(|xu| xu.iter().map(|v| (1.0 + l.eps) * v).collect())
                .collect();
            let mut msg_pre = Vec::with_capacity(dir.len());
            for &(u, v, k) in &dir {
                let e = &f.edges[k].2;
                let proj = matvec(&l.edge_w, e, l.d_in);
                let pre: Vec<f64> = (0..l.d_in)
                    .map(|j| x[v][j] + proj[j] + l.edge_b[j])
                    .collect();
                for j in 0..l.d_in {
                    agg[u][j] += pre[j].max(0.0);
                }
                msg_pre.push(pre);
            }
            let pre: Vec<Vec<f64>> = agg
                .iter()
                .map(|a| {
                    matvec(&l.w, a, h)
                        .into_iter()
                        .zip(&l.b)
                        .map(|(p, b)| p + b)
                        .collect()
                })
                .collect();
            let mut normed = Vec::with_capacity(pre.len());
            let mut inv_sigma = Vec::with_capacity(pre.len());
            for p in &pre {
                let r: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
                let mu = r.iter().sum::<f64>() / h as f64;
                let var = r.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / h as f64;
                let is = 1.0 / (var + self.config.norm_eps).sqrt();
                normed.push(r.iter().map(|v| (v - mu) * is).collect::<Vec<f64>>());
                inv_sigma.push(is);
            }
            let next = normed.clone();
            layers.push(LayerTrace {
                input: std::mem::replace(&mut x, next),
                msg_pre,
                agg,
                pre,
                normed,
                inv_sigma,
            });
        }
        let n = x.len() as f64;
        let pooled: Vec<f64> = (0..h)
            .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let head_pre: Vec<f64> = matvec(&self.head_w1, &pooled, h)
            .into_iter()
            .zip(&self.head_b1)
            .map(|(p, b)| p + b)
            .collect();
        let logit = head_pre
            .iter()
            .zip(&self.head_w2)
            .map(|(p, w)| p.max(0.0) * w)
            .sum::<f64>()
            + self.head_b2;
        Ok(Trace {
            layers,
            pooled,
            head_pre,
            logit,
        })
    }

    pub fn forward(&self, f: &GraphFeatures) -> Result<f64, NetError> {
        Ok(self.trace(f)?.logit)
    }

    pub fn forward_mol(&self, g: &MolGraph) -> Result<f64, NetError> {
        self.forward(&graph_features(g)?)
    }

    pub fn forward_batch(&self, batch: &[GraphFeatures]) -> Result<Vec<f64>, NetError> {
        batch.par_iter().map(|f| self.forward(f)).collect()
    }

    /// `∂logit/∂θ` in [`GraphDiscriminator::flat_params`] order.
    pub fn logit_gradient(&self, f: &GraphFeatures) -> Result<Vec<f64>, NetError> {
        let t = self.trace(f)?;
        let mut g = Self::zeros(self.config.clone());
        self.backward(f, &t, 1.0, &mut g);
        Ok(g.flat_params())
    }

    /// Accumulates `upstream · ∂logit/∂θ` into `grad`.
    fn backward(&self, f: &GraphFeatures, t: &Trace, upstream: f64, grad: &mut GraphDiscriminator) {
        let h = self.config.hidden;
        grad.head_b2 += upstream;
        let mut d_pooled = vec![0.0; h];
        for r in 0..h {
            let act = t.head_pre[r].max(0.0);
            grad.head_w2[r] += upstream * act;
            if t.head_pre[r] > 0.0 {
                let d = upstream * self.head_w2[r];
                grad.head_b1[r] += d;
                for c in 0..h {
                    grad.head_w1[r * h + c] += d * t.pooled[c];
                    d_pooled[c] += d * self.head_w1[r * h + c];
                }
            }
        }
        let n = f.nodes.len();
        let mut dx: Vec<Vec<f64>> = vec![d_pooled.iter().map(|v| v / n as f64).collect(); n];
        let dir = directed(f);
        for (li, l) in self.layers.iter().enumerate().rev() {
            let lt = &t.layers[li];
            let gl = &mut grad.layers[li];
            let mut d_in: Vec<Vec<f64>> = vec![vec![0.0; l.d_in]; n];
            let mut d_agg: Vec<Vec<f64>> = vec![vec![0.0; l.d_in]; n];
            for u in 0..n {
                // Layer norm without affine terms.
                let y = &lt.normed[u];
                let dy = &dx[u];
                let mean_dy = dy.iter().sum::<f64>() / h as f64;
                let mean_dyy = dy.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / h as f64;
                for r in 0..h {
                    let dr = lt.inv_sigma[u] * (dy[r] - mean_dy - y[r] * mean_dyy);
                    if lt.pre[u][r] <= 0.0 {
                        continue;
                    }
                    gl.b[r] += dr;
                    for c in 0..l.d_in {
                        gl.w[r * l.d_in + c] += dr * lt.agg[u][c];
                        d_agg[u][c] += dr * l.w[r * l.d_in + c];
                    }
                }
                for c in 0..l.d_in {
                    gl.eps += d_agg[u][c] * lt.input[u][c];
                    d_in[u][c] += (1.0 + l.eps) * d_agg[u][c];
                }
            }
            for (m, &(u, v, k)) in dir.iter().enumerate() {
                let e = &f.edges[k].2;
                for j in 0..l.d_in {
                    if lt.msg_pre[m][j] <= 0.0 {
                        continue;
                    }
                    let d = d_agg[u][j];
                    d_in[v][j] += d;
                    gl.edge_b[j] += d;
                    for (q, ev) in e.iter().enumerate() {
                        gl.edge_w[j * EDGE_FEATURES + q] += d * ev;
                    }
                }
            }
            dx = d_in;
        }
    }

    /// Mean smoothed BCE over the batch and its gradient.
    pub fn loss_and_gradient(
        &self,
        real: &[GraphFeatures],
        fake: &[GraphFeatures],
    ) -> Result<(f64, Vec<f64>), NetError> {
        if real.is_empty() || fake.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let s = self.config.label_smoothing;
        let items: Vec<(&GraphFeatures, f64)> = real
            .iter()
            .map(|f| (f, 1.0 - s))
            .chain(fake.iter().map(|f| (f, s)))
            .collect();
        let traces = items
            .par_iter()
            .map(|(f, _)| self.trace(f))
            .collect::<Result<Vec<_>, _>>()?;
        let n = items.len() as f64;
        let mut grad = Self::zeros(self.config.clone());
        let mut loss = 0.0;
        for ((f, target), t) in items.iter().zip(&traces) {
            let (l, dl) = bce_with_logits(t.logit, *target, self.config.logit_clip);
            loss += l / n;
            if dl != 0.0 {
                self.backward(f, t, dl / n, &mut grad);
            }
        }
        Ok((loss, grad.flat_params()))
    }

    pub fn to_blob(&self, ema: Option<&EmaState>, seed: Option<u64>) -> Blob {
        let mut b = Blob::new(json!({
            "kind": "discriminator",
            "config": self.config,
            "seed": seed,
            "ema_decay": ema.map(|e| e.decay),
        }));
        b.push("params", vec![self.n_params()], self.flat_params());
        if let Some(e) = ema {
            b.push("ema_shadow", vec![e.shadow.len()], e.shadow.clone());
        }
        b
    }

    pub fn from_blob(b: &Blob) -> Result<(Self, Option<EmaState>), NetError> {
        if b.header.get("kind").and_then(|k| k.as_str()) != Some("discriminator") {
            return Err(NetError::Config(
                "blob is not a discriminator checkpoint".into(),
            ));
        }
        let config: DiscriminatorConfig = serde_json::from_value(b.header["config"].clone())
            .map_err(|e| NetError::Config(format!("discriminator config: {e}")))?;
        config.validate()?;
        let mut d = Self::zeros(config);
        let n = d.n_params();
        d.set_flat_params(&b.take("params", &[n])?)?;
        let ema = match b.header.get("ema_decay").and_then(|v| v.as_f64()) {
            Some(decay) => Some(EmaState {
                shadow: b.take("ema_shadow", &[n])?,
                decay,
            }),
            None => None,
        };
        Ok((d, ema))
    }

    pub fn save(
        &self,
        path: &Path,
        ema: Option<&EmaState>,
        seed: Option<u64>,
    ) -> Result<(), NetError> {
        Ok(self.to_blob(ema, seed).write_file(path)?)
    }

    pub fn load(path: &Path) -> Result<(Self, Option<EmaState>), NetError> {
        Self::from_blob(&Blob::read_file(path)?)
    }
}

/// Binary cross-entropy of `target` against `σ(clip(logit))` and its
/// derivative in the unclipped logit (zero where the clip is active).
pub fn bce_with_logits(logit: f64, target: f64, clip: f64) -> (f64, f64) {
    let z = logit.clamp(-clip, clip);
    // −[t·ln σ(z) + (1−t)·ln(1−σ(z))] = softplus(z) − t·z
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    let loss = softplus - target * z;
    let d = if logit.abs() <= clip {
        crate::qpatch::sigmoid(z) - target
    } else {
        0.0
    };
    (loss, d)
}

/// Slow-moving copy of the discriminator parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct EmaState {
    pub shadow: Vec<f64>,
    pub decay: f64,
}

impl EmaState {
    pub fn new(live: &[f64], decay: f64) -> Self {
        EmaState {
            shadow: live.to_vec(),
            decay,
        }
    }
}

/// `shadow ← decay·shadow + (1−decay)·live`.
pub fn ema_update(state: &mut EmaState, live: &[f64]) -> Result<(), NetError> {
    if live.len() != state.shadow.len() {
        return Err(NetError::ShapeMismatch {
            what: "EMA parameters",
            expected: state.shadow.len(),
            found: live.len(),
        });
    }
    let d = state.decay;
    for (s, l) in state.shadow.iter_mut().zip(live) {
        *s = d * *s + (1.0 - d) * l;
    }
    Ok(())
}

/// One SGD step on the smoothed, clipped BCE of real versus generated
/// graphs, followed by the EMA update. Returns the pre-step loss.
pub fn discriminator_train_step(
    disc: &mut GraphDiscriminator,
    ema: &mut EmaState,
    real: &[GraphFeatures],
    fake: &[GraphFeatures],
    lr: f64,
) -> Result<f64, NetError> {
    let (loss, grad) = disc.loss_and_gradient(real, fake)?;
    let mut p = disc.flat_params();
    for (x, g) in p.iter_mut().zip(&grad) {
        *x -= lr * g;
    }
    disc.set_flat_params(&p)?;
    ema_update(ema, &p)?;
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::mol_from_smiles;

    #[test]
    fn zero_weights_give_head_bias() {
        let mut d = GraphDiscriminator::zeros(DiscriminatorConfig::default());
        d.head_b2 = 0.37;
        let f = graph_features(&mol_from_smiles("CCO").unwrap()).unwrap();
        assert_eq!(d.forward(&f).unwrap(), 0.37);
    }

    #[test]
    fn bce_examples() {
        let (l, _) = bce_with_logits(0.0, 0.9, 10.0);
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        let (l_real, d) = bce_with_logits(50.0, 0.9, 10.0);
        assert_eq!(d, 0.0);
        let sig = 1.0 / (1.0 + (-10.0f64).exp());
        let floor = -(0.9 * sig.ln() + 0.1 * (1.0 - sig).ln());
        assert!((l_real - floor).abs() < 1e-12);
    }

    #[test]
    fn ema_examples() {
        let mut s = EmaState::new(&[0.0], 0.9);
        ema_update(&mut s, &[1.0]).unwrap();
        ema_update(&mut s, &[1.0]).unwrap();
        assert!((s.shadow[0] - 0.19).abs() < 1e-15);
        let mut s = EmaState::new(&[0.3, 0.4], 1.0);
        ema_update(&mut s, &[1.0, 2.0]).unwrap();
        assert_eq!(s.shadow, vec![0.3, 0.4]);
        let mut s = EmaState::new(&[0.3, 0.4], 0.0);
        ema_update(&mut s, &[1.0, 2.0]).unwrap();
        assert_eq!(s.shadow, vec![1.0, 2.0]);
        assert!(ema_update(&mut s, &[1.0]).is_err());
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let d = GraphDiscriminator::zeros(DiscriminatorConfig::default());
        assert!(matches!(
            graph_features(&MolGraph::new()),
            Err(NetError::EmptyGraph)
        ));
        let f = graph_features(&mol_from_smiles("C").unwrap()).unwrap();
        assert!(matches!(
            d.loss_and_gradient(&[f], &[]),
            Err(NetError::EmptyBatch)
        ));
    }

    #[test]
    fn features_follow_the_atom_and_bond_set() {
        let f = graph_features(&mol_from_smiles("c1ccccc1O").unwrap()).unwrap();
        assert_eq!(f.nodes[0], [6.0, 4.0, 2.0, 1.0, 0.0, 1.0]);
        assert_eq!(f.nodes[6], [8.0, 2.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.edges[0].2, [1.5, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let d = GraphDiscriminator::init(DiscriminatorConfig::default(), 3).unwrap();
        let ema = EmaState::new(&d.flat_params(), 0.999);
        let (back, e) = GraphDiscriminator::from_blob(
            &Blob::from_bytes(&d.to_blob(Some(&ema), Some(3)).to_bytes()).unwrap(),
        )
        .unwrap();
        assert_eq!(back, d);
        assert_eq!(e, Some(ema));
    }
}
