//! Fully connected networks with hand-written backpropagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NetError;
use crate::blob::Blob;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
            Activation::Sigmoid => crate::qpatch::sigmoid(x),
        }
    }

    /// Derivative expressed through the pre-activation `x` and output `y`.
    fn derivative(self, x: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

/// `y = act(W x + b)` with `W` stored row-major as `n_out × n_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(n_in: usize, n_out: usize, activation: Activation) -> Self {
        DenseLayer {
            n_in,
            n_out,
            w: vec![0.0; n_in * n_out],
            b: vec![0.0; n_out],
            activation,
        }
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_out)
            .map(|o| {
                let row = &self.w[o * self.n_in..(o + 1) * self.n_in];
                row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b[o]
            })
            .collect()
    }
}

/// Per-sample intermediate values kept for the backward pass.
#[derive(Clone, Debug)]
pub struct DenseTrace {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    /// Inverted-dropout multipliers applied to hidden outputs.
    masks: Vec<Option<Vec<f64>>>,
    pub output: Vec<f64>,
}

/// Gradient with the same layout as the network's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseGrad {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl DenseGrad {
    pub fn zeros_like(net: &DenseNet) -> Self {
        DenseGrad {
            w: net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: net.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.w.iter_mut().chain(self.b.iter_mut()) {
            for x in v.iter_mut() {
                *x *= s;
            }
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.w.iter().zip(&self.b) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

/// Stack of dense layers. Dropout acts on hidden outputs during training
/// only; [`DenseNet::forward`] never drops.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNet {
    pub layers: Vec<DenseLayer>,
    pub dropout_rate: f64,
}

impl DenseNet {
    /// Layers of widths `dims[0] → dims[1] → …`, hidden layers using
    /// `hidden` and the last one `output`, weights and biases uniform in
    /// ±1/√fan_in.
    pub fn init(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        dropout_rate: f64,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = dims.len().saturating_sub(1);
        let layers = (0..n)
            .map(|k| {
                let act = if k + 1 == n { output } else { hidden };
                let mut l = DenseLayer::zeros(dims[k], dims[k + 1], act);
                let s = 1.0 / (dims[k] as f64).sqrt();
                for x in l.w.iter_mut().chain(l.b.iter_mut()) {
                    *x = rng.random_range(-s..=s);
                }
                l
            })
            .collect();
        DenseNet {
            layers,
            dropout_rate,
        }
    }

    pub fn from_layers(layers: Vec<DenseLayer>, dropout_rate: f64) -> Result<Self, NetError> {
        let net = DenseNet {
            layers,
            dropout_rate,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.layers.is_empty() {
            return Err(NetError::Config(
                "a dense net needs at least one layer".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(NetError::Config(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        for (k, l) in self.layers.iter().enumerate() {
            if l.w.len() != l.n_in * l.n_out || l.b.len() != l.n_out {
                return Err(NetError::ShapeMismatch {
                    what: "dense layer",
                    expected: l.n_in * l.n_out,
                    found: l.w.len(),
                });
            }
            if k > 0 && self.layers[k - 1].n_out != l.n_in {
                return Err(NetError::ShapeMismatch {
                    what: "layer chain",
                    expected: self.layers[k - 1].n_out,
                    found: l.n_in,
                });
            }
        }
        Ok(())
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_out(&self) -> usize {
        self.layers[self.layers.len() - 1].n_out
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NetError> {
        if x.len() != self.n_in() {
            return Err(NetError::ShapeMismatch {
                what: "dense input",
                expected: self.n_in(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Inference pass, dropout disabled.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(x)?;
        let mut h = x.to_vec();
        for l in &self.layers {
            h = l
                .pre_activation(&h)
                .into_iter()
                .map(|v| l.activation.apply(v))
                .collect();
        }
        Ok(h)
    }

    /// Forward pass that records what backpropagation needs. With `rng`
    /// given and a positive rate, hidden outputs pass through inverted
    /// dropout.
    pub fn forward_trace(
        &self,
        x: &[f64],
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<DenseTrace, NetError> {
        self.check_input(x)?;
        let mut rng = rng;
        let last = self.layers.len() - 1;
        let mut t = DenseTrace {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::with_capacity(self.layers.len()),
            post: Vec::with_capacity(self.layers.len()),
            masks: Vec::with_capacity(self.layers.len()),
            output: Vec::new(),
        };
        let mut h = x.to_vec();
        for (k, l) in self.layers.iter().enumerate() {
            let pre = l.pre_activation(&h);
            let post: Vec<f64> = pre.iter().map(|&v| l.activation.apply(v)).collect();
            let mask = match rng.as_deref_mut() {
                Some(r) if k < last && self.dropout_rate > 0.0 => {
                    let keep = 1.0 - self.dropout_rate;
                    Some(
                        (0..l.n_out)
                            .map(|_| {
                                if r.random::<f64>() < keep {
                                    1.0 / keep
                                } else {
                                    0.0
                                }
                            })
                            .collect::<Vec<f64>>(),
                    )
                }
                _ => None,
            };
            let next = match &mask {
                Some(m) => post.iter().zip(m).map(|(a, b)| a * b).collect(),
                None => post.clone(),
            };
            t.inputs.push(std::mem::replace(&mut h, next));
            t.pre.push(pre);
            t.post.push(post);
            t.masks.push(mask);
        }
        t.output = h;
        Ok(t)
    }

    /// Accumulates `∂L/∂θ` into `grad` given `∂L/∂output`, and returns
    /// `∂L/∂input`.
    pub fn backward(&self, trace: &DenseTrace, grad_out: &[f64], grad: &mut DenseGrad) -> Vec<f64> {
        let mut g = grad_out.to_vec();
        for (k, l) in self.layers.iter().enumerate().rev() {
            if let Some(m) = &trace.masks[k] {
                for (gi, mi) in g.iter_mut().zip(m) {
                    *gi *= mi;
                }
            }
            let delta: Vec<f64> = (0..l.n_out)
                .map(|o| g[o] * l.activation.derivative(trace.pre[k][o], trace.post[k][o]))
                .collect();
            let input = &trace.inputs[k];
            let mut g_in = vec![0.0; l.n_in];
            for o in 0..l.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grad.b[k][o] += d;
                let row = o * l.n_in;
                for i in 0..l.n_in {
                    grad.w[k][row + i] += d * input[i];
                    g_in[i] += d * l.w[row + i];
                }
            }
            g = g_in;
        }
        g
    }

    /// `θ ← θ − lr·grad`.
    pub fn apply_gradient(&mut self, grad: &DenseGrad, lr: f64) {
        for (k, l) in self.layers.iter_mut().enumerate() {
            for (w, g) in l.w.iter_mut().zip(&grad.w[k]) {
                *w -= lr * g;
            }
            for (b, g) in l.b.iter_mut().zip(&grad.b[k]) {
                *b -= lr * g;
            }
        }
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(&l.w);
            out.extend_from_slice(&l.b);
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<(), NetError> {
        if flat.len() != self.n_params() {
            return Err(NetError::ShapeMismatch {
                what: "flat dense parameters",
                expected: self.n_params(),
                found: flat.len(),
            });
        }
        let mut at = 0;
        for l in self.layers.iter_mut() {
            let (nw, nb) = (l.w.len(), l.b.len());
            l.w.copy_from_slice(&flat[at..at + nw]);
            l.b.copy_from_slice(&flat[at + nw..at + nw + nb]);
            at += nw + nb;
        }
        Ok(())
    }

    /// Appends this net's tensors under `prefix` and returns its
    /// architecture for the blob header.
    pub fn push_to_blob(&self, blob: &mut Blob, prefix: &str) -> serde_json::Value {
        for (k, l) in self.layers.iter().enumerate() {
            blob.push(
                format!("{prefix}.{k}.w"),
                vec![l.n_out, l.n_in],
                l.w.clone(),
            );
            blob.push(format!("{prefix}.{k}.b"), vec![l.n_out], l.b.clone());
        }
        serde_json::json!({
            "dims": self.dims(),
            "activations": self.layers.iter().map(|l| l.activation).collect::<Vec<_>>(),
            "dropout_rate": self.dropout_rate,
        })
    }

    pub fn from_blob(
        blob: &Blob,
        prefix: &str,
        arch: &serde_json::Value,
    ) -> Result<Self, NetError> {
        let dims: Vec<usize> = serde_json::from_value(arch["dims"].clone())
            .map_err(|e| NetError::Config(format!("{prefix} dims: {e}")))?;
        let acts: Vec<Activation> = serde_json::from_value(arch["activations"].clone())
            .map_err(|e| NetError::Config(format!("{prefix} activations: {e}")))?;
        let dropout_rate = arch["dropout_rate"]
            .as_f64()
            .ok_or_else(|| NetError::Config(format!("{prefix} dropout rate missing")))?;
        if dims.len() != acts.len() + 1 {
            return Err(NetError::Config(format!(
                "{prefix}: {} dims for {} layers",
                dims.len(),
                acts.len()
            )));
        }
        let mut layers = Vec::with_capacity(acts.len());
        for (k, act) in acts.into_iter().enumerate() {
            let (n_in, n_out) = (dims[k], dims[k + 1]);
            layers.push(DenseLayer {
                n_in,
                n_out,
                w: blob.take(&format!("{prefix}.{k}.w"), &[n_out, n_in])?,
                b: blob.take(&format!("{prefix}.{k}.b"), &[n_out])?,
                activation: act,
            });
        }
        Self::from_layers(layers, dropout_rate)
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.n_in()];
        d.extend(self.layers.iter().map(|l| l.n_out));
        d
    }
}

/// Mean over samples of the summed squared error, and its gradient with
/// respect to each prediction.
pub fn mse_with_grad(pred: &[Vec<f64>], target: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let n = pred.len().max(1) as f64;
    let mut loss = 0.0;
    let grads = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            p.iter()
                .zip(t)
                .map(|(a, b)| {
                    loss += (a - b) * (a - b);
                    2.0 * (a - b) / n
                })
                .collect()
        })
        .collect();
    (loss / n, grads)
}

/// One full-batch MSE step on `(xs, ys)`; returns the loss before the step.
pub fn mse_train_step(
    net: &mut DenseNet,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    lr: f64,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<f64, NetError> {
    if xs.len() != ys.len() {
        return Err(NetError::ShapeMismatch {
            what: "batch rows",
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(NetError::EmptyBatch);
    }
    for y in ys {
        if y.len() != net.n_out() {
            return Err(NetError::ShapeMismatch {
                what: "target width",
                expected: net.n_out(),
                found: y.len(),
            });
        }
    }
    let mut rng = rng;
    let traces = xs
        .iter()
        .map(|x| net.forward_trace(x, rng.as_deref_mut()))
        .collect::<Result<Vec<_>, _>>()?;
    let preds: Vec<Vec<f64>> = traces.iter().map(|t| t.output.clone()).collect();
    let (loss, g_out) = mse_with_grad(&preds, ys);
    let mut grad = DenseGrad::zeros_like(net);
    for (t, g) in traces.iter().zip(&g_out) {
        net.backward(t, g, &mut grad);
    }
    net.apply_gradient(&grad, lr);
    Ok(loss)
}
