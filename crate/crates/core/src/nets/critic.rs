//! Surrogate critic regressing the teacher's score of a decoded latent code
//! directly from the code.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::dense::{mse_train_step, Activation, DenseGrad, DenseNet};
use super::NetError;
use crate::blob::Blob;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticConfig {
    pub hidden: Vec<usize>,
}

impl Default for CriticConfig {
    fn default() -> Self {
        CriticConfig {
            hidden: vec![64, 64],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticNet {
    pub net: DenseNet,
}

impl CriticNet {
    pub fn init(latent_dim: usize, cfg: &CriticConfig, seed: u64) -> Self {
        let mut dims = vec![latent_dim];
        dims.extend(&cfg.hidden);
        dims.push(1);
        CriticNet {
            net: DenseNet::init(&dims, Activation::Relu, Activation::Identity, 0.0, seed),
        }
    }

    pub fn from_net(net: DenseNet) -> Result<Self, NetError> {
        net.validate()?;
        if net.n_out() != 1 {
            return Err(NetError::ShapeMismatch {
                what: "critic output",
                expected: 1,
                found: net.n_out(),
            });
        }
        Ok(CriticNet { net })
    }

    pub fn value(&self, z: &[f64]) -> Result<f64, NetError> {
        Ok(self.net.forward(z)?[0])
    }

    /// `∂h/∂z` at `z`.
    pub fn input_gradient(&self, z: &[f64]) -> Result<Vec<f64>, NetError> {
        let trace = self.net.forward_trace(z, None)?;
        let mut scratch = DenseGrad::zeros_like(&self.net);
        Ok(self.net.backward(&trace, &[1.0], &mut scratch))
    }

    /// Mean squared error against fixed targets.
    pub fn mse(&self, zs: &[Vec<f64>], targets: &[f64]) -> Result<f64, NetError> {
        if zs.len() != targets.len() {
            return Err(NetError::ShapeMismatch {
                what: "critic targets",
                expected: zs.len(),
                found: targets.len(),
            });
        }
        if zs.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        let mut s = 0.0;
        for (z, t) in zs.iter().zip(targets) {
            let d = self.value(z)? - t;
            s += d * d;
        }
        Ok(s / zs.len() as f64)
    }

    /// One gradient step on `(1/K)·Σ(h(z_i) − t_i)²`; returns the pre-step
    /// loss.
    pub fn fit_batch(
        &mut self,
        zs: &[Vec<f64>],
        targets: &[f64],
        lr: f64,
    ) -> Result<f64, NetError> {
        if zs.len() != targets.len() {
            return Err(NetError::ShapeMismatch {
                what: "critic targets",
                expected: zs.len(),
                found: targets.len(),
            });
        }
        let ys: Vec<Vec<f64>> = targets.iter().map(|&t| vec![t]).collect();
        mse_train_step(&mut self.net, zs, &ys, lr, None)
    }

    pub fn to_blob(&self, seed: Option<u64>) -> Blob {
        let mut b = Blob::new(json!({}));
        let arch = self.net.push_to_blob(&mut b, "net");
        b.header = json!({"kind": "critic", "arch": arch, "seed": seed});
        b
    }

    pub fn from_blob(b: &Blob) -> Result<Self, NetError> {
        if b.header.get("kind").and_then(|k| k.as_str()) != Some("critic") {
            return Err(NetError::Config("blob is not a critic checkpoint".into()));
        }
        Self::from_net(DenseNet::from_blob(b, "net", &b.header["arch"])?)
    }

    pub fn save(&self, path: &Path, seed: Option<u64>) -> Result<(), NetError> {
        Ok(self.to_blob(seed).write_file(path)?)
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        Self::from_blob(&Blob::read_file(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::DenseLayer;

    fn constant_critic(outputs: f64) -> CriticNet {
        let mut l = DenseLayer::zeros(2, 1, Activation::Identity);
        l.b = vec![outputs];
        CriticNet::from_net(DenseNet::from_layers(vec![l], 0.0).unwrap()).unwrap()
    }

    #[test]
    fn loss_examples() {
        let zs = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let mut c = constant_critic(0.3);
        assert_eq!(c.fit_batch(&zs, &[0.3, 0.3], 0.1).unwrap(), 0.0);
        assert_eq!(c.value(&[0.0, 0.0]).unwrap(), 0.3);

        let mut l = DenseLayer::zeros(2, 1, Activation::Identity);
        l.w = vec![1.0, 0.0];
        let c = CriticNet::from_net(DenseNet::from_layers(vec![l], 0.0).unwrap()).unwrap();
        assert_eq!(c.mse(&zs, &[1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn input_gradient_matches_central_differences() {
        let c = CriticNet::init(5, &CriticConfig::default(), 8);
        let z = vec![0.3, -0.2, 0.9, -1.1, 0.05];
        let g = c.input_gradient(&z).unwrap();
        let h = 1e-5;
        for i in 0..z.len() {
            let mut up = z.clone();
            up[i] += h;
            let mut down = z.clone();
            down[i] -= h;
            let fd = (c.value(&up).unwrap() - c.value(&down).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn repeated_fitting_reduces_loss() {
        let mut c = CriticNet::init(3, &CriticConfig::default(), 1);
        let zs: Vec<Vec<f64>> = (0..16)
            .map(|i| vec![i as f64 / 16.0, 0.5, -(i as f64) / 32.0])
            .collect();
        let t: Vec<f64> = (0..16).map(|i| 0.2 + 0.03 * i as f64).collect();
        let before = c.mse(&zs, &t).unwrap();
        for _ in 0..200 {
            c.fit_batch(&zs, &t, 0.05).unwrap();
        }
        assert!(c.mse(&zs, &t).unwrap() < 0.5 * before);
    }
}
