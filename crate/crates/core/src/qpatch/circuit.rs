use std::f64::consts::FRAC_PI_2;

use super::statevector::{rx, ry, rz, Statevector};
use super::{check_len, patch_sigmoid, PatchTensor, QError, QuantumParams};

/// θ_in = W_inᵀ z + b_in, one encoding angle per qubit.
pub fn encode_angles(z: &[f64], params: &QuantumParams) -> Result<Vec<f64>, QError> {
    let c = &params.config;
    check_len("latent vector", z, c.latent_dim)?;
    let q = c.n_qubits;
    let mut theta = params.b_in.clone();
    for (i, &zi) in z.iter().enumerate() {
        let row = &params.w_in[i * q..(i + 1) * q];
        for (t, &w) in theta.iter_mut().zip(row) {
            *t += zi * w;
        }
    }
    Ok(theta)
}

/// Runs the circuit, calling `after_layer` once after the encoding layer
/// and once after each entangling layer.
fn run(
    theta_in: &[f64],
    alpha: &[f64],
    n_layers: usize,
    mut after_layer: impl FnMut(&Statevector),
) -> Statevector {
    let n = theta_in.len();
    let mut psi = Statevector::zero(n);
    for (q, &t) in theta_in.iter().enumerate() {
        psi.apply_1q(q, &ry(t));
    }
    after_layer(&psi);
    for l in 0..n_layers {
        for q in 0..n {
            let a = &alpha[(l * n + q) * 3..(l * n + q) * 3 + 3];
            psi.apply_1q(q, &rx(a[0]));
            psi.apply_1q(q, &ry(a[1]));
            psi.apply_1q(q, &rz(a[2]));
        }
        if n > 1 {
            for q in 0..n {
                psi.apply_cnot(q, (q + 1) % n);
            }
        }
        after_layer(&psi);
    }
    psi
}

fn readout(psi: &Statevector) -> Vec<f64> {
    (0..psi.n_qubits()).map(|q| psi.expect_z(q)).collect()
}

fn check_angles(angles_in: &[f64], params: &QuantumParams) -> Result<(), QError> {
    params.validate()?;
    check_len("input angles", angles_in, params.config.n_qubits)
}

/// Pauli-Z expectation per qubit after encoding `angles_in` and applying the
/// entangling layers in `params`.
pub fn simulate_expectations(
    angles_in: &[f64],
    params: &QuantumParams,
) -> Result<Vec<f64>, QError> {
    check_angles(angles_in, params)?;
    Ok(readout(&run(
        angles_in,
        &params.alpha,
        params.config.n_layers,
        |_| {},
    )))
}

/// Like [`simulate_expectations`], also returning the statevector norm after
/// each layer (encoding first).
pub fn simulate_traced(
    angles_in: &[f64],
    params: &QuantumParams,
) -> Result<(Vec<f64>, Vec<f64>), QError> {
    check_angles(angles_in, params)?;
    let mut norms = Vec::with_capacity(params.config.n_layers + 1);
    let psi = run(angles_in, &params.alpha, params.config.n_layers, |s| {
        norms.push(s.norm())
    });
    Ok((readout(&psi), norms))
}

/// Encode, simulate, then `sigmoid(W_postᵀ g + b_post)` reshaped to a patch.
pub fn generate_patch(z: &[f64], params: &QuantumParams) -> Result<PatchTensor, QError> {
    params.validate()?;
    let theta = encode_angles(z, params)?;
    let c = &params.config;
    let g = readout(&run(&theta, &params.alpha, c.n_layers, |_| {}));
    let w = c.patch_width();
    let mut out = params.b_post.clone();
    for (j, &gj) in g.iter().enumerate() {
        let row = &params.w_post[j * w..(j + 1) * w];
        for (o, &wjk) in out.iter_mut().zip(row) {
            *o += gj * wjk;
        }
    }
    for o in out.iter_mut() {
        *o = patch_sigmoid(*o);
    }
    PatchTensor::new(c.n_nodes, c.f_node, out)
}

/// Gradients with respect to the encoding angles and the layer angles
/// (same layout as `alpha`).
#[derive(Clone, Debug, PartialEq)]
pub struct AngleGrad {
    pub theta_in: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Row `k` holds d⟨Z_i⟩/dφ_k for every qubit `i`; angles are ordered as the
/// encoding angles followed by `alpha`. Every derivative uses the
/// two-term shift rule at ±π/2.
pub fn expectation_jacobian(
    angles_in: &[f64],
    params: &QuantumParams,
) -> Result<Vec<Vec<f64>>, QError> {
    check_angles(angles_in, params)?;
    let layers = params.config.n_layers;
    let eval = |theta: &[f64], alpha: &[f64]| readout(&run(theta, alpha, layers, |_| {}));
    let shifted = |k: usize, theta: &[f64], alpha: &[f64], into_theta: bool| {
        let mut t = theta.to_vec();
        let mut a = alpha.to_vec();
        let slot = if into_theta { &mut t[k] } else { &mut a[k] };
        let base = *slot;
        *slot = base + FRAC_PI_2;
        let plus = eval(&t, &a);
        let slot = if into_theta { &mut t[k] } else { &mut a[k] };
        *slot = base - FRAC_PI_2;
        let minus = eval(&t, &a);
        plus.iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / 2.0)
            .collect::<Vec<f64>>()
    };
    let mut rows = Vec::with_capacity(angles_in.len() + params.alpha.len());
    for k in 0..angles_in.len() {
        rows.push(shifted(k, angles_in, &params.alpha, true));
    }
    for k in 0..params.alpha.len() {
        rows.push(shifted(k, angles_in, &params.alpha, false));
    }
    Ok(rows)
}

/// Chains the shift-rule Jacobian of the encoding `z ↦ θ_in ↦ g` with an
/// upstream gradient `∂L/∂g`.
pub fn parameter_shift_grad(
    z: &[f64],
    params: &QuantumParams,
    upstream: &[f64],
) -> Result<AngleGrad, QError> {
    let theta = encode_angles(z, params)?;
    check_len("upstream gradient", upstream, params.config.n_qubits)?;
    let jac = expectation_jacobian(&theta, params)?;
    let dot = |row: &Vec<f64>| row.iter().zip(upstream).map(|(a, b)| a * b).sum::<f64>();
    let q = params.config.n_qubits;
    Ok(AngleGrad {
        theta_in: jac[..q].iter().map(dot).collect(),
        alpha: jac[q..].iter().map(dot).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::QuantumConfig;
    use super::*;
    use std::f64::consts::PI;

    fn cfg(n_qubits: usize, n_layers: usize) -> QuantumConfig {
        QuantumConfig {
            n_qubits,
            n_layers,
            n_nodes: 2,
            f_node: 2,
            latent_dim: n_qubits,
        }
    }

    #[test]
    fn zero_angles_measure_plus_one() {
        let p = QuantumParams::zeros(cfg(3, 0));
        assert_eq!(simulate_expectations(&[0.0; 3], &p).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn single_qubit_pi_measures_minus_one() {
        let p = QuantumParams::zeros(cfg(1, 0));
        let g = simulate_expectations(&[PI], &p).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_qubit_gradient_is_minus_sine() {
        let p = QuantumParams::zeros(cfg(1, 0));
        for theta in [0.0, PI / 3.0, 1.234] {
            let j = expectation_jacobian(&[theta], &p).unwrap();
            assert!((j[0][0] + theta.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_head_gives_half() {
        let mut p = QuantumParams::init(QuantumConfig::default(), 3);
        p.w_post.iter_mut().for_each(|x| *x = 0.0);
        p.b_post.iter_mut().for_each(|x| *x = 0.0);
        let h = generate_patch(&[0.3; 9], &p).unwrap();
        assert_eq!((h.n_nodes, h.f_node), (48, 16));
        assert!(h.data.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn shape_errors() {
        let p = QuantumParams::zeros(cfg(2, 1));
        assert!(matches!(
            simulate_expectations(&[0.0], &p),
            Err(QError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            generate_patch(&[0.0; 3], &p),
            Err(QError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            simulate_expectations(&[f64::NAN, 0.0], &p),
            Err(QError::NonFinite(_))
        ));
    }
}
