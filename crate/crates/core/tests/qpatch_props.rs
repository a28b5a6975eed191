//! Circuit simulator checks against the dense-matrix oracle and finite
//! differences.

mod oracles;

use std::f64::consts::PI;

use patchmol::qpatch::*;
use proptest::prelude::*;

fn small_config() -> impl Strategy<Value = QuantumConfig> {
    (1usize..=4, 0usize..=2, 1usize..=3).prop_map(|(q, l, d)| QuantumConfig {
        n_qubits: q,
        n_layers: l,
        n_nodes: 3,
        f_node: 2,
        latent_dim: d,
    })
}

fn params_for(cfg: QuantumConfig, seed: u64) -> QuantumParams {
    QuantumParams::init(cfg, seed)
}

fn angles(n: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_dense_oracle(cfg in small_config(), seed in any::<u64>()) {
        let p = params_for(cfg.clone(), seed);
        let theta = angles(cfg.n_qubits, seed ^ 0x5a5a);
        let (g, norms) = simulate_traced(&theta, &p).unwrap();
        let oracle = oracles::dense_expectations(&theta, &p.alpha, cfg.n_layers);
        for (a, b) in g.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            prop_assert!(a.abs() <= 1.0 + 1e-9);
        }
        prop_assert_eq!(norms.len(), cfg.n_layers + 1);
        for n in norms {
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn patch_matches_scalar_oracle(cfg in small_config(), seed in any::<u64>()) {
        let p = params_for(cfg.clone(), seed);
        let z = angles(cfg.latent_dim, seed.wrapping_add(1));
        let h = generate_patch(&z, &p).unwrap();
        let oracle = oracles::scalar_patch(&z, &p.w_in, &p.b_in, &p.alpha, cfg.n_layers, &p.w_post, &p.b_post);
        for (a, b) in h.data.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(*a > 0.0 && *a < 1.0);
        }
        prop_assert_eq!(generate_patch(&z, &p).unwrap(), h);
    }

    #[test]
    fn shift_rule_matches_finite_differences(cfg in small_config(), seed in any::<u64>()) {
        let p = params_for(cfg.clone(), seed);
        let z = angles(cfg.latent_dim, seed.wrapping_mul(3));
        let upstream = angles(cfg.n_qubits, seed.wrapping_add(7));
        let grad = parameter_shift_grad(&z, &p, &upstream).unwrap();
        let theta = encode_angles(&z, &p).unwrap();
        let loss_theta = |t: &[f64]| {
            let g = simulate_expectations(t, &p).unwrap();
            g.iter().zip(&upstream).map(|(a, b)| a * b).sum::<f64>()
        };
        let check = |analytic: f64, fd: f64| (analytic - fd).abs() <= 1e-6 * fd.abs().max(1.0);
        for k in 0..theta.len() {
            let fd = oracles::central_diff(&loss_theta, &theta, k, 1e-4);
            prop_assert!(check(grad.theta_in[k], fd), "theta {k}: {} vs {fd}", grad.theta_in[k]);
        }
        let loss_alpha = |a: &[f64]| {
            let mut q = p.clone();
            q.alpha = a.to_vec();
            let g = simulate_expectations(&theta, &q).unwrap();
            g.iter().zip(&upstream).map(|(x, y)| x * y).sum::<f64>()
        };
        for k in 0..p.alpha.len() {
            let fd = oracles::central_diff(&loss_alpha, &p.alpha, k, 1e-4);
            prop_assert!(check(grad.alpha[k], fd), "alpha {k}: {} vs {fd}", grad.alpha[k]);
        }
    }
}

#[test]
fn norm_preserved_over_many_configs() {
    for seed in 0..1000u64 {
        let q = 1 + (seed % 9) as usize;
        let cfg = QuantumConfig {
            n_qubits: q,
            n_layers: (seed % 3) as usize,
            n_nodes: 1,
            f_node: 1,
            latent_dim: 1,
        };
        let p = QuantumParams::init(cfg, seed);
        let (g, norms) = simulate_traced(&angles(q, seed), &p).unwrap();
        assert!(norms.iter().all(|n| (n - 1.0).abs() < 1e-12));
        assert!(g.iter().all(|x| x.abs() <= 1.0 + 1e-9));
    }
}

#[test]
fn single_qubit_analytic_gradient() {
    let cfg = QuantumConfig {
        n_qubits: 1,
        n_layers: 0,
        n_nodes: 1,
        f_node: 1,
        latent_dim: 1,
    };
    let p = QuantumParams::zeros(cfg);
    let j0 = expectation_jacobian(&[0.0], &p).unwrap();
    assert!(j0[0][0].abs() < 1e-15);
    let j = expectation_jacobian(&[PI / 3.0], &p).unwrap();
    assert!((j[0][0] + 3f64.sqrt() / 2.0).abs() < 1e-10);
}

#[test]
fn default_patch_shape() {
    let p = QuantumParams::init(QuantumConfig::default(), 11);
    let h = generate_patch(&[0.2; 9], &p).unwrap();
    assert_eq!((h.n_nodes, h.f_node), (48, 16));
}
