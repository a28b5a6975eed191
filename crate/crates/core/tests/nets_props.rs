//! Gradient, invariance and oracle checks for the trainable networks.

mod oracles;

use patchmol::chem::{mol_from_smiles, MolGraph};
use patchmol::nets::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rows(n: usize, w: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..w).map(|_| rng.random_range(-1.5..1.5)).collect())
        .collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-9
}

fn to_oracle_layers(net: &DenseNet) -> Vec<(Vec<Vec<f64>>, Vec<f64>, &'static str)> {
    net.layers
        .iter()
        .map(|l| {
            let w = (0..l.n_out)
                .map(|o| l.w[o * l.n_in..(o + 1) * l.n_in].to_vec())
                .collect();
            let act = match l.activation {
                Activation::Relu => "relu",
                Activation::Sigmoid => "sigmoid",
                Activation::Identity => "identity",
            };
            (w, l.b.clone(), act)
        })
        .collect()
}

#[test]
fn conditioner_forward_matches_straight_line_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..20 {
        let cfg = ConditionerConfig {
            hidden: vec![7, 5],
            ..Default::default()
        };
        let stats = Standardizer {
            mean: (0..6).map(|_| rng.random_range(-1.0..1.0)).collect(),
            std: (0..6).map(|_| rng.random_range(0.5..2.0)).collect(),
        };
        let c = Conditioner::init(&cfg, stats.clone(), vec![0, 2, 4], seed).unwrap();
        let layers = to_oracle_layers(&c.net);
        for x in rows(5, 6, &mut rng) {
            let xs: Vec<f64> = (0..6)
                .map(|j| (x[j] - stats.mean[j]) / stats.std[j])
                .collect();
            let expect = oracles::mlp_forward(&layers, &xs);
            let got = c.forward(&x).unwrap();
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
            }
        }
    }
}

fn conditioner_loss(c: &Conditioner, xs: &[Vec<f64>], zs: &[Vec<f64>]) -> f64 {
    let preds: Vec<Vec<f64>> = xs.iter().map(|x| c.forward(x).unwrap()).collect();
    let n = xs.len() as f64;
    preds
        .iter()
        .zip(zs)
        .map(|(p, z)| p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum::<f64>()
        / n
}

#[test]
fn conditioner_step_follows_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = ConditionerConfig {
        hidden: vec![6, 5],
        dropout: 0.0,
        jitter_sigma: 0.0,
    };
    let c0 = Conditioner::init(&cfg, Standardizer::identity(6), vec![1, 3, 5], 9).unwrap();
    let xs = rows(6, 6, &mut rng);
    let zs = rows(6, 3, &mut rng);
    let mut c1 = c0.clone();
    let loss = c1.train_step(&xs, &zs, 1.0, &mut rng).unwrap();
    assert!((loss - conditioner_loss(&c0, &xs, &zs)).abs() < 1e-12);
    let before = c0.net.flat_params();
    let after = c1.net.flat_params();
    let h = 1e-4;
    for k in 0..before.len() {
        let analytic = before[k] - after[k];
        let fd = oracles::central_diff(
            |p| {
                let mut c = c0.clone();
                c.net.set_flat_params(p).unwrap();
                conditioner_loss(&c, &xs, &zs)
            },
            &before,
            k,
            h,
        );
        assert!(
            close(fd, analytic, 1e-5),
            "param {k}: fd {fd} analytic {analytic}"
        );
    }
}

#[test]
fn conditioner_at_its_targets_has_zero_loss_and_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = ConditionerConfig {
        hidden: vec![8, 4],
        dropout: 0.0,
        jitter_sigma: 0.0,
    };
    let c0 = Conditioner::init(&cfg, Standardizer::identity(6), vec![0, 1], 2).unwrap();
    let xs = rows(4, 6, &mut rng);
    let zs: Vec<Vec<f64>> = xs.iter().map(|x| c0.forward(x).unwrap()).collect();
    let mut c1 = c0.clone();
    assert_eq!(c1.train_step(&xs, &zs, 0.5, &mut rng).unwrap(), 0.0);
    assert_eq!(c1, c0);
}

#[test]
fn dropout_is_off_at_inference() {
    let c = Conditioner::init(
        &ConditionerConfig::default(),
        Standardizer::identity(6),
        (0..9).collect(),
        4,
    )
    .unwrap();
    let x = [0.6, 2.1, 3.0, 300.0, 50.0, 20.0];
    let a = c.forward(&x).unwrap();
    let b = c.forward(&x).unwrap();
    assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
}

#[test]
fn critic_step_follows_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let c0 = CriticNet::init(4, &CriticConfig { hidden: vec![6, 5] }, 3);
    let zs = rows(5, 4, &mut rng);
    let t: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut c1 = c0.clone();
    c1.fit_batch(&zs, &t, 1.0).unwrap();
    let before = c0.net.flat_params();
    let after = c1.net.flat_params();
    for k in 0..before.len() {
        let fd = oracles::central_diff(
            |p| {
                let mut c = c0.clone();
                c.net.set_flat_params(p).unwrap();
                c.mse(&zs, &t).unwrap()
            },
            &before,
            k,
            1e-4,
        );
        assert!(close(fd, before[k] - after[k], 1e-5), "param {k}");
    }
}

#[test]
fn rank_matches_brute_force_pearson() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let y = rows(50, 3, &mut rng);
        let mut z = rows(50, 8, &mut rng);
        for r in 0..50 {
            z[r][5] = 2.0 * y[r][1] + 0.3 * z[r][5];
            z[r][2] = -y[r][0] + 0.8 * z[r][2];
        }
        let scores = latent_axis_scores(&z, &y).unwrap();
        let brute: Vec<f64> = (0..8)
            .map(|i| {
                let zi: Vec<f64> = z.iter().map(|r| r[i]).collect();
                (0..3)
                    .map(|j| {
                        let yj: Vec<f64> = y.iter().map(|r| r[j]).collect();
                        oracles::pearson_sums(&zi, &yj).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        for (a, b) in scores.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut remaining: Vec<usize> = (0..8).collect();
        let mut order = Vec::new();
        while !remaining.is_empty() {
            let mut best = 0;
            for k in 1..remaining.len() {
                if brute[remaining[k]] > brute[remaining[best]] {
                    best = k;
                }
            }
            order.push(remaining.remove(best));
        }
        assert_eq!(rank_latent_axes(&z, &y, 8).unwrap(), order);
        assert_eq!(rank_latent_axes(&z, &y, 3).unwrap(), order[..3].to_vec());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_ignores_positive_affine_property_rescaling(seed in any::<u64>(), a in 0.01f64..100.0, b in -50.0f64..50.0, col in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = rows(30, 3, &mut rng);
        let z = rows(30, 6, &mut rng);
        let mut y2 = y.clone();
        for r in y2.iter_mut() {
            r[col] = a * r[col] + b;
        }
        prop_assert_eq!(rank_latent_axes(&z, &y, 6).unwrap(), rank_latent_axes(&z, &y2, 6).unwrap());
    }
}

fn disc_config(hidden: usize, layers: usize) -> DiscriminatorConfig {
    DiscriminatorConfig {
        hidden,
        n_layers: layers,
        ..Default::default()
    }
}

#[test]
fn two_node_graph_matches_hand_trace() {
    let f = GraphFeatures {
        nodes: vec![
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 0.0, 0.0, 0.0],
        ],
        edges: vec![(0, 1, [1.0, 0.0, 0.0, 0.0])],
    };
    let mut d = GraphDiscriminator::zeros(disc_config(2, 1));
    let mut p = vec![0.0; d.n_params()];
    // Layout: ε, edge weights (6×4), edge bias (6), node weights (2×6),
    // node bias (2), head W1 (2×2), b1 (2), w2 (2), b2.
    p[0] = 0.5;
    p[1] = 1.0; // edge feature 0 into channel 0
    let w = 1 + 24 + 6;
    p[w] = 1.0; // row 0 reads channel 0
    p[w + 7] = 1.0; // row 1 reads channel 1
    p[w + 12 + 1] = 1.0; // b = (0, 1)
    let head = w + 14;
    p[head] = 1.0;
    p[head + 3] = 1.0; // W1 = I
    p[head + 6] = 0.7;
    p[head + 7] = -1.3;
    p[head + 8] = 0.1;
    d.set_flat_params(&p).unwrap();

    // Messages: 0←1 relu((0,2)+(1,0)) = (1,2); 1←0 relu((1,0)+(1,0)) = (2,0).
    // Aggregates: 1.5·(1,0)+(1,2) = (2.5,2); 1.5·(0,2)+(2,0) = (2,3).
    // Pre-activations with bias (0,1): (2.5,3) and (2,4).
    let sa = (0.0625f64 + 1e-5).sqrt();
    let sb = (1.0f64 + 1e-5).sqrt();
    let y0 = [-0.25 / sa, 0.25 / sa];
    let y1 = [-1.0 / sb, 1.0 / sb];
    let pooled = [(y0[0] + y1[0]) / 2.0, (y0[1] + y1[1]) / 2.0];
    let expect = 0.7 * pooled[0].max(0.0) - 1.3 * pooled[1].max(0.0) + 0.1;
    assert!((d.forward(&f).unwrap() - expect).abs() < 1e-14);
}

fn perm_of(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

#[test]
fn logit_is_invariant_under_relabeling() {
    let d = GraphDiscriminator::init(DiscriminatorConfig::default(), 13).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for smi in [
        "CC(=O)Nc1ccc(O)cc1",
        "C1CCC2(CC1)OCCO2",
        "FC(F)(F)c1ccncc1",
        "CCN(CC)CC",
    ] {
        let g = mol_from_smiles(smi).unwrap();
        let base = d.forward_mol(&g).unwrap();
        for _ in 0..100 {
            let h: MolGraph = g.permuted(&perm_of(g.n_atoms(), &mut rng));
            assert!((d.forward_mol(&h).unwrap() - base).abs() <= 1e-12, "{smi}");
        }
    }
}

fn feats(s: &str) -> GraphFeatures {
    graph_features(&mol_from_smiles(s).unwrap()).unwrap()
}

#[test]
fn discriminator_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let d = GraphDiscriminator::init(disc_config(4, 2), seed).unwrap();
        let real = vec![feats("CCO")];
        let fake = vec![feats("C=CN")];
        let (_, grad) = d.loss_and_gradient(&real, &fake).unwrap();
        let base = d.flat_params();
        for k in 0..base.len() {
            let fd = oracles::central_diff(
                |p| {
                    d.with_params(p)
                        .unwrap()
                        .loss_and_gradient(&real, &fake)
                        .unwrap()
                        .0
                },
                &base,
                k,
                1e-4,
            );
            assert!(
                close(fd, grad[k], 1e-4),
                "seed {seed} param {k}: fd {fd} analytic {}",
                grad[k]
            );
        }
    }
}

#[test]
fn train_step_uses_smoothed_targets_and_updates_ema() {
    let mut d = GraphDiscriminator::zeros(DiscriminatorConfig::default());
    let mut ema = EmaState::new(&d.flat_params(), 0.9);
    let real = vec![feats("CCO")];
    let fake = vec![feats("CN")];
    let loss = discriminator_train_step(&mut d, &mut ema, &real, &fake, 0.1).unwrap();
    assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    // All-zero logits: the head bias moves by −lr·mean(σ(0) − t) = 0.
    assert_eq!(d.flat_params(), vec![0.0; d.n_params()]);

    let mut d = GraphDiscriminator::init(DiscriminatorConfig::default(), 1).unwrap();
    let live0 = d.flat_params();
    let mut ema = EmaState::new(&live0, 0.9);
    let real: Vec<GraphFeatures> = ["c1ccccc1O", "CC(=O)N", "c1ccncc1"]
        .iter()
        .map(|s| feats(s))
        .collect();
    let fake: Vec<GraphFeatures> = ["FC(F)OF", "NNON", "OOC(F)N"]
        .iter()
        .map(|s| feats(s))
        .collect();
    let first = d.loss_and_gradient(&real, &fake).unwrap().0;
    for _ in 0..60 {
        discriminator_train_step(&mut d, &mut ema, &real, &fake, 0.05).unwrap();
    }
    assert!(d.loss_and_gradient(&real, &fake).unwrap().0 < first);
    assert_ne!(ema.shadow, live0);
    assert_ne!(ema.shadow, d.flat_params());
}
