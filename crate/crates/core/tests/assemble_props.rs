//! Assembler golden cases, step examples and invariants.

use patchmol::assemble::*;
use patchmol::chem::*;
use patchmol::qpatch::PatchTensor;
use proptest::prelude::*;

fn carbon_rows(points: &[(f64, f64)]) -> PatchTensor {
    let mut h = PatchTensor::filled(48, 16, 0.5);
    for (i, &(x, y)) in points.iter().enumerate() {
        let row = h.row_mut(i);
        row[0] = 0.9;
        row[7] = 0.5 + x;
        row[8] = 0.5 + y;
    }
    h
}

fn hexagon_patch() -> PatchTensor {
    let pts: Vec<(f64, f64)> = (0..6)
        .map(|k| {
            let a = std::f64::consts::PI / 3.0 * k as f64;
            (0.3 * a.cos(), 0.3 * a.sin())
        })
        .collect();
    carbon_rows(&pts)
}

fn triangle_patch() -> PatchTensor {
    carbon_rows(&[(0.0, 0.0), (0.2, 0.0), (0.1, 0.17)])
}

#[test]
fn hexagon_assembles_to_benzene() {
    let cfg = AggregatorConfig::default();
    for _ in 0..10 {
        let m = assemble_molecule(&hexagon_patch(), &cfg).unwrap();
        assert_eq!(m.smiles, "c1ccccc1");
        assert_eq!(m.route, Route::Graph);
    }
}

#[test]
fn triangle_assembles_to_cyclopropane() {
    let cfg = AggregatorConfig::default();
    for _ in 0..10 {
        assert_eq!(
            assemble_molecule(&triangle_patch(), &cfg).unwrap().smiles,
            "C1CC1"
        );
    }
}

#[test]
fn rest_patch_fails() {
    let h = PatchTensor::filled(48, 16, 0.5);
    assert!(matches!(
        assemble_molecule(&h, &AggregatorConfig::default()),
        Err(AssembleError::GenerationFailure { .. })
    ));
    assert!(activate_nodes(&h, 0.15).is_empty());
}

#[test]
fn single_active_carbon() {
    let mut h = PatchTensor::filled(4, 16, 0.5);
    h.row_mut(2)[0] = 0.8;
    let nodes = activate_nodes(&h, 0.15);
    assert_eq!(nodes.len(), 1);
    assert_eq!((nodes[0].row, nodes[0].element), (2, Element::C));
}

fn nodes_at(points: &[Vec<f64>]) -> Vec<ProtoNode> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| ProtoNode {
            row: i,
            element: Element::C,
            embedding: p.clone(),
        })
        .collect()
}

#[test]
fn propose_examples() {
    assert!(propose_edges(nodes_at(&[vec![0.1, 0.2]]), 0.35)
        .edges
        .is_empty());
    let pg = propose_edges(nodes_at(&[vec![0.1, 0.2], vec![0.1, 0.2]]), 0.35);
    assert_eq!(pg.edges.len(), 1);
}

#[test]
fn hexagon_protection_with_two_neighbours() {
    let pts: Vec<Vec<f64>> = (0..6)
        .map(|k| {
            let a = std::f64::consts::PI / 3.0 * k as f64;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let pg = propose_edges(nodes_at(&pts), 0.5);
    assert!(pg.edges.is_empty());
    let pg = protect_six_rings(pg, 2, 0.9, 1.25);
    assert_eq!(pg.edges.len(), 6);
    assert!(pg.edges.iter().all(|e| e.protected));
    // Already complete: tags only.
    let again = protect_six_rings(pg.clone(), 2, 0.9, 1.25);
    assert_eq!(again, pg);
    let tri = propose_edges(nodes_at(&[vec![0.0], vec![0.1], vec![0.2]]), 0.5);
    assert!(protect_six_rings(tri, 4, 0.5, 1.25)
        .edges
        .iter()
        .all(|e| !e.protected));
}

#[test]
fn star_prunes_two_longest() {
    let mut pts = vec![vec![0.0, 0.0]];
    for k in 1..=5 {
        pts.push(vec![0.05 * k as f64, 0.0]);
    }
    let mut pg = propose_edges(nodes_at(&pts), 10.0);
    pg.edges.retain(|e| e.u == 0);
    assert_eq!(pg.degree(0), 5);
    let pruned = prune_degrees(pg, &DegreeCaps::default());
    assert_eq!(pruned.degree(0), 3);
    let kept: Vec<usize> = pruned.neighbors(0);
    assert_eq!(kept, vec![1, 2, 3]);
}

#[test]
fn all_protected_node_still_pruned() {
    let mut pts = vec![vec![0.0, 0.0]];
    for k in 1..=4 {
        pts.push(vec![0.05 * k as f64, 0.0]);
    }
    let mut pg = propose_edges(nodes_at(&pts), 10.0);
    pg.edges.retain(|e| e.u == 0);
    for e in pg.edges.iter_mut() {
        e.protected = true;
    }
    let pruned = prune_degrees(pg, &DegreeCaps::default());
    assert_eq!(pruned.neighbors(0), vec![1, 2, 3]);
}

#[test]
fn upgrade_examples() {
    let pg = propose_edges(nodes_at(&[vec![0.0], vec![0.1]]), 0.35);
    assert_eq!(upgrade_double_bonds(pg.clone(), 0, 0.05), pg);
    let up = upgrade_double_bonds(pg, 1, 0.05);
    assert_eq!(up.edges[0].order, 2);
    let mut nodes = nodes_at(&[vec![0.0], vec![0.1]]);
    nodes[1].element = Element::F;
    let cf = upgrade_double_bonds(propose_edges(nodes, 0.35), 1, 0.05);
    assert_eq!(cf.edges[0].order, 1);
}

#[test]
fn two_pass_keeps_largest_component() {
    let g = parse_smiles("C1=CC=CC=C1.C").unwrap();
    let m = aromatize_two_pass(&g).unwrap();
    assert_eq!(canonical_smiles(&m), "c1ccccc1");
    let g = parse_smiles("C1CCCCC1").unwrap();
    assert_eq!(
        canonical_smiles(&aromatize_two_pass(&g).unwrap()),
        "C1CCCCC1"
    );
    let g = parse_smiles("C1=CC=C2C=CC=CC2=C1").unwrap();
    let m = aromatize_two_pass(&g).unwrap();
    assert_eq!(m.atoms().iter().filter(|a| a.aromatic).count(), 10);
}

#[test]
fn score_examples() {
    let zero = ScoreWeights {
        qed: 0.0,
        sa: 0.0,
        logp: 0.0,
        gamma: 5.0,
    };
    let m = mol_from_smiles("CCO").unwrap();
    assert_eq!(score_candidate(&m, &zero), 0.0);
    let mut d = compute_descriptors(&m);
    d.qed = 0.8;
    d.sa = 5.01;
    d.logp = 3.62;
    assert!((score_from(&d, &ScoreWeights::default()) - (-0.202)).abs() < 1e-12);
    d.logp = 6.0;
    d.qed = 0.0;
    d.sa = 0.0;
    assert!((score_from(&d, &ScoreWeights::default()) + 0.2).abs() < 1e-12);
}

#[test]
fn calibration_quantile() {
    let h = triangle_patch();
    let t = calibrate_tau(&[h], 1.0, 0.15).unwrap();
    assert!((t - 0.2).abs() < 0.01);
    assert!(calibrate_tau(&[PatchTensor::filled(4, 16, 0.5)], 0.5, 0.15).is_none());
}

fn random_patch() -> impl Strategy<Value = PatchTensor> {
    prop::collection::vec(0.0f64..1.0, 48 * 16).prop_map(|d| PatchTensor::new(48, 16, d).unwrap())
}

fn random_nodes() -> impl Strategy<Value = Vec<ProtoNode>> {
    prop::collection::vec((0usize..4, prop::collection::vec(0.0f64..1.0, 3)), 1..20).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (e, emb))| ProtoNode {
                row: i,
                element: [Element::C, Element::N, Element::O, Element::F][e],
                embedding: emb,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outputs_always_sanitize(h in random_patch()) {
        if let Ok(m) = assemble_molecule(&h, &AggregatorConfig::default()) {
            prop_assert!(sanitize(&m.mol).is_ok());
            prop_assert_eq!(canonical_smiles(&sanitize(&m.mol).unwrap()), m.smiles.clone());
            let again = assemble_molecule(&h, &AggregatorConfig::default()).unwrap();
            prop_assert_eq!(again.smiles, m.smiles);
        }
    }

    #[test]
    fn activation_matches_row_scan(h in random_patch(), eps in 0.3f64..0.5) {
        let nodes = activate_nodes(&h, eps);
        let mut expect = Vec::new();
        for i in 0..h.n_nodes {
            let mut dev: f64 = 0.0;
            for j in 0..h.f_node {
                dev = dev.max((h.get(i, j) - 0.5).abs());
            }
            if dev > eps {
                let mut best = 0;
                for c in 1..4 {
                    if h.get(i, c) > h.get(i, best) {
                        best = c;
                    }
                }
                expect.push((i, best));
            }
        }
        let got: Vec<(usize, usize)> = nodes
            .iter()
            .map(|n| (n.row, [Element::C, Element::N, Element::O, Element::F].iter().position(|&e| e == n.element).unwrap()))
            .collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn proposals_match_pairwise_oracle(nodes in random_nodes(), tau in 0.05f64..0.8) {
        let pg = propose_edges(nodes.clone(), tau);
        let mut expect = Vec::new();
        for u in 0..nodes.len() {
            for v in u + 1..nodes.len() {
                let d: f64 = nodes[u].embedding.iter().zip(&nodes[v].embedding).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                if d <= tau {
                    expect.push((u, v));
                }
            }
        }
        let got: Vec<(usize, usize)> = pg.edges.iter().map(|e| (e.u, e.v)).collect();
        prop_assert_eq!(got, expect);
        prop_assert!(pg.edges.iter().all(|e| e.order == 1 && !e.protected));
    }

    #[test]
    fn pruning_respects_caps(nodes in random_nodes(), tau in 0.2f64..1.0, k in 1usize..6) {
        let caps = DegreeCaps::default();
        let pg = protect_six_rings(propose_edges(nodes, tau), k, tau, 1.25);
        let before_protected: Vec<(usize, usize)> = pg.edges.iter().filter(|e| e.protected).map(|e| (e.u, e.v)).collect();
        let needs_protected = (0..pg.n()).any(|u| {
            let free = pg.edges.iter().filter(|e| (e.u == u || e.v == u) && !e.protected).count();
            pg.degree(u) - free > caps.cap(pg.nodes[u].element) as usize
        });
        let pruned = prune_degrees(pg, &caps);
        for u in 0..pruned.n() {
            prop_assert!(pruned.degree(u) <= caps.cap(pruned.nodes[u].element) as usize);
        }
        if !needs_protected {
            let after: Vec<(usize, usize)> = pruned.edges.iter().filter(|e| e.protected).map(|e| (e.u, e.v)).collect();
            prop_assert_eq!(after, before_protected);
        }
    }

    #[test]
    fn upgrades_keep_graph_sanitizable(nodes in random_nodes(), tau in 0.2f64..1.0, quota in 0usize..5) {
        let pg = prune_degrees(propose_edges(nodes, tau), &DegreeCaps::default());
        let ok_before = sanitize(&to_mol_graph(&pg)).is_ok();
        let up = upgrade_double_bonds(pg, quota, 0.05);
        prop_assert!(up.edges.iter().filter(|e| e.order == 2).count() <= quota);
        if ok_before {
            prop_assert!(sanitize(&to_mol_graph(&up)).is_ok());
        }
    }
}
