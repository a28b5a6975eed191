//! Reference descriptor values and property-based invariants for the
//! chemistry kernel.

use std::collections::BTreeSet;

use patchmol::chem::*;
use proptest::prelude::*;

struct Ref {
    smiles: &'static str,
    logp: f64,
    tpsa: f64,
    qed: f64,
    mw: f64,
    hbd: u32,
    hba: u32,
    rotb: u32,
    arom_rings: u32,
}

// Values computed with RDKit 2026.09 (Crippen.MolLogP, CalcTPSA, QED with
// the alert count forced to 0, MolWt, CalcNumHBD/HBA, strict rotatable
// bonds, aromatic ring count).
const REFERENCE: &[Ref] = &[
    Ref {
        smiles: "C",
        logp: 0.6361,
        tpsa: 0.00,
        qed: 0.3598,
        mw: 16.043,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CCO",
        logp: -0.0014,
        tpsa: 20.23,
        qed: 0.4068,
        mw: 46.069,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CC(C)(C)OC(=O)Nc1ccc(OC)cc1",
        logp: 3.0422,
        tpsa: 47.56,
        qed: 0.8378,
        mw: 223.272,
        hbd: 1,
        hba: 3,
        rotb: 2,
        arom_rings: 1,
    },
    Ref {
        smiles: "c1ccccc1",
        logp: 1.6866,
        tpsa: 0.00,
        qed: 0.4426,
        mw: 78.114,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "Cc1ccccc1",
        logp: 1.9950,
        tpsa: 0.00,
        qed: 0.4588,
        mw: 92.141,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "c1ccncc1",
        logp: 1.0816,
        tpsa: 12.89,
        qed: 0.4531,
        mw: 79.102,
        hbd: 0,
        hba: 1,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "Nc1ccccc1",
        logp: 1.2688,
        tpsa: 26.02,
        qed: 0.5132,
        mw: 93.129,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "Oc1ccccc1",
        logp: 1.3922,
        tpsa: 20.23,
        qed: 0.5147,
        mw: 94.113,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "CC(=O)O",
        logp: 0.0909,
        tpsa: 37.30,
        qed: 0.4299,
        mw: 60.052,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CC(=O)NC",
        logp: -0.2477,
        tpsa: 29.10,
        qed: 0.4207,
        mw: 73.095,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CC(=O)OC",
        logp: 0.1793,
        tpsa: 26.30,
        qed: 0.4094,
        mw: 74.079,
        hbd: 0,
        hba: 2,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CCN(CC)CC",
        logp: 1.3481,
        tpsa: 3.24,
        qed: 0.5184,
        mw: 101.193,
        hbd: 0,
        hba: 1,
        rotb: 3,
        arom_rings: 0,
    },
    Ref {
        smiles: "C1CCNCC1",
        logp: 0.7599,
        tpsa: 12.03,
        qed: 0.4576,
        mw: 85.150,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "C1CO1",
        logp: 0.0166,
        tpsa: 12.53,
        qed: 0.3731,
        mw: 44.053,
        hbd: 0,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "C1CN1",
        logp: -0.4104,
        tpsa: 21.94,
        qed: 0.3914,
        mw: 43.069,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "FC(F)(F)c1ccccc1",
        logp: 2.7054,
        tpsa: 0.00,
        qed: 0.5275,
        mw: 146.111,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "O=Cc1ccccc1",
        logp: 1.4991,
        tpsa: 17.07,
        qed: 0.5298,
        mw: 106.124,
        hbd: 0,
        hba: 1,
        rotb: 1,
        arom_rings: 1,
    },
    Ref {
        smiles: "CC=CC=O",
        logp: 0.7614,
        tpsa: 17.07,
        qed: 0.4449,
        mw: 70.091,
        hbd: 0,
        hba: 1,
        rotb: 1,
        arom_rings: 0,
    },
    Ref {
        smiles: "NC(=O)c1ccncc1",
        logp: 0.1805,
        tpsa: 55.98,
        qed: 0.5773,
        mw: 122.127,
        hbd: 1,
        hba: 2,
        rotb: 1,
        arom_rings: 1,
    },
    Ref {
        smiles: "c1ccc2ccccc2c1",
        logp: 2.8398,
        tpsa: 0.00,
        qed: 0.5114,
        mw: 128.174,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 2,
    },
    Ref {
        smiles: "c1ccc(-c2ccccc2)cc1",
        logp: 3.3536,
        tpsa: 0.00,
        qed: 0.5905,
        mw: 154.212,
        hbd: 0,
        hba: 0,
        rotb: 1,
        arom_rings: 2,
    },
    Ref {
        smiles: "CN=C",
        logp: 0.3168,
        tpsa: 12.36,
        qed: 0.3704,
        mw: 43.069,
        hbd: 0,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "ON=C",
        logp: 0.0762,
        tpsa: 32.59,
        qed: 0.4106,
        mw: 45.041,
        hbd: 1,
        hba: 2,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CCOC(=O)C=C",
        logp: 0.7355,
        tpsa: 26.30,
        qed: 0.5111,
        mw: 100.117,
        hbd: 0,
        hba: 2,
        rotb: 2,
        arom_rings: 0,
    },
    Ref {
        smiles: "OCC(O)CO",
        logp: -1.6681,
        tpsa: 60.69,
        qed: 0.3815,
        mw: 92.094,
        hbd: 3,
        hba: 3,
        rotb: 2,
        arom_rings: 0,
    },
    Ref {
        smiles: "CC(C)CC(=O)N",
        logp: 0.5178,
        tpsa: 43.09,
        qed: 0.5410,
        mw: 101.149,
        hbd: 1,
        hba: 1,
        rotb: 2,
        arom_rings: 0,
    },
    Ref {
        smiles: "CNC(=O)Oc1ccccc1",
        logp: 1.4048,
        tpsa: 38.33,
        qed: 0.6585,
        mw: 151.165,
        hbd: 1,
        hba: 2,
        rotb: 1,
        arom_rings: 1,
    },
    Ref {
        smiles: "COc1ncccc1F",
        logp: 1.2293,
        tpsa: 22.12,
        qed: 0.5656,
        mw: 127.118,
        hbd: 0,
        hba: 2,
        rotb: 1,
        arom_rings: 1,
    },
    Ref {
        smiles: "C1CC2CCC1C2",
        logp: 2.1965,
        tpsa: 0.00,
        qed: 0.4334,
        mw: 96.173,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "C1CCC2(CC1)CC2",
        logp: 2.7307,
        tpsa: 0.00,
        qed: 0.4495,
        mw: 110.200,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CC1=CC(=O)C=CC1=O",
        logp: 0.6407,
        tpsa: 34.14,
        qed: 0.4722,
        mw: 122.123,
        hbd: 0,
        hba: 2,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "OC1=CC=CC=C1",
        logp: 1.3922,
        tpsa: 20.23,
        qed: 0.5147,
        mw: 94.113,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "C1=CC=CN=C1",
        logp: 1.0816,
        tpsa: 12.89,
        qed: 0.4531,
        mw: 79.102,
        hbd: 0,
        hba: 1,
        rotb: 0,
        arom_rings: 1,
    },
    Ref {
        smiles: "CC(N)C(=O)O",
        logp: -0.5818,
        tpsa: 63.32,
        qed: 0.4514,
        mw: 89.094,
        hbd: 2,
        hba: 2,
        rotb: 1,
        arom_rings: 0,
    },
    Ref {
        smiles: "O=C1NCCN1",
        logp: -0.7008,
        tpsa: 41.13,
        qed: 0.4018,
        mw: 86.094,
        hbd: 2,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "FC(F)F",
        logp: 1.1785,
        tpsa: 0.00,
        qed: 0.4011,
        mw: 70.013,
        hbd: 0,
        hba: 0,
        rotb: 0,
        arom_rings: 0,
    },
    Ref {
        smiles: "CCCCCCCCCC",
        logp: 4.1470,
        tpsa: 0.00,
        qed: 0.5007,
        mw: 142.286,
        hbd: 0,
        hba: 0,
        rotb: 7,
        arom_rings: 0,
    },
    Ref {
        smiles: "OC(F)(F)C(F)(F)F",
        logp: 1.1338,
        tpsa: 20.23,
        qed: 0.5288,
        mw: 136.019,
        hbd: 1,
        hba: 1,
        rotb: 0,
        arom_rings: 0,
    },
];

#[test]
fn descriptors_agree_with_reference_toolkit() {
    for r in REFERENCE {
        let g = mol_from_smiles(r.smiles).unwrap();
        let d = compute_descriptors(&g);
        assert!(
            (d.logp - r.logp).abs() < 1e-3,
            "{} logp {} vs {}",
            r.smiles,
            d.logp,
            r.logp
        );
        assert!(
            (d.tpsa - r.tpsa).abs() < 1e-2,
            "{} tpsa {} vs {}",
            r.smiles,
            d.tpsa,
            r.tpsa
        );
        assert!(
            (d.qed - r.qed).abs() < 1e-3,
            "{} qed {} vs {}",
            r.smiles,
            d.qed,
            r.qed
        );
        assert!((d.mol_weight - r.mw).abs() < 1e-2, "{} mw", r.smiles);
        assert_eq!(d.hbd, r.hbd, "{} hbd", r.smiles);
        assert_eq!(d.hba, r.hba, "{} hba", r.smiles);
        assert_eq!(d.rotatable_bonds, r.rotb, "{} rotb", r.smiles);
        assert_eq!(
            d.n_aromatic_rings, r.arom_rings,
            "{} aromatic rings",
            r.smiles
        );
    }
}

#[test]
fn methane_logp_is_carbon_plus_four_hydrogens() {
    let d = compute_descriptors(&mol_from_smiles("C").unwrap());
    assert!((d.logp - (0.1441 + 4.0 * 0.1230)).abs() < 1e-12);
    assert!((d.mol_weight - 16.043).abs() < 1e-9);
    assert_eq!((d.hbd, d.hba, d.rotatable_bonds), (0, 0, 0));
}

#[test]
fn boc_anisidine_logp() {
    // Full Crippen sum for this structure is 3.04; the tabulated 3.62 for the
    // same compound is outside the ±0.3 band (see the decisions ledger).
    let d = compute_descriptors(&mol_from_smiles("CC(C)(C)OC(=O)Nc1ccc(OC)cc1").unwrap());
    assert!((d.logp - 3.0422).abs() < 1e-3);
    assert!((d.logp - 3.62).abs() > 0.3);
}

#[test]
fn perceive_rings_examples() {
    assert!(perceive_rings(&mol_from_smiles("CCC").unwrap()).is_empty());
    assert_eq!(
        perceive_rings(&mol_from_smiles("C1CC1").unwrap()),
        vec![vec![0, 1, 2]]
    );
    let naph = perceive_rings(&mol_from_smiles("c1ccc2ccccc2c1").unwrap());
    assert_eq!(naph.len(), 2);
    assert!(naph.iter().all(|r| r.len() == 6));
}

#[test]
fn scaffold_of_dimethylbiphenyl() {
    let s = murcko_scaffold(&mol_from_smiles("Cc1ccc(-c2ccc(C)cc2)cc1").unwrap());
    assert_eq!(
        canonical_smiles(&s),
        canonical_smiles(&mol_from_smiles("c1ccccc1-c1ccccc1").unwrap())
    );
}

#[test]
fn fingerprint_examples() {
    let fp = |s: &str| morgan_fingerprint(&mol_from_smiles(s).unwrap(), 2, 2048);
    assert_ne!(fp("C"), fp("CC"));
    let r0 = morgan_fingerprint(&mol_from_smiles("c1ccccc1").unwrap(), 0, 2048);
    assert_eq!(r0.count_ones(), 1);
}

#[test]
fn ethanol_orderings_share_one_string() {
    let g = mol_from_smiles("CCO").unwrap();
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let strings: BTreeSet<String> = perms
        .iter()
        .map(|p| canonical_smiles(&sanitize(&g.permuted(p)).unwrap()))
        .collect();
    assert_eq!(strings.len(), 1);
    assert_eq!(strings.into_iter().next().unwrap(), "CCO");
}

const ELEMENTS: [Element; 4] = [Element::C, Element::N, Element::O, Element::F];

/// Random valence-respecting Kekulé graph built from an element list and an
/// edge proposal list; proposals that would exceed a cap are skipped.
fn build(elems: &[usize], edges: &[(usize, usize, bool)]) -> MolGraph {
    let mut g = MolGraph::new();
    for &e in elems {
        g.add_atom(ELEMENTS[e % 4]);
    }
    let n = elems.len();
    let mut used = vec![0u32; n];
    for &(a, b, double) in edges {
        let (a, b) = (a % n, b % n);
        let order = if double {
            BondOrder::Double
        } else {
            BondOrder::Single
        };
        let v = order.value();
        if a == b || g.bond_between(a, b).is_some() {
            continue;
        }
        if used[a] + v > g.atom(a).element.max_valence()
            || used[b] + v > g.atom(b).element.max_valence()
        {
            continue;
        }
        g.add_bond(a, b, order).unwrap();
        used[a] += v;
        used[b] += v;
    }
    g
}

const SEEDS: &[&str] = &[
    "c1ccccc1",
    "Cc1ccncc1",
    "c1ccc2ccccc2c1",
    "C1=CC=CC=C1C=O",
    "c1ccc(-c2ccccc2)cc1",
    "OC1CCNCC1",
    "C1CC2CC1C2",
    "N1C=CC=C1",
    "CC(=O)Nc1ccccc1",
    "c1cnc2ncccc2c1",
    "C1CCC2(CC1)CC2",
    "FC(F)(F)c1ccncc1",
    "C=CC=CC=C",
    "O=C1C=CC(=O)C=C1",
];

fn mol_strategy() -> impl Strategy<Value = MolGraph> {
    let random = (
        prop::collection::vec(0usize..4, 1..10),
        prop::collection::vec((0usize..10, 0usize..10, prop::bool::weighted(0.25)), 0..16),
    )
        .prop_map(|(e, b)| sanitize(&build(&e, &b)).expect("valence-respecting graph sanitizes"));
    let seeded = prop::sample::select(SEEDS).prop_map(|s| mol_from_smiles(s).unwrap());
    prop_oneof![random, seeded]
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    p
}

/// Every simple cycle of length 3..=8, each reported once by its sorted
/// edge set.
fn brute_cycles(n: usize, edges: &BTreeSet<(usize, usize)>) -> BTreeSet<Vec<(usize, usize)>> {
    let adj = |u: usize| -> Vec<usize> {
        (0..n)
            .filter(|&v| edges.contains(&(u.min(v), u.max(v))))
            .collect()
    };
    let mut out = BTreeSet::new();
    fn walk(
        path: &mut Vec<usize>,
        adj: &dyn Fn(usize) -> Vec<usize>,
        out: &mut BTreeSet<Vec<(usize, usize)>>,
    ) {
        let u = *path.last().unwrap();
        for v in adj(u) {
            if v == path[0] && path.len() >= 3 {
                let mut es: Vec<(usize, usize)> = (0..path.len())
                    .map(|k| {
                        let (x, y) = (path[k], path[(k + 1) % path.len()]);
                        (x.min(y), x.max(y))
                    })
                    .collect();
                es.sort();
                out.insert(es);
            } else if !path.contains(&v) && path.len() < 8 {
                path.push(v);
                walk(path, adj, out);
                path.pop();
            }
        }
    }
    for s in 0..n {
        walk(&mut vec![s], &adj, &mut out);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sanitize_is_idempotent(g in mol_strategy()) {
        let again = sanitize(&g).unwrap();
        prop_assert_eq!(&again, &g);
    }

    #[test]
    fn sanitized_valence_within_cap(g in mol_strategy()) {
        for i in 0..g.n_atoms() {
            let a = g.atom(i);
            prop_assert!(g.explicit_valence(i) + a.implicit_hydrogens as u32 <= a.element.max_valence());
        }
    }

    #[test]
    fn canonical_smiles_permutation_invariant(g in mol_strategy(), seed in any::<u64>()) {
        let p = permutation(g.n_atoms(), seed);
        let h = sanitize(&g.permuted(&p)).unwrap();
        prop_assert_eq!(canonical_smiles(&h), canonical_smiles(&g));
    }

    #[test]
    fn canonical_smiles_round_trip_is_fixed_point(g in mol_strategy()) {
        let s = canonical_smiles(&g);
        let back = canonical_smiles(&mol_from_smiles(&s).unwrap());
        prop_assert_eq!(back, s);
    }

    #[test]
    fn fingerprint_isomorphism_invariant(g in mol_strategy(), seed in any::<u64>()) {
        let p = permutation(g.n_atoms(), seed);
        let h = sanitize(&g.permuted(&p)).unwrap();
        prop_assert_eq!(morgan_fingerprint(&h, 2, 2048), morgan_fingerprint(&g, 2, 2048));
    }

    #[test]
    fn tanimoto_bounds_symmetry_reflexivity(a in mol_strategy(), b in mol_strategy()) {
        let fa = morgan_fingerprint(&a, 2, 2048);
        let fb = morgan_fingerprint(&b, 2, 2048);
        let t = tanimoto(&fa, &fb).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert_eq!(t, tanimoto(&fb, &fa).unwrap());
        prop_assert_eq!(tanimoto(&fa, &fa).unwrap(), 1.0);
    }

    #[test]
    fn rings_match_brute_force(n in 1usize..=12, raw in prop::collection::vec((0usize..12, 0usize..12), 0..20)) {
        let mut g = MolGraph::new();
        for _ in 0..n {
            g.add_atom(Element::C);
        }
        let mut edges = BTreeSet::new();
        for (a, b) in raw {
            let (a, b) = (a % n, b % n);
            if a != b && edges.insert((a.min(b), a.max(b))) {
                g.add_bond(a, b, BondOrder::Single).unwrap();
            }
        }
        let found: Vec<Vec<usize>> = perceive_rings(&g);
        let as_edges: BTreeSet<Vec<(usize, usize)>> = found
            .iter()
            .map(|r| {
                let mut es: Vec<(usize, usize)> = (0..r.len())
                    .map(|k| (r[k].min(r[(k + 1) % r.len()]), r[k].max(r[(k + 1) % r.len()])))
                    .collect();
                es.sort();
                es
            })
            .collect();
        prop_assert_eq!(as_edges.len(), found.len(), "duplicate cycles reported");
        prop_assert_eq!(as_edges, brute_cycles(n, &edges));
    }

    #[test]
    fn descriptor_ranges(g in mol_strategy()) {
        let d = compute_descriptors(&g);
        prop_assert!((0.0..=1.0).contains(&d.qed));
        prop_assert!((1.0..=10.0).contains(&d.sa));
        prop_assert!((0.0..=1.0).contains(&d.fraction_sp3));
        prop_assert!(d.n_aromatic_rings <= d.n_rings);
    }

    #[test]
    fn inserting_a_chain_carbon_keeps_rotatable_count(g in mol_strategy(), pick in any::<prop::sample::Index>()) {
        let candidates: Vec<usize> = (0..g.n_bonds())
            .filter(|&b| {
                let bond = g.bond(b);
                !bond.in_ring && !bond.aromatic && bond.order == BondOrder::Single
            })
            .collect();
        if candidates.is_empty() {
            return Ok(());
        }
        let target = candidates[pick.index(candidates.len())];
        let (ta, tb) = (g.bond(target).a, g.bond(target).b);
        let mut h = MolGraph::new();
        for a in g.atoms() {
            h.push_atom(a.clone());
        }
        for (k, bond) in g.bonds().iter().enumerate() {
            if k != target {
                h.push_bond(bond.a, bond.b, bond.order, bond.aromatic).unwrap();
            }
        }
        let c = h.add_atom(Element::C);
        h.add_bond(ta, c, BondOrder::Single).unwrap();
        h.add_bond(c, tb, BondOrder::Single).unwrap();
        let h = sanitize(&h).unwrap();
        prop_assert!(rotatable_bonds(&h) >= rotatable_bonds(&g));
    }

    #[test]
    fn attaching_a_phenyl_keeps_aromatic_ring_count(g in mol_strategy(), pick in any::<prop::sample::Index>()) {
        let sites: Vec<usize> = (0..g.n_atoms()).filter(|&i| g.atom(i).implicit_hydrogens > 0).collect();
        if sites.is_empty() {
            return Ok(());
        }
        let site = sites[pick.index(sites.len())];
        let mut h = MolGraph::new();
        for a in g.atoms() {
            h.push_atom(a.clone());
        }
        for bond in g.bonds() {
            h.push_bond(bond.a, bond.b, bond.order, bond.aromatic).unwrap();
        }
        let ring: Vec<usize> = (0..6).map(|_| h.add_atom(Element::C)).collect();
        for k in 0..6 {
            let order = if k % 2 == 0 { BondOrder::Double } else { BondOrder::Single };
            h.add_bond(ring[k], ring[(k + 1) % 6], order).unwrap();
        }
        h.add_bond(site, ring[0], BondOrder::Single).unwrap();
        let h = sanitize(&h).unwrap();
        let before = compute_descriptors(&g).n_aromatic_rings;
        prop_assert!(compute_descriptors(&h).n_aromatic_rings > before);
    }
}
