//! Physicochemical descriptors: QED, Crippen logP, a fragment-free
//! synthetic-accessibility proxy, TPSA and standard counts.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::canon::symmetry_classes;
use super::crippen::crippen_logp;
use super::element::Element;
use super::graph::{BondOrder, MolGraph};
use super::rings::{cycle_rank, independent_cycles, perceive_rings};
use super::smiles::parse_smiles;
use super::substructure::has_substructure;
use super::tpsa::tpsa;
use super::ChemError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Descriptors {
    pub qed: f64,
    pub logp: f64,
    pub sa: f64,
    pub mol_weight: f64,
    pub tpsa: f64,
    pub hbd: u32,
    pub hba: u32,
    pub rotatable_bonds: u32,
    pub fraction_sp3: f64,
    pub n_heavy_atoms: u32,
    pub n_hetero: u32,
    pub n_rings: u32,
    pub n_aromatic_rings: u32,
    pub n_aromatic_atoms: u32,
}

/// Column order of descriptor tables.
pub const DESCRIPTOR_COLUMNS: [&str; 15] = [
    "smiles",
    "qed",
    "logp",
    "sa",
    "mol_weight",
    "tpsa",
    "hbd",
    "hba",
    "rotatable_bonds",
    "fraction_sp3",
    "n_heavy_atoms",
    "n_hetero",
    "n_rings",
    "n_aromatic_rings",
    "n_aromatic_atoms",
];

/// Structural alerts for the QED ALERTS term, given as SMILES patterns.
#[derive(Clone, Debug, Default)]
pub struct QedAlerts {
    patterns: Vec<MolGraph>,
}

impl QedAlerts {
    pub fn from_smiles<S: AsRef<str>>(patterns: &[S]) -> Result<Self, ChemError> {
        let patterns = patterns
            .iter()
            .map(|p| parse_smiles(p.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QedAlerts { patterns })
    }

    pub fn count(&self, g: &MolGraph) -> u32 {
        self.patterns
            .iter()
            .filter(|p| has_substructure(g, p))
            .count() as u32
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

pub fn compute_descriptors(g: &MolGraph) -> Descriptors {
    compute_descriptors_with(g, &QedAlerts::default())
}

pub fn compute_descriptors_with(g: &MolGraph, alerts: &QedAlerts) -> Descriptors {
    let rings = RingSummary::new(g);
    let logp = crippen_logp(g);
    let mw = mol_weight(g);
    let psa = tpsa(g);
    let hbd = h_bond_donors(g);
    let hba = h_bond_acceptors(g);
    let rotb = rotatable_bonds(g);
    let qed = qed_from_properties(&QedProperties {
        mw,
        alogp: logp,
        hba: qed_acceptors(g) as f64,
        hbd: hbd as f64,
        psa,
        rotb: rotb as f64,
        arom: rings.aromatic as f64,
        alerts: alerts.count(g) as f64,
    });
    let heavy = g.heavy_atom_count() as u32;
    Descriptors {
        qed,
        logp,
        sa: sa_proxy(g, &rings),
        mol_weight: mw,
        tpsa: psa,
        hbd,
        hba,
        rotatable_bonds: rotb,
        fraction_sp3: fraction_sp3(g),
        n_heavy_atoms: heavy,
        n_hetero: g.atoms().iter().filter(|a| a.element.is_hetero()).count() as u32,
        n_rings: rings.total as u32,
        n_aromatic_rings: rings.aromatic as u32,
        n_aromatic_atoms: g.atoms().iter().filter(|a| a.aromatic).count() as u32,
    }
}

struct RingSummary {
    total: usize,
    aromatic: usize,
    basis: Vec<Vec<usize>>,
}

impl RingSummary {
    fn new(g: &MolGraph) -> Self {
        let mut rings = perceive_rings(g);
        let is_arom = |r: &Vec<usize>| {
            r.iter().all(|&i| g.atom(i).aromatic)
                && (0..r.len()).all(|k| {
                    g.bond_between(r[k], r[(k + 1) % r.len()])
                        .is_some_and(|b| g.bond(b).aromatic)
                })
        };
        rings.sort_by(|a, b| {
            a.len()
                .cmp(&b.len())
                .then_with(|| is_arom(b).cmp(&is_arom(a)))
                .then_with(|| a.cmp(b))
        });
        let chosen = independent_cycles(g, &rings);
        let basis: Vec<Vec<usize>> = chosen.iter().map(|&k| rings[k].clone()).collect();
        RingSummary {
            total: cycle_rank(g),
            aromatic: basis.iter().filter(|r| is_arom(r)).count(),
            basis,
        }
    }
}

pub fn mol_weight(g: &MolGraph) -> f64 {
    g.atoms()
        .iter()
        .map(|a| a.element.weight() + a.implicit_hydrogens as f64 * Element::H.weight())
        .sum()
}

/// N with at least one H, O with exactly one H.
pub fn h_bond_donors(g: &MolGraph) -> u32 {
    (0..g.n_atoms())
        .filter(|&i| {
            let a = g.atom(i);
            let h = g.total_hydrogens(i);
            match a.element {
                Element::N if !a.aromatic => h >= 1 && g.explicit_valence(i) + h == 3,
                Element::N => h == 1,
                Element::O => h == 1,
                _ => false,
            }
        })
        .count() as u32
}

fn double_to_on(g: &MolGraph, x: usize, ring_ok: bool) -> bool {
    g.neighbors(x).iter().any(|&(v, b)| {
        let bond = g.bond(b);
        !bond.aromatic
            && bond.order == BondOrder::Double
            && (ring_ok || !bond.in_ring)
            && !g.atom(v).aromatic
            && matches!(g.atom(v).element, Element::O | Element::N)
    })
}

/// Acceptor count: hydroxyl O not on an acid-like carbon, other divalent O,
/// trivalent N not bonded to an atom carrying an acyclic double bond to N/O,
/// and pyridine-type aromatic N.
pub fn h_bond_acceptors(g: &MolGraph) -> u32 {
    (0..g.n_atoms())
        .filter(|&i| {
            let a = g.atom(i);
            let h = g.total_hydrogens(i);
            let val = g.explicit_valence(i) + h;
            match (a.element, a.aromatic) {
                (Element::O, false) if h == 1 && val == 2 => g
                    .neighbors(i)
                    .iter()
                    .filter(|&&(v, _)| g.atom(v).element != Element::H)
                    .any(|&(v, b)| {
                        let bond = g.bond(b);
                        !bond.aromatic
                            && bond.order == BondOrder::Single
                            && !double_to_on(g, v, true)
                    }),
                (Element::O, false) => h == 0 && val == 2,
                (Element::N, false) => {
                    val == 3
                        && !g.neighbors(i).iter().any(|&(v, b)| {
                            let bond = g.bond(b);
                            !bond.aromatic
                                && bond.order == BondOrder::Single
                                && double_to_on(g, v, false)
                        })
                }
                (Element::N, true) | (Element::O, true) => h == 0,
                _ => false,
            }
        })
        .count() as u32
}

/// Acceptor count used inside QED: hydroxyl and ether/carbonyl oxygens,
/// pyridine-type N, and sp3 N not attached to a carbonyl carbon.
pub fn qed_acceptors(g: &MolGraph) -> u32 {
    (0..g.n_atoms())
        .filter(|&i| {
            let a = g.atom(i);
            let h = g.total_hydrogens(i);
            let x = g.degree(i) as u32 + a.implicit_hydrogens as u32;
            let val = g.explicit_valence(i) + h;
            match (a.element, a.aromatic) {
                (Element::O, true) => h == 0 && x == 2,
                (Element::O, false) => {
                    val == 2 && ((h == 1 && x == 2) || (h == 0 && (x == 2 || x == 1)))
                }
                (Element::N, true) => h == 0 && x == 2,
                (Element::N, false) => {
                    x == 3
                        && val == 3
                        && !g.neighbors(i).iter().any(|&(v, b)| {
                            let bond = g.bond(b);
                            !bond.aromatic
                                && bond.order == BondOrder::Single
                                && g.atom(v).element == Element::C
                                && !g.atom(v).aromatic
                                && g.neighbors(v).iter().any(|&(w, wb)| {
                                    let wbond = g.bond(wb);
                                    !wbond.aromatic
                                        && wbond.order == BondOrder::Double
                                        && g.atom(w).element == Element::O
                                        && !g.atom(w).aromatic
                                })
                        })
                }
                _ => false,
            }
        })
        .count() as u32
}

fn is_cf3(g: &MolGraph, i: usize) -> bool {
    g.atom(i).element == Element::C
        && g.neighbors(i)
            .iter()
            .filter(|&&(v, _)| g.atom(v).element == Element::F)
            .count()
            >= 3
}

fn is_tert_butyl_center(g: &MolGraph, i: usize) -> bool {
    g.atom(i).element == Element::C
        && !g.atom(i).aromatic
        && g.neighbors(i)
            .iter()
            .filter(|&&(v, _)| {
                let a = g.atom(v);
                a.element == Element::C && !a.aromatic && g.total_hydrogens(v) == 3
            })
            .count()
            >= 3
}

fn is_carbonyl_like(g: &MolGraph, i: usize) -> bool {
    g.atom(i).element == Element::C
        && !g.atom(i).aromatic
        && g.degree(i) == 3
        && double_to_on(g, i, true)
}

fn amide_like(g: &MolGraph, i: usize) -> bool {
    let a = g.atom(i);
    let acyclic_single = |v: usize, b: usize| {
        let bond = g.bond(b);
        !bond.aromatic && bond.order == BondOrder::Single && !bond.in_ring && v != i
    };
    if is_carbonyl_like(g, i)
        && g.neighbors(i).iter().any(|&(v, b)| {
            acyclic_single(v, b)
                && (g.atom(v).element == Element::N
                    || (g.atom(v).element == Element::O && !g.atom(v).aromatic))
        })
    {
        return true;
    }
    let hetero = a.element == Element::N || (a.element == Element::O && !a.aromatic);
    hetero
        && g.neighbors(i)
            .iter()
            .any(|&(v, b)| acyclic_single(v, b) && is_carbonyl_like(g, v))
}

/// Acyclic single bonds between non-terminal heavy atoms, excluding CF3 and
/// tert-butyl ends and amide/ester C–X bonds.
pub fn rotatable_bonds(g: &MolGraph) -> u32 {
    g.bonds()
        .iter()
        .filter(|b| {
            if b.aromatic || b.order != BondOrder::Single || b.in_ring {
                return false;
            }
            let (x, y) = (b.a, b.b);
            if g.heavy_degree(x) <= 1 || g.heavy_degree(y) <= 1 {
                return false;
            }
            if [x, y]
                .iter()
                .any(|&k| is_cf3(g, k) || is_tert_butyl_center(g, k))
            {
                return false;
            }
            !(amide_like(g, x) && amide_like(g, y))
        })
        .count() as u32
}

/// Fraction of carbons with no double or aromatic bond.
pub fn fraction_sp3(g: &MolGraph) -> f64 {
    let carbons: Vec<usize> = (0..g.n_atoms())
        .filter(|&i| g.atom(i).element == Element::C)
        .collect();
    if carbons.is_empty() {
        return 0.0;
    }
    let sp3 = carbons
        .iter()
        .filter(|&&i| !g.atom(i).aromatic && !g.has_double_bond(i))
        .count();
    sp3 as f64 / carbons.len() as f64
}

#[derive(Clone, Copy, Debug)]
pub struct QedProperties {
    pub mw: f64,
    pub alogp: f64,
    pub hba: f64,
    pub hbd: f64,
    pub psa: f64,
    pub rotb: f64,
    pub arom: f64,
    pub alerts: f64,
}

struct Ads {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    dmax: f64,
}

const ADS: [Ads; 8] = [
    Ads {
        a: 2.817065973,
        b: 392.5754953,
        c: 290.7489764,
        d: 2.419764353,
        e: 49.22325677,
        f: 65.37051707,
        dmax: 104.9805561,
    },
    Ads {
        a: 3.172690585,
        b: 137.8624751,
        c: 2.534937431,
        d: 4.581497897,
        e: 0.822739154,
        f: 0.576295591,
        dmax: 131.3186604,
    },
    Ads {
        a: 2.948620388,
        b: 160.4605972,
        c: 3.615294657,
        d: 4.435986202,
        e: 0.290141953,
        f: 1.300669958,
        dmax: 148.7763046,
    },
    Ads {
        a: 1.618662227,
        b: 1010.051101,
        c: 0.985094388,
        d: 0.000000001,
        e: 0.713820843,
        f: 0.920922555,
        dmax: 258.1632616,
    },
    Ads {
        a: 1.876861559,
        b: 125.2232657,
        c: 62.90773554,
        d: 87.83366614,
        e: 12.01999824,
        f: 28.51324732,
        dmax: 104.5686167,
    },
    Ads {
        a: 0.010000000,
        b: 272.4121427,
        c: 2.558379970,
        d: 1.565547684,
        e: 1.271567166,
        f: 2.758063707,
        dmax: 105.4420403,
    },
    Ads {
        a: 3.217788970,
        b: 957.7374108,
        c: 2.274627939,
        d: 0.000000001,
        e: 1.317690384,
        f: 0.375760881,
        dmax: 312.3372610,
    },
    Ads {
        a: 0.010000000,
        b: 1199.094025,
        c: -0.09002883,
        d: 0.000000001,
        e: 0.185904477,
        f: 0.875193782,
        dmax: 417.7253140,
    },
];

const QED_WEIGHTS: [f64; 8] = [0.66, 0.46, 0.05, 0.61, 0.06, 0.65, 0.48, 0.95];

fn ads(x: f64, p: &Ads) -> f64 {
    let exp1 = 1.0 + (-(x - p.c + p.d / 2.0) / p.e).exp();
    let exp2 = 1.0 + (-(x - p.c - p.d / 2.0) / p.f).exp();
    (p.a + p.b / exp1 * (1.0 - 1.0 / exp2)) / p.dmax
}

/// Weighted geometric mean of the eight asymmetric-double-sigmoid
/// desirabilities (mean weights).
pub fn qed_from_properties(p: &QedProperties) -> f64 {
    let xs = [p.mw, p.alogp, p.hba, p.hbd, p.psa, p.rotb, p.arom, p.alerts];
    let wsum: f64 = QED_WEIGHTS.iter().sum();
    let t: f64 = xs
        .iter()
        .zip(ADS.iter())
        .zip(QED_WEIGHTS.iter())
        .map(|((&x, ads_p), &w)| w * ads(x, ads_p).ln())
        .sum();
    (t / wsum).exp()
}

/// Atoms that look like unassigned stereocentres: sp3 carbon or nitrogen-free
/// carbon with four pairwise-distinct substituents (implicit H counts as one).
fn stereo_centers(g: &MolGraph) -> usize {
    let classes = symmetry_classes(g);
    (0..g.n_atoms())
        .filter(|&i| {
            let a = g.atom(i);
            if a.element != Element::C || a.aromatic || g.has_double_bond(i) {
                return false;
            }
            let h = g.total_hydrogens(i);
            if h > 1 || g.heavy_degree(i) + h as usize != 4 {
                return false;
            }
            let mut subs: Vec<u32> = g
                .neighbors(i)
                .iter()
                .filter(|&&(v, _)| g.atom(v).element != Element::H)
                .map(|&(v, _)| classes[v])
                .collect();
            subs.sort_unstable();
            subs.dedup();
            subs.len() == g.heavy_degree(i)
        })
        .count()
}

fn atom_fragment_score(g: &MolGraph, i: usize, small_ring: &[bool]) -> f64 {
    let a = g.atom(i);
    let mut s = 2.0;
    if a.element.is_hetero() {
        let hetero_links = g
            .neighbors(i)
            .iter()
            .filter(|&&(v, _)| g.atom(v).element.is_hetero())
            .count();
        s -= 1.5 * hetero_links as f64;
    }
    if a.element == Element::C && g.heavy_degree(i) == 4 {
        s -= 0.75;
    }
    if small_ring[i] {
        s -= 1.0;
    }
    if a.element == Element::N && !a.aromatic && g.has_double_bond(i) {
        s -= 0.5;
    }
    s
}

/// Fragment-free synthetic-accessibility proxy on the usual 1 (easy) to 10
/// (hard) scale. The fragment term is replaced by a per-atom commonness
/// score; the complexity penalties (size, stereo, spiro, bridgehead,
/// macrocycle) and the final rescaling follow the standard SA formulation.
fn sa_proxy(g: &MolGraph, rings: &RingSummary) -> f64 {
    let heavy: Vec<usize> = (0..g.n_atoms())
        .filter(|&i| g.atom(i).element != Element::H)
        .collect();
    let n = heavy.len();
    if n == 0 {
        return 1.0;
    }
    let mut small_ring = vec![false; g.n_atoms()];
    let mut ring_count = vec![0usize; g.n_atoms()];
    for r in &rings.basis {
        for &i in r {
            ring_count[i] += 1;
            if r.len() <= 4 {
                small_ring[i] = true;
            }
        }
    }
    let frag: f64 = heavy
        .iter()
        .map(|&i| atom_fragment_score(g, i, &small_ring))
        .sum::<f64>()
        / n as f64;

    let ring_edges: Vec<std::collections::BTreeSet<(usize, usize)>> = rings
        .basis
        .iter()
        .map(|r| {
            (0..r.len())
                .map(|k| {
                    let (x, y) = (r[k], r[(k + 1) % r.len()]);
                    (x.min(y), x.max(y))
                })
                .collect()
        })
        .collect();
    let mut spiro = std::collections::BTreeSet::new();
    let mut bridgehead = std::collections::BTreeSet::new();
    for p in 0..rings.basis.len() {
        for q in p + 1..rings.basis.len() {
            let shared_atoms: Vec<usize> = rings.basis[p]
                .iter()
                .copied()
                .filter(|i| rings.basis[q].contains(i))
                .collect();
            let shared_bonds = ring_edges[p].intersection(&ring_edges[q]).count();
            if shared_atoms.len() == 1 && shared_bonds == 0 {
                spiro.insert(shared_atoms[0]);
            } else if shared_bonds >= 2 {
                for &i in &shared_atoms {
                    let inner = ring_edges[p]
                        .intersection(&ring_edges[q])
                        .filter(|&&(x, y)| x == i || y == i)
                        .count();
                    if inner == 1 {
                        bridgehead.insert(i);
                    }
                }
            }
        }
    }
    let macro_penalty = if rings.total > rings.basis.len() {
        2f64.log10()
    } else {
        0.0
    };
    let nf = n as f64;
    let size_penalty = nf.powf(1.005) - nf;
    let stereo_penalty = ((stereo_centers(g) + 1) as f64).log10();
    let spiro_penalty = ((spiro.len() + 1) as f64).log10();
    let bridge_penalty = ((bridgehead.len() + 1) as f64).log10();
    let raw = frag - size_penalty - stereo_penalty - spiro_penalty - bridge_penalty - macro_penalty;

    let (lo, hi) = (-4.0, 2.5);
    let mut sa = 11.0 - (raw - lo + 1.0) / (hi - lo) * 9.0;
    if sa > 8.0 {
        sa = 8.0 + (sa + 1.0 - 9.0).ln();
    }
    sa.clamp(1.0, 10.0)
}

/// Writes a descriptor table with [`DESCRIPTOR_COLUMNS`] as header.
pub fn write_descriptor_table<W: Write>(
    out: W,
    rows: &[(String, Descriptors)],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DESCRIPTOR_COLUMNS)?;
    for (smiles, d) in rows {
        w.write_record([
            smiles.clone(),
            format!("{:.6}", d.qed),
            format!("{:.6}", d.logp),
            format!("{:.6}", d.sa),
            format!("{:.4}", d.mol_weight),
            format!("{:.4}", d.tpsa),
            d.hbd.to_string(),
            d.hba.to_string(),
            d.rotatable_bonds.to_string(),
            format!("{:.6}", d.fraction_sp3),
            d.n_heavy_atoms.to_string(),
            d.n_hetero.to_string(),
            d.n_rings.to_string(),
            d.n_aromatic_rings.to_string(),
            d.n_aromatic_atoms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
