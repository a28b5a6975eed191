//! Topological polar surface area from Ertl's N/O fragment contributions.

use super::element::Element;
use super::graph::{BondOrder, MolGraph};
use super::rings::perceive_rings;

struct Env {
    nbrs: u32,
    h: u32,
    single: u32,
    double: u32,
    arom: u32,
    in3: bool,
}

fn env(g: &MolGraph, i: usize, three_ring: &[bool]) -> Env {
    let mut e = Env {
        nbrs: 0,
        h: g.total_hydrogens(i),
        single: 0,
        double: 0,
        arom: 0,
        in3: three_ring[i],
    };
    for &(v, b) in g.neighbors(i) {
        if g.atom(v).element == Element::H {
            continue;
        }
        e.nbrs += 1;
        let bond = g.bond(b);
        if bond.aromatic {
            e.arom += 1;
        } else if bond.order == BondOrder::Double {
            e.double += 1;
        } else {
            e.single += 1;
        }
    }
    e
}

fn nitrogen(e: &Env) -> f64 {
    let v = match (e.nbrs, e.h) {
        (1, 1) if e.double == 1 => Some(23.85),
        (1, 2) if e.single == 1 => Some(26.02),
        (2, 0) if e.single == 1 && e.double == 1 => Some(12.36),
        (2, 1) if e.single == 2 && e.in3 => Some(21.94),
        (2, 1) if e.single == 2 => Some(12.03),
        (2, 0) if e.arom == 2 => Some(12.89),
        (2, 1) if e.arom == 2 => Some(15.79),
        (3, 0) if e.single == 3 && e.in3 => Some(3.01),
        (3, 0) if e.single == 3 => Some(3.24),
        (3, 0) if e.single == 1 && e.double == 2 => Some(11.68),
        (3, 0) if e.arom == 3 => Some(4.41),
        (3, 0) if e.single == 1 && e.arom == 2 => Some(4.93),
        (3, 0) if e.double == 1 && e.arom == 2 => Some(8.39),
        _ => None,
    };
    v.unwrap_or_else(|| (30.5 - e.nbrs as f64 * 8.2 + e.h as f64 * 1.5).max(0.0))
}

fn oxygen(e: &Env) -> f64 {
    let v = match (e.nbrs, e.h) {
        (1, 0) if e.double == 1 => Some(17.07),
        (1, 1) if e.single == 1 => Some(20.23),
        (2, 0) if e.single == 2 && e.in3 => Some(12.53),
        (2, 0) if e.single == 2 => Some(9.23),
        (2, 0) if e.arom == 2 => Some(13.14),
        _ => None,
    };
    v.unwrap_or_else(|| (28.5 - e.nbrs as f64 * 8.6 + e.h as f64 * 1.5).max(0.0))
}

pub fn tpsa(g: &MolGraph) -> f64 {
    let mut three_ring = vec![false; g.n_atoms()];
    for r in perceive_rings(g).iter().filter(|r| r.len() == 3) {
        for &i in r {
            three_ring[i] = true;
        }
    }
    (0..g.n_atoms())
        .map(|i| match g.atom(i).element {
            Element::N => nitrogen(&env(g, i, &three_ring)),
            Element::O => oxygen(&env(g, i, &three_ring)),
            _ => 0.0,
        })
        .sum()
}
