//! Flag-based aromaticity on six-membered C/N rings.
//!
//! A ring qualifies when every member is C or N with degree at most 3, every
//! member donates to the π system and the donor count is exactly six.
//! Carbon donates one electron when it carries a double or aromatic bond;
//! nitrogen donates one when it carries a hydrogen, a double bond or an
//! aromatic bond and two otherwise. Kekulé bond orders are left untouched;
//! valence of flagged atoms follows [`MolGraph::explicit_valence`].

use super::element::Element;
use super::graph::{BondOrder, MolGraph};
use super::rings::{cyclic_bonds, perceive_rings};

fn pi_electrons(g: &MolGraph, i: usize) -> u32 {
    let atom = g.atom(i);
    let unsaturated = g.has_double_bond(i) || g.has_aromatic_bond(i);
    match atom.element {
        Element::C => u32::from(unsaturated),
        Element::N => {
            let sum: u32 = g
                .neighbors(i)
                .iter()
                .map(|&(_, b)| g.bond(b).order.value())
                .sum();
            let has_h = sum < Element::N.default_valence();
            if unsaturated || has_h {
                1
            } else {
                2
            }
        }
        _ => 0,
    }
}

fn ring_qualifies(g: &MolGraph, ring: &[usize]) -> bool {
    if ring.len() != 6 {
        return false;
    }
    let mut total = 0;
    for &i in ring {
        if !matches!(g.atom(i).element, Element::C | Element::N) || g.degree(i) > 3 {
            return false;
        }
        let e = pi_electrons(g, i);
        if e == 0 {
            return false;
        }
        total += e;
    }
    total == 6
}

fn ring_bonds(g: &MolGraph, ring: &[usize]) -> Vec<usize> {
    (0..ring.len())
        .map(|k| {
            g.bond_between(ring[k], ring[(k + 1) % ring.len()])
                .expect("ring edges exist")
        })
        .collect()
}

/// Returns a copy with aromatic flags re-perceived from scratch, plus fresh
/// ring and conjugation flags on bonds.
pub fn perceive_aromaticity(g: &MolGraph) -> MolGraph {
    let rings: Vec<Vec<usize>> = perceive_rings(g)
        .into_iter()
        .filter(|r| ring_qualifies(g, r))
        .collect();
    let ring_bond_sets: Vec<Vec<usize>> = rings.iter().map(|r| ring_bonds(g, r)).collect();
    let mut active = vec![true; rings.len()];

    // Drop rings whose flagging would push a member past its maximum valence
    // (for example a ring carbon that also has an exocyclic double bond).
    loop {
        let mut aromatic_bond = vec![false; g.n_bonds()];
        for (k, bonds) in ring_bond_sets.iter().enumerate() {
            if active[k] {
                for &b in bonds {
                    aromatic_bond[b] = true;
                }
            }
        }
        let mut bad = vec![false; g.n_atoms()];
        for (i, flag) in bad.iter_mut().enumerate() {
            let mut s = 0;
            let mut a = 0;
            for &(_, b) in g.neighbors(i) {
                if aromatic_bond[b] {
                    a += 1;
                } else {
                    s += g.bond(b).order.value();
                }
            }
            let v = if a >= 2 { s + a + 1 } else { s + a };
            *flag = a > 0 && v > g.atom(i).element.max_valence();
        }
        let mut changed = false;
        for (k, ring) in rings.iter().enumerate() {
            if active[k] && ring.iter().any(|&i| bad[i]) {
                active[k] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = g.clone();
    for atom in out.atoms_mut() {
        atom.aromatic = false;
    }
    for bond in out.bonds_mut() {
        bond.aromatic = false;
    }
    for (k, ring) in rings.iter().enumerate() {
        if !active[k] {
            continue;
        }
        for &i in ring {
            out.atoms_mut()[i].aromatic = true;
        }
        for &b in &ring_bond_sets[k] {
            out.bonds_mut()[b].aromatic = true;
        }
    }
    refresh_bond_flags(&mut out);
    out
}

/// Recomputes `in_ring` and `conjugated` on every bond.
///
/// A single bond is conjugated when both ends carry another double or
/// aromatic bond; a double bond is conjugated when it touches a conjugated
/// single bond; aromatic bonds are always conjugated.
pub(crate) fn refresh_bond_flags(g: &mut MolGraph) {
    let cyclic = cyclic_bonds(g);
    let unsaturated: Vec<bool> = (0..g.n_atoms())
        .map(|i| g.has_double_bond(i) || g.has_aromatic_bond(i))
        .collect();
    let mut conj = vec![false; g.n_bonds()];
    for (bi, bond) in g.bonds().iter().enumerate() {
        if bond.aromatic {
            conj[bi] = true;
        } else if bond.order == BondOrder::Single {
            conj[bi] = unsaturated[bond.a] && unsaturated[bond.b];
        }
    }
    let singles = conj.clone();
    for (bi, bond) in g.bonds().iter().enumerate() {
        if !bond.aromatic && bond.order == BondOrder::Double {
            conj[bi] = [bond.a, bond.b].iter().any(|&x| {
                g.neighbors(x)
                    .iter()
                    .any(|&(_, ob)| ob != bi && singles[ob] && !g.bond(ob).aromatic)
            }) || [bond.a, bond.b].iter().any(|&x| g.has_aromatic_bond(x));
        }
    }
    for (bi, bond) in g.bonds_mut().iter_mut().enumerate() {
        bond.in_ring = cyclic[bi];
        bond.conjugated = conj[bi];
    }
}
