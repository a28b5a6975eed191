//! Backtracking subgraph matcher for alert patterns written as SMILES.
//!
//! Pattern atoms match target atoms of the same element and aromaticity;
//! pattern bonds match target bonds of the same type (aromatic, single or
//! double). Pattern hydrogens are not constrained.

use super::graph::MolGraph;

pub fn has_substructure(target: &MolGraph, pattern: &MolGraph) -> bool {
    if pattern.is_empty() {
        return true;
    }
    if pattern.n_atoms() > target.n_atoms() {
        return false;
    }
    let order = match_order(pattern);
    let mut map = vec![usize::MAX; pattern.n_atoms()];
    let mut used = vec![false; target.n_atoms()];
    extend(target, pattern, &order, 0, &mut map, &mut used)
}

fn match_order(p: &MolGraph) -> Vec<usize> {
    let mut seen = vec![false; p.n_atoms()];
    let mut order = Vec::with_capacity(p.n_atoms());
    for s in 0..p.n_atoms() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, _) in p.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

fn compatible(t: &MolGraph, p: &MolGraph, ti: usize, pi: usize) -> bool {
    let (ta, pa) = (t.atom(ti), p.atom(pi));
    ta.element == pa.element && ta.aromatic == pa.aromatic && t.degree(ti) >= p.degree(pi)
}

fn extend(
    t: &MolGraph,
    p: &MolGraph,
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let pu = order[depth];
    for tu in 0..t.n_atoms() {
        if used[tu] || !compatible(t, p, tu, pu) {
            continue;
        }
        let bonds_ok = p.neighbors(pu).iter().all(|&(pv, pb)| {
            let tv = map[pv];
            if tv == usize::MAX {
                return true;
            }
            match t.bond_between(tu, tv) {
                Some(tb) => t.bond(tb).type_code() == p.bond(pb).type_code(),
                None => false,
            }
        });
        if !bonds_ok {
            continue;
        }
        map[pu] = tu;
        used[tu] = true;
        if extend(t, p, order, depth + 1, map, used) {
            return true;
        }
        map[pu] = usize::MAX;
        used[tu] = false;
    }
    false
}
