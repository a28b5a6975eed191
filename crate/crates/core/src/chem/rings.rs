//! Ring perception: bounded simple-cycle enumeration, cyclic-bond detection
//! and a greedy independent ring set used for ring counting.

use super::graph::MolGraph;

pub const MIN_RING: usize = 3;
pub const MAX_RING: usize = 8;

/// All simple cycles of length 3 to 8.
///
/// Each cycle starts at its smallest atom index and runs in the direction of
/// the smaller second atom, which is the lexicographically smallest of its
/// rotations and reflections. Cycles are sorted by length, then
/// lexicographically.
pub fn perceive_rings(g: &MolGraph) -> Vec<Vec<usize>> {
    simple_cycles(
        g.n_atoms(),
        |u| g.neighbors(u).iter().map(|&(v, _)| v),
        MIN_RING,
        MAX_RING,
    )
}

/// Bounded simple-cycle enumeration over an arbitrary adjacency function.
pub fn simple_cycles<F, I>(n: usize, nbrs: F, min_len: usize, max_len: usize) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            let mut v: Vec<usize> = nbrs(u).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut out = Vec::new();
    let mut on_path = vec![false; n];
    let mut path = Vec::with_capacity(max_len);
    for s in 0..n {
        path.push(s);
        on_path[s] = true;
        extend(
            &adj,
            s,
            &mut path,
            &mut on_path,
            min_len.max(3),
            max_len,
            &mut out,
        );
        on_path[s] = false;
        path.pop();
    }
    out.sort_by(|a: &Vec<usize>, b: &Vec<usize>| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn extend(
    adj: &[Vec<usize>],
    s: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    min_len: usize,
    max_len: usize,
    out: &mut Vec<Vec<usize>>,
) {
    let u = *path.last().unwrap();
    for &v in &adj[u] {
        if v == s {
            if path.len() >= min_len && path[1] < path[path.len() - 1] {
                out.push(path.clone());
            }
        } else if v > s && !on_path[v] && path.len() < max_len {
            on_path[v] = true;
            path.push(v);
            extend(adj, s, path, on_path, min_len, max_len, out);
            path.pop();
            on_path[v] = false;
        }
    }
}

/// Flags bonds that lie on any cycle (of any length), i.e. the non-bridges.
pub fn cyclic_bonds(g: &MolGraph) -> Vec<bool> {
    let n = g.n_atoms();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; g.n_bonds()];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Iterative DFS: (atom, bond used to enter, next neighbour slot).
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, via, ref mut slot)) = stack.last_mut() {
            if let Some(&(v, b)) = g.neighbors(u).get(*slot) {
                *slot += 1;
                if b == via {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, b, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge.iter().map(|&b| !b).collect()
}

/// Cyclomatic number `E - V + C`, the size of any cycle basis.
pub fn cycle_rank(g: &MolGraph) -> usize {
    (g.n_bonds() + g.components().len()).saturating_sub(g.n_atoms())
}

/// Greedily picks cycles that are independent over GF(2) edge incidence.
/// Candidates are visited in the given order, so shorter or preferred rings
/// should come first.
pub fn independent_cycles(g: &MolGraph, candidates: &[Vec<usize>]) -> Vec<usize> {
    let m = g.n_bonds();
    let words = m.div_ceil(64).max(1);
    // Row-echelon basis keyed by pivot bit.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut chosen = Vec::new();
    for (ci, cyc) in candidates.iter().enumerate() {
        let mut v = vec![0u64; words];
        for k in 0..cyc.len() {
            let (a, b) = (cyc[k], cyc[(k + 1) % cyc.len()]);
            if let Some(bi) = g.bond_between(a, b) {
                v[bi / 64] ^= 1 << (bi % 64);
            }
        }
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x ^= y;
                }
            }
        }
        if let Some(pivot) = first_bit(&v) {
            // Keep the basis reduced so pivots stay unique.
            for (_, row) in basis.iter_mut() {
                if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                    for (x, y) in row.iter_mut().zip(&v) {
                        *x ^= y;
                    }
                }
            }
            basis.push((pivot, v));
            chosen.push(ci);
        }
    }
    chosen
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    #[test]
    fn cyclohexane_has_one_ring() {
        let g = parse_smiles("C1CCCCC1").unwrap();
        assert_eq!(perceive_rings(&g), vec![vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn fused_bicycle_reports_two_six_rings() {
        let g = parse_smiles("C1CCC2CCCCC2C1").unwrap();
        let rings = perceive_rings(&g);
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 6));
        assert_eq!(cycle_rank(&g), 2);
    }

    #[test]
    fn bicyclobutane_perimeter_is_within_bound() {
        // Two fused 3-rings share an edge; the 4-cycle perimeter also counts.
        let g = parse_smiles("C1C2CC12").unwrap();
        let rings = perceive_rings(&g);
        assert_eq!(rings.iter().filter(|r| r.len() == 3).count(), 2);
        assert_eq!(rings.iter().filter(|r| r.len() == 4).count(), 1);
        assert_eq!(independent_cycles(&g, &rings).len(), 2);
    }

    #[test]
    fn bridges_are_not_cyclic() {
        let g = parse_smiles("C1CC1CC1CC1").unwrap();
        let cyc = cyclic_bonds(&g);
        let bridge_count = cyc.iter().filter(|c| !**c).count();
        assert_eq!(bridge_count, 2);
    }
}
