//! Canonical SMILES.
//!
//! Atom classes start from `(element, degree, implicit H, aromatic)` and are
//! refined by neighbour classes until stable. Remaining ties are broken by
//! individualizing each member of the first tied class in turn; the
//! lexicographically smallest string over all leaves of that search wins.
//! The search is capped at [`LEAF_BUDGET`] leaves, after which the first
//! member of each tied class is taken.

use super::element::Element;
use super::graph::{BondOrder, MolGraph};

pub const LEAF_BUDGET: usize = 512;

/// Canonical SMILES of a sanitized graph. The empty graph maps to `""`.
pub fn canonical_smiles(g: &MolGraph) -> String {
    if g.is_empty() {
        return String::new();
    }
    let mut best: Option<(String, Vec<u32>)> = None;
    let mut leaves = 0;
    search_ranks(g, initial_classes(g), &mut leaves, &mut best);
    best.expect("search visits at least one leaf").0
}

/// Canonical atom ranks (a permutation of `0..n`) matching [`canonical_smiles`].
pub fn canonical_ranks(g: &MolGraph) -> Vec<usize> {
    if g.is_empty() {
        return Vec::new();
    }
    let mut best: Option<(String, Vec<u32>)> = None;
    let mut leaves = 0;
    search_ranks(g, initial_classes(g), &mut leaves, &mut best);
    best.map(|(_, r)| r.into_iter().map(|x| x as usize).collect())
        .unwrap_or_default()
}

/// Refined atom classes without tie breaking; atoms sharing a class are
/// indistinguishable by their environments.
pub(crate) fn symmetry_classes(g: &MolGraph) -> Vec<u32> {
    refine(g, initial_classes(g))
}

fn initial_classes(g: &MolGraph) -> Vec<u32> {
    let keys: Vec<(u8, usize, u8, bool)> = (0..g.n_atoms())
        .map(|i| {
            let a = g.atom(i);
            (
                a.element.atomic_number(),
                g.degree(i),
                a.implicit_hydrogens,
                a.aromatic,
            )
        })
        .collect();
    dense_rank(&keys)
}

fn dense_rank<T: Ord + Clone>(keys: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present") as u32)
        .collect()
}

fn count_distinct(c: &[u32]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

fn refine(g: &MolGraph, mut classes: Vec<u32>) -> Vec<u32> {
    let mut distinct = count_distinct(&classes);
    loop {
        let sigs: Vec<(u32, Vec<(u8, u32)>)> = (0..g.n_atoms())
            .map(|i| {
                let mut nb: Vec<(u8, u32)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(v, b)| (g.bond(b).type_code(), classes[v]))
                    .collect();
                nb.sort_unstable();
                (classes[i], nb)
            })
            .collect();
        let next = dense_rank(&sigs);
        let d = count_distinct(&next);
        classes = next;
        if d == distinct {
            return classes;
        }
        distinct = d;
    }
}

fn first_tied_class(classes: &[u32]) -> Option<(u32, Vec<usize>)> {
    let mut counts = vec![0usize; classes.len()];
    for &c in classes {
        counts[c as usize] += 1;
    }
    let c = counts.iter().position(|&k| k > 1)? as u32;
    let members = (0..classes.len()).filter(|&i| classes[i] == c).collect();
    Some((c, members))
}

fn individualize(classes: &[u32], c: u32, pick: usize) -> Vec<u32> {
    classes
        .iter()
        .enumerate()
        .map(|(i, &k)| 2 * k + u32::from(k == c && i != pick))
        .collect()
}

fn search_ranks(
    g: &MolGraph,
    classes: Vec<u32>,
    leaves: &mut usize,
    best: &mut Option<(String, Vec<u32>)>,
) {
    let classes = refine(g, classes);
    match first_tied_class(&classes) {
        None => {
            *leaves += 1;
            let s = write_smiles(g, &classes);
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                *best = Some((s, classes));
            }
        }
        Some((c, members)) => {
            for (k, &m) in members.iter().enumerate() {
                if k > 0 && *leaves >= LEAF_BUDGET {
                    break;
                }
                search_ranks(g, individualize(&classes, c, m), leaves, best);
            }
        }
    }
}

fn atom_symbol(g: &MolGraph, i: usize) -> &'static str {
    let a = g.atom(i);
    match (a.element, a.aromatic) {
        (Element::H, _) => "[H]",
        (Element::C, true) => "c",
        (Element::N, true) => "n",
        (Element::O, true) => "o",
        (e, _) => e.symbol(),
    }
}

fn bond_symbol(g: &MolGraph, b: usize) -> &'static str {
    let bond = g.bond(b);
    if bond.aromatic {
        ""
    } else if bond.order == BondOrder::Double {
        "="
    } else if g.atom(bond.a).aromatic && g.atom(bond.b).aromatic {
        "-"
    } else {
        ""
    }
}

fn ring_label(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

struct Plan {
    children: Vec<Vec<(usize, usize)>>,
    // Ring closures opened at an atom: (closing atom, bond).
    opens: Vec<Vec<(usize, usize)>>,
    // Ring closures closed at an atom: (opening atom, bond).
    closes: Vec<Vec<(usize, usize)>>,
}

/// Writes SMILES for a total atom order given by distinct `rank` values.
pub(crate) fn write_smiles(g: &MolGraph, rank: &[u32]) -> String {
    let n = g.n_atoms();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| rank[i]);
    let sorted_nbrs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|u| {
            let mut v = g.neighbors(u).to_vec();
            v.sort_by_key(|&(x, _)| rank[x]);
            v
        })
        .collect();

    let mut plan = Plan {
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
    };
    let mut visited = vec![false; n];
    let mut bond_seen = vec![false; g.n_bonds()];
    let mut roots = Vec::new();
    for &s in &order {
        if visited[s] {
            continue;
        }
        roots.push(s);
        plan_dfs(
            s,
            usize::MAX,
            &sorted_nbrs,
            &mut visited,
            &mut bond_seen,
            &mut plan,
        );
    }

    let mut out = String::new();
    let mut open_digits: Vec<Option<usize>> = vec![None; g.n_bonds()];
    let mut in_use = vec![false; 100];
    for (k, &r) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        emit(g, r, None, &plan, &mut open_digits, &mut in_use, &mut out);
    }
    out
}

fn plan_dfs(
    u: usize,
    via: usize,
    nbrs: &[Vec<(usize, usize)>],
    visited: &mut [bool],
    bond_seen: &mut [bool],
    plan: &mut Plan,
) {
    visited[u] = true;
    if via != usize::MAX {
        bond_seen[via] = true;
    }
    for &(v, b) in &nbrs[u] {
        if b == via || bond_seen[b] {
            continue;
        }
        if visited[v] {
            bond_seen[b] = true;
            plan.opens[v].push((u, b));
            plan.closes[u].push((v, b));
        } else {
            plan.children[u].push((v, b));
            plan_dfs(v, b, nbrs, visited, bond_seen, plan);
        }
    }
}

fn emit(
    g: &MolGraph,
    u: usize,
    via: Option<usize>,
    plan: &Plan,
    open_digits: &mut [Option<usize>],
    in_use: &mut [bool],
    out: &mut String,
) {
    if let Some(b) = via {
        out.push_str(bond_symbol(g, b));
    }
    out.push_str(atom_symbol(g, u));
    let mut closed_here = Vec::new();
    for &(_, b) in &plan.closes[u] {
        let d = open_digits[b].take().expect("ring closure was opened");
        out.push_str(&ring_label(d));
        closed_here.push(d);
    }
    for &(_, b) in &plan.opens[u] {
        let d = (1..in_use.len())
            .find(|&d| !in_use[d] && !closed_here.contains(&d))
            .expect("fewer than 99 simultaneous ring closures");
        in_use[d] = true;
        open_digits[b] = Some(d);
        out.push_str(bond_symbol(g, b));
        out.push_str(&ring_label(d));
    }
    for d in closed_here {
        in_use[d] = false;
    }
    let kids = &plan.children[u];
    for (k, &(v, b)) in kids.iter().enumerate() {
        if k + 1 < kids.len() {
            out.push('(');
            emit(g, v, Some(b), plan, open_digits, in_use, out);
            out.push(')');
        } else {
            emit(g, v, Some(b), plan, open_digits, in_use, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::mol_from_smiles;

    fn canon(s: &str) -> String {
        canonical_smiles(&mol_from_smiles(s).unwrap())
    }

    #[test]
    fn small_fixed_outputs() {
        assert_eq!(canon("C"), "C");
        assert_eq!(canon("c1ccccc1"), "c1ccccc1");
        assert_eq!(canon("C1=CC=CC=C1"), "c1ccccc1");
        assert_eq!(canon("C1CC1"), "C1CC1");
    }

    #[test]
    fn equivalent_inputs_agree() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C(C)(C)O"), canon("CC(O)C"));
        assert_eq!(canon("c1ccncc1"), canon("n1ccccc1"));
        assert_eq!(canon("Cc1ccccc1"), canon("c1ccc(C)cc1"));
    }

    #[test]
    fn biphenyl_keeps_explicit_link() {
        let s = canon("c1ccccc1-c1ccccc1");
        assert!(s.contains('-'), "{s}");
        assert_eq!(canon(&s), s);
    }

    #[test]
    fn fragments_joined_with_dot() {
        let s = canon("O.C");
        assert_eq!(s.split('.').count(), 2);
        assert_eq!(canon(&s), s);
    }

    #[test]
    fn ranks_are_a_permutation() {
        let g = mol_from_smiles("CC(=O)Nc1ccccc1").unwrap();
        let mut r = canonical_ranks(&g);
        r.sort_unstable();
        assert_eq!(r, (0..g.n_atoms()).collect::<Vec<_>>());
    }
}
