use super::graph::MolGraph;
use super::sanitize::sanitize;

/// Bemis–Murcko scaffold: repeatedly strips degree-1 atoms that are not on a
/// ring. Acyclic molecules reduce to the empty graph.
pub fn murcko_scaffold(g: &MolGraph) -> MolGraph {
    let n = g.n_atoms();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let in_ring: Vec<bool> = (0..n).map(|i| g.atom_in_ring(i)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| degree[i] <= 1 && !in_ring[i]).collect();
    while let Some(u) = stack.pop() {
        if !alive[u] {
            continue;
        }
        alive[u] = false;
        for &(v, _) in g.neighbors(u) {
            if alive[v] {
                degree[v] -= 1;
                if degree[v] <= 1 && !in_ring[v] {
                    stack.push(v);
                }
            }
        }
    }
    if !alive.iter().any(|&a| a) {
        return MolGraph::new();
    }
    let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let sub = g.subgraph(&keep);
    sanitize(&sub).unwrap_or(sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{canonical_smiles, mol_from_smiles};

    fn scaffold(s: &str) -> String {
        canonical_smiles(&murcko_scaffold(&mol_from_smiles(s).unwrap()))
    }

    #[test]
    fn toluene_to_benzene() {
        assert_eq!(scaffold("Cc1ccccc1"), "c1ccccc1");
    }

    #[test]
    fn acyclic_is_empty() {
        assert_eq!(scaffold("CCO"), "");
    }

    #[test]
    fn linker_between_rings_is_kept() {
        assert_eq!(scaffold("c1ccccc1CCC1CC1"), scaffold("C1CC1CCc1ccccc1"));
        assert_eq!(
            murcko_scaffold(&mol_from_smiles("c1ccccc1CCC1CC1O").unwrap()).n_atoms(),
            11
        );
    }
}
