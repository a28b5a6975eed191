use super::element::Element;
use super::ChemError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single = 1,
    Double = 2,
}

impl BondOrder {
    pub fn value(self) -> u32 {
        self as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub aromatic: bool,
    pub implicit_hydrogens: u8,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom {
            element,
            formal_charge: 0,
            aromatic: false,
            implicit_hydrogens: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub aromatic: bool,
    pub in_ring: bool,
    pub conjugated: bool,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }

    /// Bond type used by canonicalization and hashing: aromatic bonds form
    /// their own class regardless of the stored Kekulé order.
    pub fn type_code(&self) -> u8 {
        if self.aromatic {
            4
        } else {
            self.order.value() as u8
        }
    }
}

/// Undirected molecular graph with heavy atoms as nodes.
///
/// Hydrogens are implicit unless an explicit `H` atom is added. Instances
/// produced by [`super::sanitize`] carry resolved hydrogen counts and ring,
/// aromaticity and conjugation flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adj: Vec<Vec<(usize, usize)>>,
    sanitized: bool,
}

impl MolGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, element: Element) -> usize {
        self.push_atom(Atom::new(element))
    }

    pub fn push_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adj.push(Vec::new());
        self.sanitized = false;
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, ChemError> {
        self.push_bond(a, b, order, false)
    }

    pub fn push_bond(
        &mut self,
        a: usize,
        b: usize,
        order: BondOrder,
        aromatic: bool,
    ) -> Result<usize, ChemError> {
        let n = self.atoms.len();
        if a >= n || b >= n {
            return Err(ChemError::InvalidGraph(format!(
                "bond ({a},{b}) references a missing atom"
            )));
        }
        if a == b {
            return Err(ChemError::InvalidGraph(format!("self-loop on atom {a}")));
        }
        if self.bond_between(a, b).is_some() {
            return Err(ChemError::InvalidGraph(format!("duplicate bond ({a},{b})")));
        }
        let idx = self.bonds.len();
        self.bonds.push(Bond {
            a,
            b,
            order,
            aromatic,
            in_ring: false,
            conjugated: false,
        });
        self.adj[a].push((b, idx));
        self.adj[b].push((a, idx));
        self.sanitized = false;
        Ok(idx)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn n_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(neighbour, bond index)` pairs in insertion order.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj
            .get(a)?
            .iter()
            .find(|&&(nb, _)| nb == b)
            .map(|&(_, idx)| idx)
    }

    pub fn is_sanitized(&self) -> bool {
        self.sanitized
    }

    pub fn atom_in_ring(&self, i: usize) -> bool {
        self.adj[i].iter().any(|&(_, b)| self.bonds[b].in_ring)
    }

    pub fn total_hydrogens(&self, i: usize) -> u32 {
        let explicit = self.adj[i]
            .iter()
            .filter(|&&(nb, _)| self.atoms[nb].element == Element::H)
            .count() as u32;
        explicit + self.atoms[i].implicit_hydrogens as u32
    }

    /// Heavy-atom neighbour count.
    pub fn heavy_degree(&self, i: usize) -> usize {
        self.adj[i]
            .iter()
            .filter(|&&(nb, _)| self.atoms[nb].element != Element::H)
            .count()
    }

    pub fn has_double_bond(&self, i: usize) -> bool {
        self.adj[i]
            .iter()
            .any(|&(_, b)| !self.bonds[b].aromatic && self.bonds[b].order == BondOrder::Double)
    }

    pub fn has_aromatic_bond(&self, i: usize) -> bool {
        self.adj[i].iter().any(|&(_, b)| self.bonds[b].aromatic)
    }

    /// Explicit valence with aromatic bonds sharing one extra unit of
    /// π valence per atom: `s + a + 1` for `a >= 2` aromatic bonds, where
    /// `s` sums the remaining bond orders.
    pub fn explicit_valence(&self, i: usize) -> u32 {
        let mut s = 0;
        let mut a = 0;
        for &(_, b) in &self.adj[i] {
            let bond = &self.bonds[b];
            if bond.aromatic {
                a += 1;
            } else {
                s += bond.order.value();
            }
        }
        if a >= 2 {
            s + a + 1
        } else {
            s + a
        }
    }

    pub(crate) fn atoms_mut(&mut self) -> &mut [Atom] {
        self.sanitized = false;
        &mut self.atoms
    }

    pub(crate) fn bonds_mut(&mut self) -> &mut [Bond] {
        self.sanitized = false;
        &mut self.bonds
    }

    pub(crate) fn set_sanitized(&mut self, v: bool) {
        self.sanitized = v;
    }

    /// Induced subgraph on `keep` (ascending atom order preserved).
    pub fn subgraph(&self, keep: &[usize]) -> MolGraph {
        let mut map = vec![usize::MAX; self.atoms.len()];
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut g = MolGraph::new();
        for &i in &sorted {
            map[i] = g.push_atom(self.atoms[i].clone());
        }
        for bond in &self.bonds {
            let (a, b) = (map[bond.a], map[bond.b]);
            if a != usize::MAX && b != usize::MAX {
                let idx = g
                    .push_bond(a, b, bond.order, bond.aromatic)
                    .expect("subgraph of a valid graph is valid");
                g.bonds[idx].in_ring = bond.in_ring;
                g.bonds[idx].conjugated = bond.conjugated;
            }
        }
        g
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Relabel atoms so that old atom `perm[k]` becomes new atom `k`.
    /// Bond insertion order follows the new labels.
    pub fn permuted(&self, perm: &[usize]) -> MolGraph {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length mismatch");
        let mut inv = vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut g = MolGraph::new();
        for &old in perm {
            g.push_atom(self.atoms[old].clone());
        }
        let mut bonds: Vec<&Bond> = self.bonds.iter().collect();
        bonds.sort_by_key(|b| {
            let (x, y) = (inv[b.a], inv[b.b]);
            (x.min(y), x.max(y))
        });
        for bond in bonds {
            let idx = g
                .push_bond(inv[bond.a], inv[bond.b], bond.order, bond.aromatic)
                .expect("permutation of a valid graph is valid");
            g.bonds[idx].in_ring = bond.in_ring;
            g.bonds[idx].conjugated = bond.conjugated;
        }
        g.sanitized = self.sanitized;
        g
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms
            .iter()
            .filter(|a| a.element != Element::H)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_duplicates() {
        let mut g = MolGraph::new();
        let a = g.add_atom(Element::C);
        let b = g.add_atom(Element::C);
        assert!(g.add_bond(a, a, BondOrder::Single).is_err());
        g.add_bond(a, b, BondOrder::Single).unwrap();
        assert!(g.add_bond(b, a, BondOrder::Double).is_err());
        assert!(g.add_bond(a, 7, BondOrder::Single).is_err());
    }

    #[test]
    fn aromatic_valence_counts_one_shared_unit() {
        let mut g = MolGraph::new();
        for _ in 0..3 {
            g.add_atom(Element::C);
        }
        g.push_bond(0, 1, BondOrder::Single, true).unwrap();
        g.push_bond(1, 2, BondOrder::Single, true).unwrap();
        assert_eq!(g.explicit_valence(1), 3);
        assert_eq!(g.explicit_valence(0), 1);
    }

    #[test]
    fn permutation_preserves_bond_set() {
        let mut g = MolGraph::new();
        for e in [Element::C, Element::O, Element::N] {
            g.add_atom(e);
        }
        g.add_bond(0, 1, BondOrder::Double).unwrap();
        g.add_bond(0, 2, BondOrder::Single).unwrap();
        let p = g.permuted(&[2, 0, 1]);
        assert_eq!(p.atom(0).element, Element::N);
        let b = p.bond_between(1, 2).unwrap();
        assert_eq!(p.bond(b).order, BondOrder::Double);
        assert!(p.bond_between(0, 1).is_some());
    }
}
