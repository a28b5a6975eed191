use super::aromatic::perceive_aromaticity;
use super::graph::MolGraph;
use super::smiles::parse_smiles;
use super::ChemError;

/// Resolve aromaticity, ring/conjugation flags and implicit hydrogens.
///
/// Fails with [`ChemError::Aromaticity`] when an atom written as aromatic
/// does not sit on a qualifying ring, and with [`ChemError::Valence`] when an
/// atom exceeds its maximum valence. Sanitizing a sanitized graph is a no-op.
pub fn sanitize(g: &MolGraph) -> Result<MolGraph, ChemError> {
    let mut out = perceive_aromaticity(g);
    for i in 0..g.n_atoms() {
        if g.atom(i).aromatic && !out.atom(i).aromatic {
            return Err(ChemError::Aromaticity { atom: i });
        }
    }
    for i in 0..out.n_atoms() {
        let atom = out.atom(i);
        if atom.formal_charge != 0 {
            return Err(ChemError::InvalidGraph(format!(
                "charged atom {i} is not supported"
            )));
        }
        let valence = out.explicit_valence(i);
        let max = atom.element.max_valence();
        if valence > max {
            return Err(ChemError::Valence {
                atom: i,
                valence,
                max,
            });
        }
        let h = atom.element.default_valence().saturating_sub(valence);
        out.atoms_mut()[i].implicit_hydrogens = h as u8;
    }
    out.set_sanitized(true);
    Ok(out)
}

/// Parse and sanitize in one step.
pub fn mol_from_smiles(s: &str) -> Result<MolGraph, ChemError> {
    sanitize(&parse_smiles(s)?)
}
