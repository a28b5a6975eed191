//! Small cheminformatics kernel over the C/N/O/F/H alphabet.

mod aromatic;
mod canon;
mod crippen;
mod descriptors;
mod element;
mod fingerprint;
mod graph;
mod rings;
mod sanitize;
mod scaffold;
mod smiles;
mod substructure;
mod tpsa;

pub use aromatic::perceive_aromaticity;
pub use canon::{canonical_ranks, canonical_smiles, LEAF_BUDGET};
pub use crippen::{crippen_contribs, crippen_logp};
pub use descriptors::{
    compute_descriptors, compute_descriptors_with, fraction_sp3, h_bond_acceptors, h_bond_donors,
    mol_weight, qed_acceptors, qed_from_properties, rotatable_bonds, write_descriptor_table,
    Descriptors, QedAlerts, QedProperties, DESCRIPTOR_COLUMNS,
};
pub use element::Element;
pub use fingerprint::{morgan_fingerprint, tanimoto, Fingerprint, DEFAULT_RADIUS, DEFAULT_WIDTH};
pub use graph::{Atom, Bond, BondOrder, MolGraph};
pub use rings::{
    cycle_rank, cyclic_bonds, independent_cycles, perceive_rings, simple_cycles, MAX_RING, MIN_RING,
};
pub use sanitize::{mol_from_smiles, sanitize};
pub use scaffold::murcko_scaffold;
pub use smiles::{parse_smiles, read_smiles_lines};
pub use substructure::has_substructure;
pub use tpsa::tpsa;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChemError {
    #[error("SMILES syntax error at byte {offset}: {reason}")]
    Syntax { offset: usize, reason: String },
    #[error("atom {atom} has valence {valence}, above its maximum {max}")]
    Valence { atom: usize, valence: u32, max: u32 },
    #[error("atom {atom} is flagged aromatic but sits on no aromatic ring")]
    Aromaticity { atom: usize },
    #[error("fingerprint widths differ: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}
