use serde::{Deserialize, Serialize};

/// Elements supported by the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    C,
    N,
    O,
    F,
    H,
}

impl Element {
    pub const HEAVY: [Element; 4] = [Element::C, Element::N, Element::O, Element::F];

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::H => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::H => "H",
        }
    }

    /// Standard atomic weight in g/mol.
    pub fn weight(self) -> f64 {
        match self {
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::H => 1.008,
        }
    }

    /// Largest valence accepted by sanitization.
    pub fn max_valence(self) -> u32 {
        match self {
            Element::C => 4,
            Element::N => 3,
            Element::O => 2,
            Element::F | Element::H => 1,
        }
    }

    /// Valence used to fill implicit hydrogens.
    pub fn default_valence(self) -> u32 {
        self.max_valence()
    }

    pub fn is_hetero(self) -> bool {
        !matches!(self, Element::C | Element::H)
    }

    /// Elements that may carry an aromatic flag.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self, Element::C | Element::N | Element::O)
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}
