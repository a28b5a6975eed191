//! Morgan (circular) fingerprints folded into fixed-width bit vectors.

use serde::{Deserialize, Serialize};

use super::graph::MolGraph;
use super::ChemError;

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_WIDTH: usize = 2048;

/// Fixed-width bit vector. Serialized as a lowercase hex string, most
/// significant word first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    width: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn zeros(width: usize) -> Self {
        Fingerprint {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} out of range");
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && (self.words[bit / 64] >> (bit % 64)) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> Vec<usize> {
        (0..self.width).filter(|&b| self.get(b)).collect()
    }

    pub fn intersection_count(&self, other: &Fingerprint) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Dense 0/1 vector for embedding in real-valued spaces.
    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.width)
            .map(|b| if self.get(b) { 1.0 } else { 0.0 })
            .collect()
    }

    pub fn to_hex(&self) -> String {
        self.words
            .iter()
            .rev()
            .map(|w| format!("{w:016x}"))
            .collect()
    }

    pub fn from_hex(width: usize, hex: &str) -> Result<Self, ChemError> {
        let n_words = width.div_ceil(64);
        if hex.len() != n_words * 16 {
            return Err(ChemError::InvalidGraph(format!(
                "hex fingerprint has {} digits, expected {}",
                hex.len(),
                n_words * 16
            )));
        }
        let mut words = Vec::with_capacity(n_words);
        for k in (0..n_words).rev() {
            let chunk = &hex[k * 16..k * 16 + 16];
            let w = u64::from_str_radix(chunk, 16)
                .map_err(|e| ChemError::InvalidGraph(format!("bad hex fingerprint: {e}")))?;
            words.push(w);
        }
        let fp = Fingerprint { width, words };
        if (width..n_words * 64).any(|b| (fp.words[b / 64] >> (b % 64)) & 1 == 1) {
            return Err(ChemError::InvalidGraph(
                "bits set beyond fingerprint width".into(),
            ));
        }
        Ok(fp)
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Fingerprint", 2)?;
        st.serialize_field("width", &self.width)?;
        st.serialize_field("bits", &self.to_hex())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            width: usize,
            bits: String,
        }
        let raw = Raw::deserialize(d)?;
        Fingerprint::from_hex(raw.width, &raw.bits).map_err(serde::de::Error::custom)
    }
}

/// 64-bit FNV-1a over a sequence of words; stable across platforms and runs.
pub(crate) fn fnv1a(words: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Morgan fingerprint with atom invariants
/// `(element, degree, implicit H, aromatic, in ring)`.
pub fn morgan_fingerprint(g: &MolGraph, radius: usize, width: usize) -> Fingerprint {
    assert!(width > 0, "fingerprint width must be positive");
    let mut fp = Fingerprint::zeros(width);
    let n = g.n_atoms();
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = g.atom(i);
            fnv1a(&[
                a.element.atomic_number() as u64,
                g.degree(i) as u64,
                a.implicit_hydrogens as u64,
                a.aromatic as u64,
                g.atom_in_ring(i) as u64,
            ])
        })
        .collect();
    for &id in &ids {
        fp.set((id % width as u64) as usize);
    }
    for r in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut env: Vec<(u64, u64)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(v, b)| (g.bond(b).type_code() as u64, ids[v]))
                    .collect();
                env.sort_unstable();
                let mut words = Vec::with_capacity(2 + 2 * env.len());
                words.push(r as u64);
                words.push(ids[i]);
                for (bt, id) in env {
                    words.push(bt);
                    words.push(id);
                }
                fnv1a(&words)
            })
            .collect();
        ids = next;
        for &id in &ids {
            fp.set((id % width as u64) as usize);
        }
    }
    fp
}

/// Tanimoto similarity `|a ∧ b| / |a ∨ b|`, defined as 1 for two empty
/// fingerprints.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    if a.width != b.width {
        return Err(ChemError::WidthMismatch {
            left: a.width,
            right: b.width,
        });
    }
    let inter = a.intersection_count(b);
    let union = a.count_ones() + b.count_ones() - inter;
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(inter as f64 / union as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::mol_from_smiles;

    #[test]
    fn benzene_radius_zero_is_one_bit() {
        let g = mol_from_smiles("c1ccccc1").unwrap();
        assert_eq!(morgan_fingerprint(&g, 0, 2048).count_ones(), 1);
    }

    #[test]
    fn empty_pair_is_identical() {
        let z = Fingerprint::zeros(64);
        assert_eq!(tanimoto(&z, &z).unwrap(), 1.0);
    }

    #[test]
    fn width_mismatch() {
        let a = Fingerprint::zeros(64);
        let b = Fingerprint::zeros(128);
        assert!(matches!(
            tanimoto(&a, &b),
            Err(ChemError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn hex_round_trip() {
        let g = mol_from_smiles("CC(=O)Nc1ccccc1").unwrap();
        let fp = morgan_fingerprint(&g, 2, 2048);
        let back = Fingerprint::from_hex(2048, &fp.to_hex()).unwrap();
        assert_eq!(fp, back);
        let json = serde_json::to_string(&fp).unwrap();
        let back: Fingerprint = serde_json::from_str(&json).unwrap();
        assert_eq!(fp, back);
    }

    #[test]
    fn fnv_reference_vector() {
        // FNV-1a of eight zero bytes.
        let mut h: u64 = 0xcbf29ce484222325;
        for _ in 0..8 {
            h = h.wrapping_mul(0x100000001b3);
        }
        assert_eq!(fnv1a(&[0]), h);
    }
}
