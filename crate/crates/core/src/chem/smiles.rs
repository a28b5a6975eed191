//! SMILES reader for the organic subset used here: `C N O F`, aromatic
//! `c n o`, the bracket atom `[H]`, `-` and `=` bonds, branches, ring-closure
//! digits (`1`-`9` plus `%nn`) and `.` separated fragments.

use std::collections::BTreeMap;

use super::element::Element;
use super::graph::{Atom, BondOrder, MolGraph};
use super::ChemError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BondSym {
    Single,
    Double,
}

fn syntax(offset: usize, reason: impl Into<String>) -> ChemError {
    ChemError::Syntax {
        offset,
        reason: reason.into(),
    }
}

struct OpenRing {
    atom: usize,
    bond: Option<BondSym>,
    offset: usize,
}

/// Parse a SMILES string into an unsanitized graph. Aromatic flags are kept
/// as written; hydrogen counts are resolved later by sanitization.
pub fn parse_smiles(s: &str) -> Result<MolGraph, ChemError> {
    let bytes = s.as_bytes();
    if bytes.is_empty() {
        return Err(syntax(0, "empty input"));
    }
    let mut g = MolGraph::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondSym, usize)> = None;
    // (atom before '(', offset of '(', atoms seen inside)
    let mut branches: Vec<(usize, usize, bool)> = Vec::new();
    let mut rings: BTreeMap<u32, OpenRing> = BTreeMap::new();
    let mut i = 0;

    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let atom = match c {
            b'C' => {
                if bytes.get(i + 1) == Some(&b'l') {
                    return Err(syntax(i, "unsupported element Cl"));
                }
                Some((Element::C, false))
            }
            b'N' => Some((Element::N, false)),
            b'O' => Some((Element::O, false)),
            b'F' => Some((Element::F, false)),
            b'c' => Some((Element::C, true)),
            b'n' => Some((Element::N, true)),
            b'o' => Some((Element::O, true)),
            b'[' => {
                if bytes.get(i + 1..i + 3) == Some(b"H]".as_slice()) {
                    i += 2;
                    Some((Element::H, false))
                } else {
                    return Err(syntax(i, "unsupported bracket atom"));
                }
            }
            _ => None,
        };

        if let Some((element, aromatic)) = atom {
            let mut a = Atom::new(element);
            a.aromatic = aromatic;
            let idx = g.push_atom(a);
            if let Some(p) = prev {
                let sym = pending.take().map(|(b, _)| b);
                connect(&mut g, p, idx, sym).map_err(|r| syntax(start, r))?;
            } else if let Some((_, off)) = pending {
                return Err(syntax(off, "bond without a preceding atom"));
            }
            if let Some(top) = branches.last_mut() {
                top.2 = true;
            }
            prev = Some(idx);
            i += 1;
            continue;
        }

        match c {
            b'-' | b'=' => {
                if prev.is_none() {
                    return Err(syntax(i, "bond without a preceding atom"));
                }
                if pending.is_some() {
                    return Err(syntax(i, "consecutive bond symbols"));
                }
                let sym = if c == b'-' {
                    BondSym::Single
                } else {
                    BondSym::Double
                };
                pending = Some((sym, i));
                i += 1;
            }
            b'(' => {
                let p = prev.ok_or_else(|| syntax(i, "branch without a preceding atom"))?;
                if pending.is_some() {
                    return Err(syntax(i, "bond symbol before branch"));
                }
                branches.push((p, i, false));
                i += 1;
            }
            b')' => {
                let (p, _, had_atom) = branches
                    .pop()
                    .ok_or_else(|| syntax(i, "unbalanced parenthesis"))?;
                if !had_atom {
                    return Err(syntax(i, "empty branch"));
                }
                if let Some((_, off)) = pending {
                    return Err(syntax(off, "dangling bond"));
                }
                prev = Some(p);
                i += 1;
            }
            b'0'..=b'9' | b'%' => {
                let (label, width) = if c == b'%' {
                    match bytes.get(i + 1..i + 3) {
                        Some(&[d1, d2]) if d1.is_ascii_digit() && d2.is_ascii_digit() => {
                            (((d1 - b'0') * 10 + (d2 - b'0')) as u32, 3)
                        }
                        _ => return Err(syntax(i, "malformed %nn ring label")),
                    }
                } else {
                    ((c - b'0') as u32, 1)
                };
                let p = prev.ok_or_else(|| syntax(i, "ring closure without a preceding atom"))?;
                let sym = pending.take().map(|(b, _)| b);
                match rings.remove(&label) {
                    Some(open) => {
                        let bond = match (open.bond, sym) {
                            (Some(x), Some(y)) if x != y => {
                                return Err(syntax(i, "conflicting ring-closure bond symbols"))
                            }
                            (x, y) => x.or(y),
                        };
                        if open.atom == p {
                            return Err(syntax(i, "ring closure onto the same atom"));
                        }
                        connect(&mut g, open.atom, p, bond).map_err(|r| syntax(i, r))?;
                    }
                    None => {
                        rings.insert(
                            label,
                            OpenRing {
                                atom: p,
                                bond: sym,
                                offset: i,
                            },
                        );
                    }
                }
                i += width;
            }
            b'.' => {
                if let Some((_, off)) = pending {
                    return Err(syntax(off, "dangling bond"));
                }
                if prev.is_none() {
                    return Err(syntax(i, "fragment separator without a preceding atom"));
                }
                if !branches.is_empty() {
                    return Err(syntax(i, "fragment separator inside a branch"));
                }
                prev = None;
                i += 1;
            }
            _ => {
                let ch = s[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unsupported token '{ch}'")));
            }
        }
    }

    if let Some((_, off)) = pending {
        return Err(syntax(off, "dangling bond"));
    }
    if let Some(&(_, off, _)) = branches.last() {
        return Err(syntax(off, "unbalanced parenthesis"));
    }
    if let Some(open) = rings.values().min_by_key(|r| r.offset) {
        return Err(syntax(open.offset, "unclosed ring"));
    }
    if prev.is_none() {
        return Err(syntax(bytes.len(), "trailing fragment separator"));
    }
    Ok(g)
}

fn connect(g: &mut MolGraph, a: usize, b: usize, sym: Option<BondSym>) -> Result<(), String> {
    let both_aromatic = g.atom(a).aromatic && g.atom(b).aromatic;
    let (order, aromatic) = match sym {
        None if both_aromatic => (BondOrder::Single, true),
        None | Some(BondSym::Single) => (BondOrder::Single, false),
        Some(BondSym::Double) => (BondOrder::Double, false),
    };
    g.push_bond(a, b, order, aromatic)
        .map(|_| ())
        .map_err(|e| e.to_string())
}

/// Non-empty, non-comment lines of a SMILES file, trimmed, with their
/// 1-based line numbers. Anything after the first whitespace is ignored.
pub fn read_smiles_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter_map(|(k, line)| {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                return None;
            }
            Some((k + 1, t.split_whitespace().next().unwrap_or(t)))
        })
        .collect()
}
