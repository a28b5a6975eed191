//! Wildman–Crippen atomic logP contributions for the C/N/O/F/H alphabet.
//!
//! Each heavy atom is typed by the first matching rule of the published
//! table (in table order); hydrogens take the type implied by the atom they
//! sit on. Charged and triple-bond classes are unreachable here and omitted.

use super::element::Element;
use super::graph::{BondOrder, MolGraph};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Link {
    Single,
    Double,
    Aromatic,
}

#[derive(Clone, Copy)]
struct Nb {
    idx: usize,
    link: Link,
}

struct View<'a> {
    g: &'a MolGraph,
}

impl View<'_> {
    fn nbs(&self, i: usize) -> Vec<Nb> {
        self.g
            .neighbors(i)
            .iter()
            .filter(|&&(v, _)| self.g.atom(v).element != Element::H)
            .map(|&(v, b)| {
                let bond = self.g.bond(b);
                let link = if bond.aromatic {
                    Link::Aromatic
                } else if bond.order == BondOrder::Double {
                    Link::Double
                } else {
                    Link::Single
                };
                Nb { idx: v, link }
            })
            .collect()
    }

    fn h(&self, i: usize) -> u32 {
        self.g.total_hydrogens(i)
    }

    fn x(&self, i: usize) -> u32 {
        self.nbs(i).len() as u32 + self.h(i)
    }

    fn el(&self, i: usize) -> Element {
        self.g.atom(i).element
    }

    fn arom(&self, i: usize) -> bool {
        self.g.atom(i).aromatic
    }

    /// Aliphatic atom of element `e`.
    fn is_ali(&self, i: usize, e: Element) -> bool {
        self.el(i) == e && !self.arom(i)
    }
}

/// Default SMARTS bond: single or aromatic.
fn sa(l: Link) -> bool {
    matches!(l, Link::Single | Link::Aromatic)
}

/// True if distinct neighbours can be assigned to every predicate.
fn assign(nbs: &[Nb], preds: &[&dyn Fn(&Nb) -> bool]) -> bool {
    fn go(nbs: &[Nb], preds: &[&dyn Fn(&Nb) -> bool], used: &mut Vec<bool>) -> bool {
        let Some((p, rest)) = preds.split_first() else {
            return true;
        };
        for k in 0..nbs.len() {
            if !used[k] && p(&nbs[k]) {
                used[k] = true;
                if go(nbs, rest, used) {
                    return true;
                }
                used[k] = false;
            }
        }
        false
    }
    go(nbs, preds, &mut vec![false; nbs.len()])
}

fn carbon_type(v: &View, i: usize) -> (&'static str, f64) {
    let nbs = v.nbs(i);
    let h = v.h(i);
    let x = v.x(i);
    let arom = v.arom(i);
    let ali_c = |n: &Nb| sa(n.link) && v.is_ali(n.idx, Element::C);
    let ali_heavy = |n: &Nb| sa(n.link) && !v.arom(n.idx);
    let ali_het = |n: &Nb| {
        sa(n.link) && !v.arom(n.idx) && matches!(v.el(n.idx), Element::N | Element::O | Element::F)
    };
    let any_arom = |n: &Nb| sa(n.link) && v.arom(n.idx);
    let ali_c_double = |n: &Nb| n.link == Link::Double && v.is_ali(n.idx, Element::C);

    if !arom {
        if (h == 4 && nbs.is_empty())
            || (h == 3 && assign(&nbs, &[&ali_c]))
            || (h == 2 && assign(&nbs, &[&ali_c, &ali_c]))
        {
            return ("C1", 0.1441);
        }
        if (h == 1 && assign(&nbs, &[&ali_c, &ali_c, &ali_c]))
            || (h == 0 && assign(&nbs, &[&ali_c, &ali_c, &ali_c, &ali_c]))
        {
            return ("C2", 0.0);
        }
        if (h == 3 && assign(&nbs, &[&ali_het]))
            || (h == 2 && x == 4 && assign(&nbs, &[&ali_het, &ali_heavy]))
        {
            return ("C3", -0.2035);
        }
        if (h == 1 && x == 4 && assign(&nbs, &[&ali_het, &ali_heavy, &ali_heavy]))
            || (h == 0 && x == 4 && assign(&nbs, &[&ali_het, &ali_heavy, &ali_heavy, &ali_heavy]))
        {
            return ("C4", -0.2051);
        }
        if nbs
            .iter()
            .any(|n| n.link == Link::Double && !v.arom(n.idx) && v.el(n.idx) != Element::C)
        {
            return ("C5", -0.2783);
        }
        if (h == 2 && assign(&nbs, &[&ali_c_double]))
            || (h == 1 && assign(&nbs, &[&ali_c_double, &ali_heavy]))
            || (h == 0 && assign(&nbs, &[&ali_c_double, &ali_heavy, &ali_heavy]))
            || assign(&nbs, &[&ali_c_double, &ali_c_double])
        {
            return ("C6", 0.1551);
        }
        let arom_c = |n: &Nb| sa(n.link) && v.el(n.idx) == Element::C && v.arom(n.idx);
        if h == 3 && assign(&nbs, &[&arom_c]) {
            return ("C8", 0.08452);
        }
        if h == 3 && assign(&nbs, &[&any_arom]) {
            return ("C9", -0.1444);
        }
        if h == 2 && x == 4 && assign(&nbs, &[&any_arom]) {
            return ("C10", -0.0516);
        }
        if h == 1 && x == 4 && assign(&nbs, &[&any_arom]) {
            return ("C11", 0.1193);
        }
        if h == 0 && x == 4 && assign(&nbs, &[&any_arom]) {
            return ("C12", -0.0967);
        }
    } else {
        if nbs.iter().any(|n| v.el(n.idx) == Element::F && sa(n.link)) {
            return ("C14", 0.0);
        }
        if h == 1 {
            return ("C18", 0.1581);
        }
        let ar = |n: &Nb| n.link == Link::Aromatic && v.arom(n.idx);
        if assign(&nbs, &[&ar, &ar, &ar]) {
            return ("C19", 0.2955);
        }
        let single_to =
            |pred: fn(&View, usize) -> bool| move |n: &Nb| n.link == Link::Single && pred(v, n.idx);
        let to_arom = single_to(|v, j| v.arom(j));
        if assign(&nbs, &[&ar, &ar, &to_arom]) {
            return ("C20", 0.2713);
        }
        let to_c = single_to(|v, j| v.is_ali(j, Element::C));
        if assign(&nbs, &[&ar, &ar, &to_c]) {
            return ("C21", 0.136);
        }
        let to_n = single_to(|v, j| v.is_ali(j, Element::N));
        if assign(&nbs, &[&ar, &ar, &to_n]) {
            return ("C22", 0.4619);
        }
        let to_o = single_to(|v, j| v.is_ali(j, Element::O));
        if assign(&nbs, &[&ar, &ar, &to_o]) {
            return ("C23", 0.5437);
        }
        let dbl = |n: &Nb| n.link == Link::Double && !v.arom(n.idx);
        if assign(&nbs, &[&ar, &ar, &dbl]) {
            return ("C25", -0.8186);
        }
    }
    // C26: sp2 carbon conjugated to an aromatic ring.
    if !arom {
        let c_dbl = |n: &Nb| n.link == Link::Double && v.is_ali(n.idx, Element::C);
        let any_arom_nb = |n: &Nb| sa(n.link) && v.arom(n.idx);
        let arom_c = |n: &Nb| sa(n.link) && v.arom(n.idx) && v.el(n.idx) == Element::C;
        let ali_heavy = |n: &Nb| sa(n.link) && !v.arom(n.idx);
        let c_dbl_arom =
            |n: &Nb| n.link == Link::Double && v.arom(n.idx) && v.el(n.idx) == Element::C;
        if assign(&nbs, &[&c_dbl, &any_arom_nb, &ali_heavy])
            || assign(&nbs, &[&c_dbl, &arom_c, &any_arom_nb])
            || (h == 1 && assign(&nbs, &[&c_dbl, &any_arom_nb]))
            || assign(&nbs, &[&c_dbl_arom])
        {
            return ("C26", 0.264);
        }
    }
    ("CS", 0.08129)
}

fn nitrogen_type(v: &View, i: usize) -> (&'static str, f64) {
    let nbs = v.nbs(i);
    let h = v.h(i);
    if v.arom(i) {
        return ("N11", -0.3239);
    }
    let ali_heavy = |n: &Nb| sa(n.link) && !v.arom(n.idx);
    let any_heavy = |n: &Nb| sa(n.link);
    let arom_nb = |n: &Nb| sa(n.link) && v.arom(n.idx);
    let dbl_heavy = |n: &Nb| n.link == Link::Double;
    if h == 2 && assign(&nbs, &[&ali_heavy]) {
        return ("N1", -1.019);
    }
    if h == 1 && assign(&nbs, &[&ali_heavy, &ali_heavy]) {
        return ("N2", -0.7096);
    }
    if h == 2 && assign(&nbs, &[&arom_nb]) {
        return ("N3", -1.027);
    }
    if h == 1 && assign(&nbs, &[&arom_nb, &any_heavy]) {
        return ("N4", -0.5188);
    }
    if h == 1 && assign(&nbs, &[&dbl_heavy]) {
        return ("N5", 0.08387);
    }
    if assign(&nbs, &[&dbl_heavy, &any_heavy]) {
        return ("N6", 0.1836);
    }
    if assign(&nbs, &[&ali_heavy, &ali_heavy, &ali_heavy]) {
        return ("N7", -0.3187);
    }
    if assign(&nbs, &[&arom_nb, &any_heavy, &ali_heavy])
        || assign(&nbs, &[&arom_nb, &arom_nb, &arom_nb])
    {
        return ("N8", -0.4458);
    }
    ("NS", -0.4806)
}

fn oxygen_type(v: &View, i: usize) -> (&'static str, f64) {
    let nbs = v.nbs(i);
    let h = v.h(i);
    if v.arom(i) {
        return ("O1", 0.1552);
    }
    if h == 1 || h == 2 {
        return ("O2", -0.2893);
    }
    let ali_heavy = |n: &Nb| sa(n.link) && !v.arom(n.idx);
    let any_heavy = |n: &Nb| sa(n.link);
    let arom_nb = |n: &Nb| sa(n.link) && v.arom(n.idx);
    if assign(&nbs, &[&ali_heavy, &ali_heavy]) {
        return ("O3", -0.0684);
    }
    if assign(&nbs, &[&arom_nb, &any_heavy]) {
        return ("O4", -0.4195);
    }
    let dbl = nbs.iter().find(|n| n.link == Link::Double).copied();
    if let Some(d) = dbl {
        let c = d.idx;
        if matches!(v.el(c), Element::N | Element::O) {
            return ("O5", 0.0335);
        }
        if v.el(c) == Element::C && v.arom(c) {
            return ("O8", 0.1788);
        }
        if v.el(c) == Element::C {
            // Substituents of the carbonyl carbon other than this oxygen.
            let others: Vec<Nb> = v.nbs(c).into_iter().filter(|n| n.idx != i).collect();
            let ch = v.h(c);
            let ali_c = |n: &Nb| sa(n.link) && v.is_ali(n.idx, Element::C);
            let arom_c = |n: &Nb| sa(n.link) && v.arom(n.idx) && v.el(n.idx) == Element::C;
            let c_or_arom_c = |n: &Nb| sa(n.link) && v.el(n.idx) == Element::C;
            let arom_heavy = |n: &Nb| sa(n.link) && v.arom(n.idx);
            let ali_no = |n: &Nb| {
                sa(n.link) && !v.arom(n.idx) && matches!(v.el(n.idx), Element::N | Element::O)
            };
            let second_o_dbl = |n: &Nb| n.link == Link::Double && v.is_ali(n.idx, Element::O);
            let cx = others.len() as u32 + 1 + ch;
            if (ch == 1 && assign(&others, &[&ali_c]))
                || assign(&others, &[&ali_c, &ali_heavy])
                || (ch == 1 && assign(&others, &[&ali_no]))
                || (ch == 2 && others.is_empty())
                || (cx == 2 && assign(&others, &[&second_o_dbl]))
            {
                return ("O9", -0.1526);
            }
            if (ch == 1 && assign(&others, &[&arom_c]))
                || assign(&others, &[&c_or_arom_c, &arom_heavy])
                || assign(&others, &[&arom_c, &ali_heavy])
            {
                return ("O10", 0.1129);
            }
            let non_c = |n: &Nb| sa(n.link) && v.el(n.idx) != Element::C;
            if assign(&others, &[&non_c, &non_c]) {
                return ("O11", 0.4833);
            }
        }
    }
    ("OS", -0.1188)
}

fn hydrogen_value(v: &View, host: Option<usize>) -> (&'static str, f64) {
    let Some(host) = host else {
        return ("HS", 0.1125);
    };
    match v.el(host) {
        Element::C | Element::H => ("H1", 0.123),
        Element::O => {
            let nbs = v.nbs(host);
            let other_is = |pred: &dyn Fn(usize) -> bool| nbs.iter().any(|n| pred(n.idx));
            if other_is(&|j| v.el(j) == Element::C && (v.arom(j) || v.x(j) == 4)) {
                return ("H2", -0.2677);
            }
            // The oxygen's other partner is another hydrogen (water) or a
            // non C/N/O atom.
            let h_here = v.h(host);
            if h_here >= 2
                || other_is(&|j| {
                    v.arom(j) || !matches!(v.el(j), Element::C | Element::N | Element::O)
                })
            {
                return ("H2", -0.2677);
            }
            if other_is(&|j| v.el(j) == Element::N) {
                return ("H3", 0.2142);
            }
            let enol_or_acid = nbs.iter().any(|n| {
                n.link == Link::Single
                    && v.is_ali(n.idx, Element::C)
                    && v.nbs(n.idx).iter().any(|m| {
                        m.link == Link::Double
                            && m.idx != host
                            && !v.arom(m.idx)
                            && matches!(v.el(m.idx), Element::C | Element::N | Element::O)
                    })
            });
            if enol_or_acid || other_is(&|j| v.is_ali(j, Element::O)) {
                return ("H4", 0.298);
            }
            ("HS", 0.1125)
        }
        Element::N => ("H3", 0.2142),
        Element::F => ("H2", -0.2677),
    }
}

/// Per-atom contributions: heavy atom value plus its hydrogens, keyed by
/// the heavy atom's type label.
pub fn crippen_contribs(g: &MolGraph) -> Vec<(&'static str, f64)> {
    let v = View { g };
    (0..g.n_atoms())
        .map(|i| {
            let (label, base) = match v.el(i) {
                Element::C => carbon_type(&v, i),
                Element::N => nitrogen_type(&v, i),
                Element::O => oxygen_type(&v, i),
                Element::F => ("F", 0.4202),
                Element::H => {
                    let host = g.neighbors(i).first().map(|&(j, _)| j);
                    return hydrogen_value(&v, host);
                }
            };
            let (_, hv) = hydrogen_value(&v, Some(i));
            (label, base + hv * g.atom(i).implicit_hydrogens as f64)
        })
        .collect()
}

pub fn crippen_logp(g: &MolGraph) -> f64 {
    crippen_contribs(g).iter().map(|(_, x)| x).sum()
}
