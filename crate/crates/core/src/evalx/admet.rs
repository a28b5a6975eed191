//! Threshold rules for oral drug-likeness (Lipinski, Veber, Egan).

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::chem::Descriptors;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmetRules {
    pub lipinski_mw: f64,
    pub lipinski_logp: f64,
    pub lipinski_hbd: u32,
    pub lipinski_hba: u32,
    /// A molecule passes Lipinski with at most this many violations.
    pub lipinski_max_violations: u32,
    pub veber_rotatable: u32,
    pub veber_tpsa: f64,
    pub egan_logp: f64,
    pub egan_tpsa: f64,
}

impl Default for AdmetRules {
    fn default() -> Self {
        AdmetRules {
            lipinski_mw: 500.0,
            lipinski_logp: 5.0,
            lipinski_hbd: 5,
            lipinski_hba: 10,
            lipinski_max_violations: 1,
            veber_rotatable: 10,
            veber_tpsa: 140.0,
            egan_logp: 5.88,
            egan_tpsa: 131.6,
        }
    }
}

impl AdmetRules {
    pub fn validate(&self) -> Result<(), EvalError> {
        let reals = [
            self.lipinski_mw,
            self.lipinski_logp,
            self.veber_tpsa,
            self.egan_logp,
            self.egan_tpsa,
        ];
        let ints = [self.lipinski_hbd, self.lipinski_hba, self.veber_rotatable];
        if reals.iter().any(|v| !(*v > 0.0)) || ints.contains(&0) {
            return Err(EvalError::Config(
                "ADMET thresholds must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn flags(&self, d: &Descriptors) -> AdmetFlags {
        let lipinski_violations = (d.mol_weight > self.lipinski_mw) as u32
            + (d.logp > self.lipinski_logp) as u32
            + (d.hbd > self.lipinski_hbd) as u32
            + (d.hba > self.lipinski_hba) as u32;
        let lipinski = lipinski_violations <= self.lipinski_max_violations;
        let veber = d.rotatable_bonds <= self.veber_rotatable && d.tpsa <= self.veber_tpsa;
        let egan = d.logp <= self.egan_logp && d.tpsa <= self.egan_tpsa;
        AdmetFlags {
            lipinski_violations,
            lipinski,
            veber,
            egan,
            all: lipinski && veber && egan,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmetFlags {
    pub lipinski_violations: u32,
    pub lipinski: bool,
    pub veber: bool,
    pub egan: bool,
    pub all: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdmetReport {
    pub n: usize,
    pub lipinski_rate: f64,
    pub veber_rate: f64,
    pub egan_rate: f64,
    pub all_rate: f64,
    pub flags: Vec<AdmetFlags>,
}

pub fn admet_fast_pass(ds: &[Descriptors], rules: &AdmetRules) -> AdmetReport {
    let flags: Vec<AdmetFlags> = ds.iter().map(|d| rules.flags(d)).collect();
    let rate = |f: fn(&AdmetFlags) -> bool| {
        if flags.is_empty() {
            0.0
        } else {
            flags.iter().filter(|x| f(x)).count() as f64 / flags.len() as f64
        }
    };
    AdmetReport {
        n: ds.len(),
        lipinski_rate: rate(|f| f.lipinski),
        veber_rate: rate(|f| f.veber),
        egan_rate: rate(|f| f.egan),
        all_rate: rate(|f| f.all),
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{compute_descriptors, mol_from_smiles};

    #[test]
    fn methane_passes_everything() {
        let d = compute_descriptors(&mol_from_smiles("C").unwrap());
        let f = AdmetRules::default().flags(&d);
        assert_eq!(f.lipinski_violations, 0);
        assert!(f.all);
    }

    #[test]
    fn single_violation_still_passes_lipinski() {
        let d = Descriptors {
            mol_weight: 600.0,
            logp: 2.0,
            ..Default::default()
        };
        let f = AdmetRules::default().flags(&d);
        assert_eq!((f.lipinski_violations, f.lipinski), (1, true));
        let d2 = Descriptors { logp: 6.0, ..d };
        let f2 = AdmetRules::default().flags(&d2);
        assert_eq!(
            (f2.lipinski_violations, f2.lipinski, f2.egan),
            (2, false, false)
        );
    }

    #[test]
    fn flexible_molecule_fails_veber() {
        let d = Descriptors {
            rotatable_bonds: 12,
            ..Default::default()
        };
        assert!(!AdmetRules::default().flags(&d).veber);
        let r = admet_fast_pass(&[d, Descriptors::default()], &AdmetRules::default());
        assert_eq!((r.veber_rate, r.lipinski_rate), (0.5, 1.0));
    }
}
