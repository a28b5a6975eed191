//! Versioned JSON metrics document.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdmetReport, AromaticAudit, Diversity, EvalError, FdResult, VunMetrics};
use crate::chem::Descriptors;
use crate::io::atomic_write;
use crate::train::is_good_at_chem;

pub const METRICS_SCHEMA: &str = "patchmol.metrics/1";

/// Identifies the inputs that produced an artifact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyMeans {
    pub n: usize,
    pub mean_qed: f64,
    pub mean_sa: f64,
    pub mean_logp: f64,
    pub good_at_chem: usize,
}

impl PropertyMeans {
    pub fn from_descriptors(ds: &[Descriptors]) -> Self {
        if ds.is_empty() {
            return PropertyMeans::default();
        }
        let n = ds.len() as f64;
        PropertyMeans {
            n: ds.len(),
            mean_qed: ds.iter().map(|d| d.qed).sum::<f64>() / n,
            mean_sa: ds.iter().map(|d| d.sa).sum::<f64>() / n,
            mean_logp: ds.iter().map(|d| d.logp).sum::<f64>() / n,
            good_at_chem: ds.iter().filter(|d| is_good_at_chem(d)).count(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldCounts {
    pub n_molecules: usize,
    pub n_unique_scaffolds: usize,
    pub n_acyclic: usize,
}

/// Every block is optional so a report carries exactly the metrics that
/// were requested; failures are recorded per metric under `errors`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema: String,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vun: Option<VunMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub properties: Option<PropertyMeans>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diversity: Option<Diversity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aromatic: Option<AromaticAudit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaffolds: Option<ScaffoldCounts>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fd: BTreeMap<String, FdResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admet: Option<AdmetReport>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub errors: BTreeMap<String, String>,
}

impl MetricsReport {
    pub fn new(provenance: Provenance) -> Self {
        MetricsReport {
            schema: METRICS_SCHEMA.to_string(),
            provenance,
            vun: None,
            properties: None,
            diversity: None,
            aromatic: None,
            scaffolds: None,
            fd: BTreeMap::new(),
            admet: None,
            errors: BTreeMap::new(),
        }
    }

    /// Stores `result` through `put`, or records its error under `name`.
    pub fn record<T>(
        &mut self,
        name: &str,
        result: Result<T, EvalError>,
        put: impl FnOnce(&mut Self, T),
    ) {
        match result {
            Ok(v) => put(self, v),
            Err(e) => {
                self.errors.insert(name.to_string(), e.to_string());
            }
        }
    }

    /// Checks the schema tag and that every fraction lies in [0, 1].
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.schema != METRICS_SCHEMA {
            return Err(EvalError::Config(format!(
                "unknown schema {:?}",
                self.schema
            )));
        }
        let mut fractions: Vec<(&str, f64)> = Vec::new();
        if let Some(v) = &self.vun {
            fractions.extend([
                ("validity", v.validity),
                ("uniqueness", v.uniqueness),
                ("novelty", v.novelty),
            ]);
        }
        if let Some(d) = &self.diversity {
            fractions.push(("diversity", d.value));
        }
        if let Some(a) = &self.aromatic {
            fractions.push(("frac_with_aromatic_ring", a.frac_with_aromatic_ring));
        }
        if let Some(a) = &self.admet {
            fractions.extend([
                ("lipinski_rate", a.lipinski_rate),
                ("veber_rate", a.veber_rate),
                ("egan_rate", a.egan_rate),
                ("all_rate", a.all_rate),
            ]);
        }
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(EvalError::DegenerateInput(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        if self.fd.values().any(|f| !(f.fd >= 0.0)) {
            return Err(EvalError::DegenerateInput(
                "negative or undefined Fréchet distance".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Validates, then writes through a temp file and rename.
    pub fn write(&self, path: &Path) -> Result<(), std::io::Error> {
        self.validate()
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
        atomic_write(path, self.to_json().as_bytes())
    }
}
