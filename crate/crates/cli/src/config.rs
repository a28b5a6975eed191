//! Run configuration: one TOML document, flag overrides, and a stable hash.

use std::path::{Path, PathBuf};

use patchmol::assemble::AggregatorConfig;
use patchmol::evalx::{AdmetRules, FdConfig, ParetoConfig};
use patchmol::nets::{ConditionerConfig, CriticConfig, DiscriminatorConfig};
use patchmol::qpatch::{ClassicalConfig, InitConfig, QuantumConfig};
use patchmol::train::{RewardConfig, TrainConfig, TrainSetup};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub reference: Option<PathBuf>,
    pub latent: Option<PathBuf>,
    pub checkpoints: PathBuf,
    pub output: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            reference: None,
            latent: None,
            checkpoints: PathBuf::from("checkpoints"),
            output: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    #[default]
    Quantum,
    Classical,
}

impl Head {
    pub fn kind(self) -> &'static str {
        match self {
            Head::Quantum => "quantum",
            Head::Classical => "classical",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    pub head: Head,
    pub classical: ClassicalConfig,
    pub init: InitConfig,
}

/// Sampling noise at inference time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    /// Descriptor noise as a fraction of each descriptor's corpus IQR,
    /// applied when targets are drawn from the reference corpus.
    pub descriptor_jitter: f64,
    /// Standard deviation of Gaussian noise added to conditioner codes.
    pub latent_jitter: f64,
    /// Standard deviation of codes in random-latent mode.
    pub latent_scale: f64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            descriptor_jitter: 0.05,
            latent_jitter: 0.05,
            latent_scale: 1.0,
        }
    }
}

impl GenerateConfig {
    fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("descriptor_jitter", self.descriptor_jitter),
            ("latent_jitter", self.latent_jitter),
            ("latent_scale", self.latent_scale),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("generate.{name} must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// Everything a run reads. The global `seed` replaces `train.seed` and
/// `fd.seed` after loading.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub paths: Paths,
    pub generator: GeneratorSection,
    pub quantum: QuantumConfig,
    pub aggregator: AggregatorConfig,
    pub train: TrainConfig,
    pub reward: RewardConfig,
    pub conditioner: ConditionerConfig,
    pub critic: CriticConfig,
    pub discriminator: DiscriminatorConfig,
    pub generate: GenerateConfig,
    pub fd: FdConfig,
    pub pareto: ParetoConfig,
    pub admet: AdmetRules,
}

/// Applies `key.path=value` to a TOML tree; `value` is parsed as a TOML
/// value and falls back to a bare string.
fn apply_override(root: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("override {spec:?} is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::usage(format!(
            "override key {key:?} is malformed"
        )));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut node = root;
    for p in &parts[..parts.len() - 1] {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::usage(format!("override {key:?}: {p:?} is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Reads `path` (or starts from defaults), applies `overrides` in
    /// order, and validates. Relative paths inside a file resolve against
    /// its directory; relative override paths resolve against the working
    /// directory.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        let mut cfg: RunConfig = toml::Value::Table(table.clone())
            .try_into()
            .map_err(|e| CliError::usage(format!("config: {e}")))?;
        if let Some(dir) = path.and_then(Path::parent) {
            cfg.paths.reference = cfg.paths.reference.map(|r| resolve(dir, &r));
            cfg.paths.latent = cfg.paths.latent.map(|r| resolve(dir, &r));
            cfg.paths.checkpoints = resolve(dir, &cfg.paths.checkpoints);
            cfg.paths.output = resolve(dir, &cfg.paths.output);
            let paths = toml::Value::try_from(&cfg.paths).expect("paths serialize");
            table.insert("paths".into(), paths);
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let mut cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::usage(format!("config: {e}")))?;
        cfg.train.seed = cfg.seed;
        cfg.fd.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |e: &dyn std::fmt::Display| CliError::usage(e.to_string());
        self.quantum.validate().map_err(|e| usage(&e))?;
        self.generator.init.validate().map_err(|e| usage(&e))?;
        self.aggregator.validate().map_err(|e| usage(&e))?;
        self.train.validate().map_err(|e| usage(&e))?;
        self.reward.validate().map_err(|e| usage(&e))?;
        self.fd.validate().map_err(|e| usage(&e))?;
        self.pareto.validate().map_err(|e| usage(&e))?;
        self.admet.validate().map_err(|e| usage(&e))?;
        self.generate.validate().map_err(|e| usage(&e))?;
        Ok(())
    }

    pub fn setup(&self) -> TrainSetup {
        TrainSetup {
            train: self.train.clone(),
            reward: self.reward.clone(),
            conditioner: self.conditioner.clone(),
            critic: self.critic.clone(),
            discriminator: self.discriminator.clone(),
        }
    }

    /// SHA-256 of the resolved configuration with the output and
    /// checkpoint directories blanked, so the same run written to two
    /// places hashes alike.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.paths.output = PathBuf::new();
        c.paths.checkpoints = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn reference(&self) -> Result<&Path, CliError> {
        self.paths
            .reference
            .as_deref()
            .ok_or_else(|| CliError::usage("paths.reference is not set"))
    }
}
