//! Shared plumbing: provenance stamps, artifact writers and loaders.

use std::path::{Path, PathBuf};

use patchmol::blob::Blob;
use patchmol::evalx::Provenance;
use patchmol::io::atomic_write;
use patchmol::nets::Conditioner;
use patchmol::qpatch::{ClassicalHead, PatchGenerator, QuantumParams};
use patchmol::train::Corpus;
use serde::Serialize;

use crate::config::{Head, RunConfig};
use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GENERATOR_FILE: &str = "generator.pqtb";
pub const CONDITIONER_FILE: &str = "conditioner_best.pqtb";

pub struct Ctx {
    pub cfg: RunConfig,
    pub provenance: Provenance,
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Self {
        let provenance = Provenance {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
        };
        Ctx { cfg, provenance }
    }

    /// Comment line opening every text artifact.
    pub fn stamp(&self) -> String {
        format!(
            "# patchmol {} config_hash={} seed={}\n",
            self.provenance.tool_version, self.provenance.config_hash, self.provenance.seed
        )
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.paths.output.join(name)
    }

    pub fn checkpoint(&self, name: &str) -> PathBuf {
        self.cfg.paths.checkpoints.join(name)
    }

    pub fn write_text(&self, path: &Path, body: &str) -> Result<(), CliError> {
        let mut s = self.stamp();
        s.push_str(body);
        atomic_write(path, s.as_bytes()).map_err(|e| CliError::io(path, e))
    }

    /// CSV with the provenance comment as its first line.
    pub fn write_csv<R: Serialize>(
        &self,
        path: &Path,
        header: &[&str],
        rows: &[R],
    ) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::internal(e.to_string()))?;
        self.write_text(path, &String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Pretty JSON carrying `schema` and `provenance` beside the body's
    /// fields; keys come out sorted.
    pub fn write_json<T: Serialize>(
        &self,
        path: &Path,
        schema: &str,
        body: &T,
    ) -> Result<(), CliError> {
        let mut doc = serde_json::Map::new();
        doc.insert("schema".into(), schema.into());
        doc.insert("provenance".into(), serde_json::to_value(&self.provenance)?);
        match serde_json::to_value(body)? {
            serde_json::Value::Object(m) => doc.extend(m),
            other => {
                doc.insert("body".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(doc))? + "\n";
        atomic_write(path, text.as_bytes()).map_err(|e| CliError::io(path, e))
    }

    /// Reference corpus; skipped lines are reported on stderr.
    pub fn corpus(&self) -> Result<Corpus, CliError> {
        let path = self.cfg.reference()?;
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let corpus = Corpus::from_smiles_text(&text);
        if !corpus.skipped.is_empty() {
            eprintln!(
                "warning: skipped {} corpus line(s) in {}",
                corpus.skipped.len(),
                path.display()
            );
            for s in &corpus.skipped {
                eprintln!("warning:   line {}: {}", s.line, s.reason);
            }
        }
        Ok(corpus)
    }

    pub fn fresh_generator(&self) -> Generator {
        let g = &self.cfg.generator;
        match g.head {
            Head::Quantum => Generator::Quantum(QuantumParams::init_with(
                self.cfg.quantum.clone(),
                &g.init,
                self.cfg.seed,
            )),
            Head::Classical => Generator::Classical(ClassicalHead::init_with(
                self.cfg.quantum.clone(),
                g.classical.clone(),
                &g.init,
                self.cfg.seed,
            )),
        }
    }

    /// The frozen generator saved under the checkpoint directory. Its kind
    /// and shape must agree with the configuration.
    pub fn load_generator(&self) -> Result<Generator, CliError> {
        let path = self.checkpoint(GENERATOR_FILE);
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let blob = Blob::from_bytes(&bytes)?;
        let kind = blob
            .header
            .get("kind")
            .and_then(|k| k.as_str())
            .unwrap_or("");
        let want = self.cfg.generator.head.kind();
        if kind != want {
            return Err(CliError::usage(format!(
                "{} holds a {kind:?} generator but the config asks for {want:?}",
                path.display()
            )));
        }
        let gen = match self.cfg.generator.head {
            Head::Quantum => {
                Generator::Quantum(QuantumParams::from_blob(&blob, Some(&self.cfg.quantum))?)
            }
            Head::Classical => Generator::Classical(ClassicalHead::from_blob(&blob)?),
        };
        if gen.as_dyn().config() != &self.cfg.quantum {
            return Err(CliError::usage(format!(
                "{} was built for a different [quantum] shape",
                path.display()
            )));
        }
        Ok(gen)
    }

    pub fn load_conditioner(&self) -> Result<Conditioner, CliError> {
        let path = self.checkpoint(CONDITIONER_FILE);
        if !path.exists() {
            return Err(CliError::missing(&path));
        }
        Ok(Conditioner::load(&path)?)
    }
}

/// Non-comment entries of a SMILES file, first token per line.
pub fn read_smiles_file(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(patchmol::chem::read_smiles_lines(&text)
        .into_iter()
        .map(|(_, s)| s.to_string())
        .collect())
}

/// The frozen patch generator behind either head.
pub enum Generator {
    Quantum(QuantumParams),
    Classical(ClassicalHead),
}

impl Generator {
    pub fn as_dyn(&self) -> &dyn PatchGenerator {
        match self {
            Generator::Quantum(q) => q,
            Generator::Classical(c) => c,
        }
    }

    pub fn save(&self, path: &Path, seed: u64) -> Result<(), CliError> {
        match self {
            Generator::Quantum(q) => q.save(path, Some(seed))?,
            Generator::Classical(c) => c.save(path, Some(seed))?,
        }
        Ok(())
    }
}
