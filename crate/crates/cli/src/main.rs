//! `patchmol` command-line driver.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 missing input
//! artifact, 4 internal failure.

mod analysis;
mod config;
mod context;
mod error;
mod generate;
mod sample;
mod train_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use analysis::{EvaluateArgs, Metric, StressArgs};
use config::RunConfig;
use context::Ctx;
use error::CliError;
use generate::GenerateArgs;
use sample::Mode;

#[derive(Parser)]
#[command(
    name = "patchmol",
    version,
    about = "Patch-based molecule generation and evaluation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set train.epochs=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Reference corpus (one SMILES per line).
    #[arg(long, global = true)]
    reference: Option<PathBuf>,
    #[arg(long, global = true)]
    checkpoints: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decode molecules from descriptor targets or random latent codes.
    Generate {
        #[arg(long, short, default_value_t = 1000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Descriptor)]
        mode: Mode,
        /// CSV of descriptor targets; header names a subset of
        /// qed, logp, sa, mol_weight, tpsa, n_heavy_atoms.
        #[arg(long)]
        targets: Option<PathBuf>,
    },
    /// Pretrain the conditioner, warm up the discriminator, then run the
    /// adversarial epochs.
    Train,
    /// Score a SMILES file against the reference corpus.
    Evaluate {
        #[arg(long, short)]
        generated: PathBuf,
        /// Comma-separated metric set.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        which: Vec<Metric>,
        /// Report path; defaults to `metrics.json` in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rolling-similarity mode-collapse probe over a generation stream.
    Stress {
        /// Stream molecules from a SMILES file instead of generating them.
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long, short, default_value_t = 2000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::RandomLatent)]
        mode: Mode,
        #[arg(long, default_value_t = 512)]
        window: usize,
    },
    /// Non-dominated molecules under QED up, SA down, logP down.
    Pareto {
        #[arg(long, short)]
        input: PathBuf,
    },
    /// Rule-based ADMET fast pass with optional MaxMin picking.
    Admet {
        #[arg(long, short)]
        input: PathBuf,
        /// Pick this many diverse molecules among those passing every rule.
        #[arg(long)]
        select: Option<usize>,
    },
    /// Spearman audit of latent coordinates against decoded properties.
    Audit {
        #[arg(long, short, default_value_t = 1000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::RandomLatent)]
        mode: Mode,
    },
    /// Suggest the proximity threshold from observed patch distances.
    CalibrateTau {
        /// Patch batch blob; otherwise patches come from random latents.
        #[arg(long)]
        patches: Option<PathBuf>,
        #[arg(long, short, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        quantile: f64,
    },
}

fn load_config(c: &Common) -> Result<RunConfig, CliError> {
    let mut overrides = c.overrides.clone();
    let quote = |p: &PathBuf| toml::Value::String(p.display().to_string()).to_string();
    if let Some(s) = c.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(p) = &c.reference {
        overrides.push(format!("paths.reference={}", quote(p)));
    }
    if let Some(p) = &c.checkpoints {
        overrides.push(format!("paths.checkpoints={}", quote(p)));
    }
    if let Some(p) = &c.output {
        overrides.push(format!("paths.output={}", quote(p)));
    }
    RunConfig::load(c.config.as_deref(), &overrides)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx::new(load_config(&cli.common)?);
    match cli.command {
        Command::Generate { n, mode, targets } => {
            generate::cmd_generate(&ctx, &GenerateArgs { n, mode, targets })
        }
        Command::Train => train_cmd::cmd_train(&ctx),
        Command::Evaluate {
            generated,
            which,
            out,
        } => analysis::cmd_evaluate(
            &ctx,
            &EvaluateArgs {
                generated,
                reference: None,
                which,
                out,
            },
        ),
        Command::Stress {
            input,
            n,
            mode,
            window,
        } => analysis::cmd_stress(
            &ctx,
            &StressArgs {
                input,
                n,
                mode,
                window,
            },
        ),
        Command::Pareto { input } => analysis::cmd_pareto(&ctx, &input),
        Command::Admet { input, select } => analysis::cmd_admet(&ctx, &input, select),
        Command::Audit { n, mode } => analysis::cmd_audit(&ctx, n, mode),
        Command::CalibrateTau {
            patches,
            n,
            quantile,
        } => analysis::cmd_calibrate_tau(&ctx, patches.as_deref(), n, quantile),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
