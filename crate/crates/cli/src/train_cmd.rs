//! `train`: conditioner pretraining, discriminator warm-up and adversarial
//! epochs around a frozen generator.

use std::time::Instant;

use patchmol::train::{
    read_latent_matrix, CheckpointMeta, EpochMetrics, SkippedLine, Trainer, ValidationStats,
};
use serde::Serialize;

use crate::context::{Ctx, GENERATOR_FILE};
use crate::error::CliError;

#[derive(Serialize)]
struct Skipped {
    line: usize,
    reason: String,
}

#[derive(Serialize)]
struct TrainSummary {
    head: &'static str,
    n_trainable_generator: usize,
    generator_reused: bool,
    n_reference: usize,
    n_skipped_lines: usize,
    skipped: Vec<Skipped>,
    pretrain_final_loss: Option<f64>,
    warmup_final_loss: Option<f64>,
    initial_validation: ValidationStats,
    initial_holdout_mse: f64,
    final_holdout_mse: Option<f64>,
    best: CheckpointMeta,
    checkpoints: Vec<CheckpointMeta>,
    epochs: Vec<EpochMetrics>,
}

fn skipped(lines: &[SkippedLine]) -> Vec<Skipped> {
    lines
        .iter()
        .map(|s| Skipped {
            line: s.line,
            reason: s.reason.clone(),
        })
        .collect()
}

pub fn cmd_train(ctx: &Ctx) -> Result<(), CliError> {
    let t0 = Instant::now();
    let cfg = &ctx.cfg;
    let corpus = ctx.corpus()?;
    let latent = match &cfg.paths.latent {
        Some(p) => {
            if !p.exists() {
                return Err(CliError::missing(p));
            }
            Some(read_latent_matrix(p)?)
        }
        None => None,
    };

    let gen_path = ctx.checkpoint(GENERATOR_FILE);
    let reused = gen_path.exists();
    let gen = if reused {
        ctx.load_generator()?
    } else {
        let g = ctx.fresh_generator();
        g.save(&gen_path, cfg.seed)?;
        g
    };

    let (mut trainer, targets) = Trainer::new(
        gen.as_dyn(),
        &corpus,
        latent,
        cfg.aggregator.clone(),
        ctx.cfg.setup(),
    )?;
    let report = trainer.run(&targets, Some(&cfg.paths.checkpoints))?;

    let mut log = format!(
        "reference molecules: {}\nwarnings: {} corpus line(s) skipped\n",
        corpus.len(),
        corpus.skipped.len()
    );
    for s in &corpus.skipped {
        log.push_str(&format!("warning: line {}: {}\n", s.line, s.reason));
    }
    log.push_str(&report.log);
    ctx.write_text(&ctx.out("train.log"), &log)?;

    let summary = TrainSummary {
        head: cfg.generator.head.kind(),
        n_trainable_generator: gen.as_dyn().n_trainable(),
        generator_reused: reused,
        n_reference: corpus.len(),
        n_skipped_lines: corpus.skipped.len(),
        skipped: skipped(&corpus.skipped),
        pretrain_final_loss: report.pretrain_losses.last().copied(),
        warmup_final_loss: report.warmup_losses.last().copied(),
        initial_validation: report.initial_validation.clone(),
        initial_holdout_mse: report.initial_holdout_mse,
        final_holdout_mse: report.epochs.last().map(|e| e.holdout_critic_mse),
        best: report.best.clone(),
        checkpoints: report.checkpoints.clone(),
        epochs: report.epochs.clone(),
    };
    ctx.write_json(&ctx.out("train_summary.json"), "patchmol.train/1", &summary)?;
    eprintln!(
        "trained {} epoch(s) on {} molecules ({} line(s) skipped); best epoch {} in {:.1} s",
        report.epochs.len(),
        corpus.len(),
        corpus.skipped.len(),
        report.best.epoch,
        t0.elapsed().as_secs_f64()
    );
    Ok(())
}
