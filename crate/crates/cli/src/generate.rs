//! `generate`: decode a batch of latent codes into molecules.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use patchmol::assemble::{Assembled, Route};
use patchmol::chem::Descriptors;
use patchmol::evalx::{
    aromatic_ring_audit_descriptors, logp_quantile_calibration, AromaticAudit, MonotoneMap,
    PropertyMeans,
};
use patchmol::nets::CONDITIONER_DESCRIPTORS;
use patchmol::train::{decode_codes, median};
use serde::Serialize;

use crate::context::Ctx;
use crate::error::CliError;
use crate::sample::{
    descriptor_codes, random_latent, read_target_grid, rng_for, Draw, Mode, Source, TAG_GENERATE,
};

pub struct GenerateArgs {
    pub n: usize,
    pub mode: Mode,
    pub targets: Option<PathBuf>,
}

/// Attempts in order with their decodes; `None` marks a failure.
pub struct Batch {
    pub draws: Vec<Draw>,
    pub results: Vec<Option<Assembled>>,
    pub grid: Option<Vec<Vec<f64>>>,
    pub n_trainable: usize,
}

pub fn generate_batch(ctx: &Ctx, args: &GenerateArgs) -> Result<Batch, CliError> {
    let cfg = &ctx.cfg;
    let gen = ctx.load_generator()?;
    let mut rng = rng_for(cfg.seed, TAG_GENERATE);
    let (draws, grid) = match args.mode {
        Mode::RandomLatent => {
            if args.targets.is_some() {
                return Err(CliError::usage("--targets applies to descriptor mode only"));
            }
            let dim = gen.as_dyn().config().latent_dim;
            (
                random_latent(args.n, dim, cfg.generate.latent_scale, &mut rng),
                None,
            )
        }
        Mode::Descriptor => {
            let conditioner = ctx.load_conditioner()?;
            let corpus = match (&args.targets, &cfg.paths.reference) {
                (Some(_), None) => None,
                _ => Some(ctx.corpus()?),
            };
            match &args.targets {
                Some(p) => {
                    let grid = read_target_grid(p, corpus.as_ref())?;
                    let d = descriptor_codes(
                        args.n,
                        &Source::Grid(&grid),
                        &conditioner,
                        &cfg.generate,
                        &mut rng,
                    )?;
                    (d, Some(grid))
                }
                None => {
                    let corpus = corpus.expect("loaded above");
                    if corpus.is_empty() {
                        return Err(CliError::usage("reference corpus has no usable molecules"));
                    }
                    let d = descriptor_codes(
                        args.n,
                        &Source::Corpus(&corpus),
                        &conditioner,
                        &cfg.generate,
                        &mut rng,
                    )?;
                    (d, None)
                }
            }
        }
    };
    let codes: Vec<Vec<f64>> = draws.iter().map(|d| d.code.clone()).collect();
    let results = decode_codes(gen.as_dyn(), &codes, &cfg.aggregator);
    Ok(Batch {
        draws,
        results,
        grid,
        n_trainable: gen.as_dyn().n_trainable(),
    })
}

#[derive(Serialize)]
struct ScoreRow<'a> {
    attempt: usize,
    target: Option<usize>,
    status: &'static str,
    smiles: &'a str,
    qed: Option<String>,
    sa: Option<String>,
    logp: Option<String>,
    mol_weight: Option<String>,
    tpsa: Option<String>,
    n_heavy_atoms: Option<u32>,
    n_aromatic_rings: Option<u32>,
    route: Option<Route>,
    fallback: Option<bool>,
}

const SCORE_HEADER: [&str; 13] = [
    "attempt",
    "target",
    "status",
    "smiles",
    "qed",
    "sa",
    "logp",
    "mol_weight",
    "tpsa",
    "n_heavy_atoms",
    "n_aromatic_rings",
    "route",
    "fallback",
];

/// Fixed six-decimal rendering keeps tables byte-stable.
pub fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

#[derive(Serialize)]
struct TargetSummary {
    target: usize,
    requested: Vec<f64>,
    attempts: usize,
    successes: usize,
    median_qed: Option<f64>,
    median_logp: Option<f64>,
    median_sa: Option<f64>,
    qed_mae: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    mode: Mode,
    head: &'static str,
    n_trainable: usize,
    n_attempts: usize,
    n_success: usize,
    n_failures: usize,
    failure_rate: f64,
    n_unique: usize,
    uniqueness: f64,
    properties: PropertyMeans,
    aromatic: AromaticAudit,
    #[serde(skip_serializing_if = "Option::is_none")]
    qed_mae: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    targets: Vec<TargetSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    logp_calibration: Option<MonotoneMap>,
}

fn per_target(grid: &[Vec<f64>], batch: &Batch) -> Vec<TargetSummary> {
    let mut groups: Vec<(usize, Vec<&Descriptors>)> = vec![(0, Vec::new()); grid.len()];
    for (d, r) in batch.draws.iter().zip(&batch.results) {
        let t = d.target.expect("grid draws carry a target");
        groups[t].0 += 1;
        if let Some(a) = r {
            groups[t].1.push(&a.descriptors);
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(t, (attempts, ds))| {
            let med = |f: fn(&Descriptors) -> f64| {
                let v: Vec<f64> = ds.iter().map(|d| f(d)).collect();
                (!v.is_empty()).then(|| median(&v))
            };
            let qed_mae = (!ds.is_empty()).then(|| {
                ds.iter().map(|d| (d.qed - grid[t][0]).abs()).sum::<f64>() / ds.len() as f64
            });
            TargetSummary {
                target: t,
                requested: grid[t].clone(),
                attempts,
                successes: ds.len(),
                median_qed: med(|d| d.qed),
                median_logp: med(|d| d.logp),
                median_sa: med(|d| d.sa),
                qed_mae,
            }
        })
        .collect()
}

pub fn cmd_generate(ctx: &Ctx, args: &GenerateArgs) -> Result<(), CliError> {
    let t0 = Instant::now();
    let batch = generate_batch(ctx, args)?;
    let head = ctx.cfg.generator.head.kind();

    let mut smi = String::new();
    let mut rows = Vec::with_capacity(batch.results.len());
    for (i, (d, r)) in batch.draws.iter().zip(&batch.results).enumerate() {
        let row = match r {
            Some(a) => {
                smi.push_str(&a.smiles);
                smi.push('\n');
                let x = &a.descriptors;
                ScoreRow {
                    attempt: i,
                    target: d.target,
                    status: "ok",
                    smiles: &a.smiles,
                    qed: Some(fmt6(x.qed)),
                    sa: Some(fmt6(x.sa)),
                    logp: Some(fmt6(x.logp)),
                    mol_weight: Some(fmt6(x.mol_weight)),
                    tpsa: Some(fmt6(x.tpsa)),
                    n_heavy_atoms: Some(x.n_heavy_atoms),
                    n_aromatic_rings: Some(x.n_aromatic_rings),
                    route: Some(a.route),
                    fallback: Some(a.fallback),
                }
            }
            None => ScoreRow {
                attempt: i,
                target: d.target,
                status: "failure",
                smiles: "",
                qed: None,
                sa: None,
                logp: None,
                mol_weight: None,
                tpsa: None,
                n_heavy_atoms: None,
                n_aromatic_rings: None,
                route: None,
                fallback: None,
            },
        };
        rows.push(row);
    }

    let ok: Vec<&Assembled> = batch.results.iter().flatten().collect();
    let ds: Vec<Descriptors> = ok.iter().map(|a| a.descriptors.clone()).collect();
    let unique: BTreeSet<&str> = ok.iter().map(|a| a.smiles.as_str()).collect();
    let n = batch.results.len();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let targets = batch
        .grid
        .as_deref()
        .map(|g| per_target(g, &batch))
        .unwrap_or_default();
    let qed_mae = batch.grid.as_ref().and_then(|g| {
        let errs: Vec<f64> = batch
            .draws
            .iter()
            .zip(&batch.results)
            .filter_map(|(d, r)| {
                r.as_ref()
                    .map(|a| (a.descriptors.qed - g[d.target.expect("grid")][0]).abs())
            })
            .collect();
        (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
    });
    let logp_calibration = {
        let pairs: Vec<(f64, f64)> = targets
            .iter()
            .filter_map(|t| t.median_logp.map(|m| (t.requested[1], m)))
            .collect();
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        logp_quantile_calibration(&x, &y).ok()
    };
    let summary = Summary {
        mode: args.mode,
        head,
        n_trainable: batch.n_trainable,
        n_attempts: n,
        n_success: ok.len(),
        n_failures: n - ok.len(),
        failure_rate: ratio(n - ok.len(), n),
        n_unique: unique.len(),
        uniqueness: ratio(unique.len(), ok.len()),
        properties: PropertyMeans::from_descriptors(&ds),
        aromatic: aromatic_ring_audit_descriptors(&ds),
        qed_mae,
        targets,
        logp_calibration,
    };

    ctx.write_text(&ctx.out("generated.smi"), &smi)?;
    ctx.write_csv(&ctx.out("scores.csv"), &SCORE_HEADER, &rows)?;
    if let Some(grid) = &batch.grid {
        let mut header: Vec<&str> = vec!["target"];
        header.extend(CONDITIONER_DESCRIPTORS.iter().map(|d| *d));
        header.extend([
            "attempts",
            "successes",
            "median_qed",
            "median_logp",
            "median_sa",
            "qed_mae",
        ]);
        let opt = |v: Option<f64>| v.map(fmt6).unwrap_or_default();
        let rows: Vec<Vec<String>> = summary
            .targets
            .iter()
            .map(|t| {
                let mut r = vec![t.target.to_string()];
                r.extend(grid[t.target].iter().map(|v| fmt6(*v)));
                r.extend([
                    t.attempts.to_string(),
                    t.successes.to_string(),
                    opt(t.median_qed),
                    opt(t.median_logp),
                    opt(t.median_sa),
                    opt(t.qed_mae),
                ]);
                r
            })
            .collect();
        ctx.write_csv(&ctx.out("targets.csv"), &header, &rows)?;
    }
    ctx.write_json(&ctx.out("summary.json"), "patchmol.generate/1", &summary)?;
    eprintln!(
        "generated {} of {} attempts ({} unique) with the {head} head in {:.2} s",
        ok.len(),
        n,
        unique.len(),
        t0.elapsed().as_secs_f64()
    );
    if n > 0 && ok.is_empty() {
        return Err(CliError::internal("every generation attempt failed"));
    }
    Ok(())
}
