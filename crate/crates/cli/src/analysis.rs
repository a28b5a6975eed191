//! Evaluation subcommands over SMILES files or freshly generated streams.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::ValueEnum;
use patchmol::assemble::calibrate_tau;
use patchmol::chem::{
    canonical_smiles, compute_descriptors, mol_from_smiles, morgan_fingerprint, murcko_scaffold,
    Descriptors, Fingerprint, MolGraph, DEFAULT_RADIUS, DEFAULT_WIDTH,
};
use patchmol::evalx::{
    admet_fast_pass, aromatic_ring_audit_descriptors, diversity_mean_tanimoto, frechet_distance,
    maxmin_diverse_select, pareto_front, pareto_front_constrained, rolling_tanimoto_stress,
    spearman_audit, vun_metrics, EvalError, MetricsReport, ParetoPoint, PropertyMeans,
    ScaffoldCounts, SpearmanAudit, DEFAULT_PAIR_BUDGET,
};
use patchmol::qpatch::{read_patch_batch, PatchTensor};
use rayon::prelude::*;
use serde::Serialize;

use crate::context::{read_smiles_file, Ctx};
use crate::error::CliError;
use crate::generate::{fmt6, generate_batch, GenerateArgs};
use crate::sample::{random_latent, rng_for, Mode, TAG_CALIBRATE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Metric {
    All,
    Vun,
    Properties,
    Diversity,
    Fd,
    Aromatic,
    Scaffolds,
    Admet,
}

/// Parsed entries of a SMILES file; unparseable lines become `None`.
struct Parsed {
    smiles: Vec<String>,
    mols: Vec<Option<MolGraph>>,
}

impl Parsed {
    fn read(path: &std::path::Path) -> Result<Self, CliError> {
        let smiles = read_smiles_file(path)?;
        let mols = smiles.par_iter().map(|s| mol_from_smiles(s).ok()).collect();
        Ok(Parsed { smiles, mols })
    }

    fn valid(&self) -> Vec<&MolGraph> {
        self.mols.iter().flatten().collect()
    }
}

fn descriptors(mols: &[&MolGraph]) -> Vec<Descriptors> {
    mols.par_iter().map(|m| compute_descriptors(m)).collect()
}

fn fingerprints(mols: &[&MolGraph]) -> Vec<Fingerprint> {
    mols.par_iter()
        .map(|m| morgan_fingerprint(m, DEFAULT_RADIUS, DEFAULT_WIDTH))
        .collect()
}

fn scaffold_counts(mols: &[&MolGraph]) -> ScaffoldCounts {
    let keys: Vec<Option<String>> = mols
        .par_iter()
        .map(|m| {
            let s = murcko_scaffold(m);
            (!s.is_empty()).then(|| canonical_smiles(&s))
        })
        .collect();
    let unique: BTreeSet<&String> = keys.iter().flatten().collect();
    ScaffoldCounts {
        n_molecules: mols.len(),
        n_unique_scaffolds: unique.len(),
        n_acyclic: keys.iter().filter(|k| k.is_none()).count(),
    }
}

pub struct EvaluateArgs {
    pub generated: PathBuf,
    pub reference: Option<PathBuf>,
    pub which: Vec<Metric>,
    pub out: Option<PathBuf>,
}

/// Builds the report; each metric failure is recorded and the rest still
/// run.
pub fn evaluate_report(ctx: &Ctx, args: &EvaluateArgs) -> Result<MetricsReport, CliError> {
    let cfg = &ctx.cfg;
    let which: BTreeSet<Metric> = if args.which.is_empty() || args.which.contains(&Metric::All) {
        [
            Metric::Vun,
            Metric::Properties,
            Metric::Diversity,
            Metric::Fd,
            Metric::Aromatic,
            Metric::Scaffolds,
            Metric::Admet,
        ]
        .into()
    } else {
        args.which.iter().copied().collect()
    };
    let needs_ref = which.contains(&Metric::Vun) || which.contains(&Metric::Fd);
    let gen = Parsed::read(&args.generated)?;
    let reference = if needs_ref {
        let p = match &args.reference {
            Some(p) => p.as_path(),
            None => cfg.reference()?,
        };
        Some(Parsed::read(p)?)
    } else {
        None
    };

    let valid = gen.valid();
    let ds = descriptors(&valid);
    let mut report = MetricsReport::new(ctx.provenance.clone());
    if which.contains(&Metric::Vun) {
        let r = reference.as_ref().expect("loaded when needed");
        report.vun = Some(vun_metrics(&gen.smiles, &r.smiles));
    }
    if which.contains(&Metric::Properties) {
        report.properties = Some(PropertyMeans::from_descriptors(&ds));
    }
    let fps = (which.contains(&Metric::Diversity) || which.contains(&Metric::Fd))
        .then(|| fingerprints(&valid));
    if which.contains(&Metric::Diversity) {
        let d = diversity_mean_tanimoto(
            fps.as_ref().expect("computed"),
            DEFAULT_PAIR_BUDGET,
            cfg.seed,
        );
        report.record("diversity", d, |r, d| r.diversity = Some(d));
    }
    if which.contains(&Metric::Fd) {
        let r = reference.as_ref().expect("loaded when needed");
        let ref_fps = fingerprints(&r.valid());
        let fd = frechet_distance(fps.as_ref().expect("computed"), &ref_fps, &cfg.fd);
        report.record("fd", fd, |r, f| {
            r.fd.insert("fingerprint".into(), f);
        });
    }
    if which.contains(&Metric::Aromatic) {
        report.aromatic = Some(aromatic_ring_audit_descriptors(&ds));
    }
    if which.contains(&Metric::Scaffolds) {
        report.scaffolds = Some(scaffold_counts(&valid));
    }
    if which.contains(&Metric::Admet) {
        let mut a = admet_fast_pass(&ds, &cfg.admet);
        a.flags.clear();
        report.admet = Some(a);
    }
    Ok(report)
}

pub fn cmd_evaluate(ctx: &Ctx, args: &EvaluateArgs) -> Result<(), CliError> {
    let report = evaluate_report(ctx, args)?;
    let out = args.out.clone().unwrap_or_else(|| ctx.out("metrics.json"));
    report.write(&out).map_err(|e| CliError::io(&out, e))?;
    for (k, v) in &report.errors {
        eprintln!("warning: metric {k} failed: {v}");
    }
    Ok(())
}

pub struct StressArgs {
    pub input: Option<PathBuf>,
    pub n: usize,
    pub mode: Mode,
    pub window: usize,
}

#[derive(Serialize)]
struct StressSummary {
    source: String,
    window: usize,
    n_attempts: usize,
    n_molecules: usize,
    final_rolling_mean: Option<f64>,
    max_rolling_mean: Option<f64>,
    final_unique_smiles: usize,
    final_unique_scaffolds: usize,
}

pub fn cmd_stress(ctx: &Ctx, args: &StressArgs) -> Result<(), CliError> {
    let (source, attempts, mols): (String, usize, Vec<MolGraph>) = match &args.input {
        Some(p) => {
            let parsed = Parsed::read(p)?;
            let n = parsed.smiles.len();
            (
                p.display().to_string(),
                n,
                parsed.mols.into_iter().flatten().collect(),
            )
        }
        None => {
            let batch = generate_batch(
                ctx,
                &GenerateArgs {
                    n: args.n,
                    mode: args.mode,
                    targets: None,
                },
            )?;
            let label = match args.mode {
                Mode::Descriptor => "generated:descriptor",
                Mode::RandomLatent => "generated:random-latent",
            };
            (
                label.into(),
                args.n,
                batch.results.into_iter().flatten().map(|a| a.mol).collect(),
            )
        }
    };
    let curve = rolling_tanimoto_stress(&mols, args.window)?;
    let rows: Vec<[String; 4]> = (0..mols.len())
        .map(|t| {
            [
                (t + 1).to_string(),
                curve.rolling_mean[t].map(fmt6).unwrap_or_default(),
                curve.unique_smiles[t].to_string(),
                curve.unique_scaffolds[t].to_string(),
            ]
        })
        .collect();
    ctx.write_csv(
        &ctx.out("stress.csv"),
        &[
            "step",
            "rolling_mean_tanimoto",
            "unique_smiles",
            "unique_scaffolds",
        ],
        &rows,
    )?;
    let summary = StressSummary {
        source,
        window: args.window,
        n_attempts: attempts,
        n_molecules: mols.len(),
        final_rolling_mean: curve.rolling_mean.last().copied().flatten(),
        max_rolling_mean: curve
            .rolling_mean
            .iter()
            .flatten()
            .copied()
            .reduce(f64::max),
        final_unique_smiles: curve.unique_smiles.last().copied().unwrap_or(0),
        final_unique_scaffolds: curve.unique_scaffolds.last().copied().unwrap_or(0),
    };
    ctx.write_json(&ctx.out("stress.json"), "patchmol.stress/1", &summary)
}

#[derive(Serialize)]
struct ParetoSummary {
    n_input: usize,
    n_valid: usize,
    front: Vec<usize>,
    constrained_front: Vec<usize>,
    front_smiles: Vec<String>,
    constrained_front_smiles: Vec<String>,
}

pub fn cmd_pareto(ctx: &Ctx, input: &std::path::Path) -> Result<(), CliError> {
    let parsed = Parsed::read(input)?;
    let rows: Vec<(usize, &MolGraph)> = parsed
        .mols
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.as_ref().map(|m| (i, m)))
        .collect();
    let mols: Vec<&MolGraph> = rows.iter().map(|r| r.1).collect();
    let ds = descriptors(&mols);
    let pts: Vec<ParetoPoint> = ds
        .iter()
        .map(|d| ParetoPoint {
            qed: d.qed,
            sa: d.sa,
            logp: d.logp,
        })
        .collect();
    let front = pareto_front(&pts);
    let cfront = pareto_front_constrained(&pts, &ctx.cfg.pareto);
    let canon: Vec<String> = mols.par_iter().map(|m| canonical_smiles(m)).collect();
    let (on, con): (BTreeSet<usize>, BTreeSet<usize>) = (
        front.iter().copied().collect(),
        cfront.iter().copied().collect(),
    );
    let table: Vec<[String; 7]> = (0..pts.len())
        .map(|k| {
            [
                rows[k].0.to_string(),
                canon[k].clone(),
                fmt6(pts[k].qed),
                fmt6(pts[k].sa),
                fmt6(pts[k].logp),
                on.contains(&k).to_string(),
                con.contains(&k).to_string(),
            ]
        })
        .collect();
    ctx.write_csv(
        &ctx.out("pareto.csv"),
        &[
            "line_index",
            "smiles",
            "qed",
            "sa",
            "logp",
            "front",
            "constrained_front",
        ],
        &table,
    )?;
    let summary = ParetoSummary {
        n_input: parsed.smiles.len(),
        n_valid: mols.len(),
        front_smiles: front.iter().map(|&k| canon[k].clone()).collect(),
        constrained_front_smiles: cfront.iter().map(|&k| canon[k].clone()).collect(),
        front: front.iter().map(|&k| rows[k].0).collect(),
        constrained_front: cfront.iter().map(|&k| rows[k].0).collect(),
    };
    ctx.write_json(&ctx.out("pareto.json"), "patchmol.pareto/1", &summary)
}

#[derive(Serialize)]
struct AdmetSummary {
    n_input: usize,
    n_valid: usize,
    n_pass: usize,
    lipinski_rate: f64,
    veber_rate: f64,
    egan_rate: f64,
    all_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    diverse_selection: Option<Vec<String>>,
}

pub fn cmd_admet(
    ctx: &Ctx,
    input: &std::path::Path,
    select: Option<usize>,
) -> Result<(), CliError> {
    let parsed = Parsed::read(input)?;
    let mols = parsed.valid();
    let ds = descriptors(&mols);
    let report = admet_fast_pass(&ds, &ctx.cfg.admet);
    let canon: Vec<String> = mols.par_iter().map(|m| canonical_smiles(m)).collect();
    let table: Vec<Vec<String>> = (0..mols.len())
        .map(|k| {
            let (d, f) = (&ds[k], &report.flags[k]);
            vec![
                canon[k].clone(),
                fmt6(d.mol_weight),
                fmt6(d.logp),
                d.hbd.to_string(),
                d.hba.to_string(),
                d.rotatable_bonds.to_string(),
                fmt6(d.tpsa),
                f.lipinski_violations.to_string(),
                f.lipinski.to_string(),
                f.veber.to_string(),
                f.egan.to_string(),
                f.all.to_string(),
            ]
        })
        .collect();
    ctx.write_csv(
        &ctx.out("admet.csv"),
        &[
            "smiles",
            "mol_weight",
            "logp",
            "hbd",
            "hba",
            "rotatable_bonds",
            "tpsa",
            "lipinski_violations",
            "lipinski",
            "veber",
            "egan",
            "all",
        ],
        &table,
    )?;
    let passing: Vec<usize> = (0..mols.len()).filter(|&k| report.flags[k].all).collect();
    let diverse_selection = match select {
        Some(k) if !passing.is_empty() => {
            let fps: Vec<Fingerprint> =
                fingerprints(&passing.iter().map(|&i| mols[i]).collect::<Vec<_>>());
            let picks = maxmin_diverse_select(&fps, k.min(fps.len()), 0)?;
            Some(
                picks
                    .into_iter()
                    .map(|p| canon[passing[p]].clone())
                    .collect(),
            )
        }
        Some(_) => Some(Vec::new()),
        None => None,
    };
    let summary = AdmetSummary {
        n_input: parsed.smiles.len(),
        n_valid: mols.len(),
        n_pass: passing.len(),
        lipinski_rate: report.lipinski_rate,
        veber_rate: report.veber_rate,
        egan_rate: report.egan_rate,
        all_rate: report.all_rate,
        diverse_selection,
    };
    ctx.write_json(&ctx.out("admet.json"), "patchmol.admet/1", &summary)
}

#[derive(Serialize)]
struct AxisAudit {
    axis: usize,
    #[serde(flatten)]
    audit: Option<SpearmanAudit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct AuditSummary {
    mode: Mode,
    n_attempts: usize,
    n_molecules: usize,
    axes: Vec<AxisAudit>,
}

/// Rank correlation of each latent coordinate with QED, SA and logP over
/// the successful decodes of a generated batch.
pub fn cmd_audit(ctx: &Ctx, n: usize, mode: Mode) -> Result<(), CliError> {
    let batch = generate_batch(
        ctx,
        &GenerateArgs {
            n,
            mode,
            targets: None,
        },
    )?;
    let (codes, props): (Vec<&Vec<f64>>, Vec<(f64, f64, f64)>) = batch
        .draws
        .iter()
        .zip(&batch.results)
        .filter_map(|(d, r)| {
            r.as_ref().map(|a| {
                (
                    &d.code,
                    (a.descriptors.qed, a.descriptors.sa, a.descriptors.logp),
                )
            })
        })
        .unzip();
    let dim = batch.draws.first().map_or(0, |d| d.code.len());
    let axes: Vec<AxisAudit> = (0..dim)
        .map(|j| {
            let col: Vec<f64> = codes.iter().map(|c| c[j]).collect();
            match spearman_audit(&col, &props) {
                Ok(a) => AxisAudit {
                    axis: j,
                    audit: Some(a),
                    error: None,
                },
                Err(e) => AxisAudit {
                    axis: j,
                    audit: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let opt = |v: Option<f64>| v.map(fmt6).unwrap_or_default();
    let table: Vec<Vec<String>> = axes
        .iter()
        .map(|a| {
            let c = a.audit.as_ref();
            vec![
                a.axis.to_string(),
                opt(c.map(|c| c.qed.rho)),
                opt(c.map(|c| c.qed.p_value)),
                opt(c.map(|c| c.sa.rho)),
                opt(c.map(|c| c.sa.p_value)),
                opt(c.map(|c| c.logp.rho)),
                opt(c.map(|c| c.logp.p_value)),
            ]
        })
        .collect();
    ctx.write_csv(
        &ctx.out("audit.csv"),
        &[
            "axis", "rho_qed", "p_qed", "rho_sa", "p_sa", "rho_logp", "p_logp",
        ],
        &table,
    )?;
    let summary = AuditSummary {
        mode,
        n_attempts: n,
        n_molecules: props.len(),
        axes,
    };
    ctx.write_json(&ctx.out("audit.json"), "patchmol.audit/1", &summary)
}

#[derive(Serialize)]
struct TauSummary {
    source: String,
    n_patches: usize,
    quantile: f64,
    activation_eps: f64,
    configured_tau: f64,
    tau: f64,
}

/// Suggests `aggregator.tau` as a quantile of pooled pairwise distances
/// between active patch rows.
pub fn cmd_calibrate_tau(
    ctx: &Ctx,
    patches: Option<&std::path::Path>,
    n: usize,
    quantile: f64,
) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&quantile) {
        return Err(CliError::usage(format!(
            "quantile {quantile} outside [0, 1]"
        )));
    }
    let cfg = &ctx.cfg;
    let (source, batch): (String, Vec<PatchTensor>) = match patches {
        Some(p) => {
            if !p.exists() {
                return Err(CliError::missing(p));
            }
            (p.display().to_string(), read_patch_batch(p)?)
        }
        None => {
            let gen = ctx.load_generator()?;
            let g = gen.as_dyn();
            let draws = random_latent(
                n,
                g.config().latent_dim,
                cfg.generate.latent_scale,
                &mut rng_for(cfg.seed, TAG_CALIBRATE),
            );
            let patches = draws
                .par_iter()
                .map(|d| g.generate(&d.code))
                .collect::<Result<Vec<_>, _>>()?;
            ("generated:random-latent".into(), patches)
        }
    };
    let eps = cfg.aggregator.activation_eps;
    let tau = calibrate_tau(&batch, quantile, eps).ok_or_else(|| {
        CliError::from(EvalError::DegenerateInput(
            "no patch has two active rows".into(),
        ))
    })?;
    let summary = TauSummary {
        source,
        n_patches: batch.len(),
        quantile,
        activation_eps: eps,
        configured_tau: cfg.aggregator.tau,
        tau,
    };
    ctx.write_json(&ctx.out("tau.json"), "patchmol.tau/1", &summary)?;
    println!("{tau}");
    Ok(())
}
