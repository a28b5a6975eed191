//! Conditioner pretraining, discriminator warm-up and the adversarial
//! epochs that steer the frozen patch generator through its input code.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use super::reward::{
    chemistry_reward, conditioner_objective, normalize_rewards, select_topk, warmup_lambda,
    RewardConfig,
};
use super::select::{select_checkpoint, validate_good_at_chem, CheckpointMeta, ValidationStats};
use super::TrainError;
use crate::assemble::{assemble_molecule, AggregatorConfig, Assembled};
use crate::io::atomic_write;
use crate::nets::{
    discriminator_train_step, graph_features, rank_latent_axes, Conditioner, ConditionerConfig,
    CriticConfig, CriticNet, DenseGrad, DiscriminatorConfig, EmaState, GraphDiscriminator,
    GraphFeatures, Standardizer,
};
use crate::qpatch::{sigmoid, PatchGenerator};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: u64,
    pub batch_size: usize,
    pub top_k: usize,
    pub lambda_adv: f64,
    pub lambda_rw_max: f64,
    pub warmup_steps: u64,
    pub epochs: usize,
    /// Adversarial steps per epoch; 0 means one pass over the corpus.
    pub steps_per_epoch: usize,
    pub lr_conditioner: f64,
    pub lr_critic: f64,
    pub critic_steps: usize,
    pub lr_discriminator: f64,
    pub pretrain_epochs: usize,
    pub lr_pretrain: f64,
    pub discriminator_warmup_epochs: usize,
    /// Descriptor jitter as a fraction of each descriptor's IQR.
    pub descriptor_jitter: f64,
    pub validation_size: usize,
    pub holdout_size: usize,
    /// Width of the synthetic latent matrix used when none is supplied.
    pub synthetic_latent_width: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            batch_size: 64,
            top_k: 8,
            lambda_adv: 1.0,
            lambda_rw_max: 1.0,
            warmup_steps: 20,
            epochs: 20,
            steps_per_epoch: 0,
            lr_conditioner: 1e-3,
            lr_critic: 0.05,
            critic_steps: 1,
            lr_discriminator: 0.1,
            pretrain_epochs: 30,
            lr_pretrain: 0.01,
            discriminator_warmup_epochs: 2,
            descriptor_jitter: 0.05,
            validation_size: 32,
            holdout_size: 64,
            synthetic_latent_width: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 || self.top_k == 0 || self.top_k > self.batch_size {
            return Err(TrainError::Config(format!(
                "need 0 < top_k ({}) <= batch_size ({})",
                self.top_k, self.batch_size
            )));
        }
        if self.warmup_steps < 1 {
            return Err(TrainError::Config("warmup_steps must be at least 1".into()));
        }
        if self.validation_size == 0 || self.holdout_size == 0 {
            return Err(TrainError::Config(
                "validation and holdout sizes must be positive".into(),
            ));
        }
        for (name, v) in [
            ("lr_conditioner", self.lr_conditioner),
            ("lr_critic", self.lr_critic),
            ("lr_discriminator", self.lr_discriminator),
            ("lr_pretrain", self.lr_pretrain),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(TrainError::Config(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }
}

/// Every configuration the training loop reads.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSetup {
    pub train: TrainConfig,
    pub reward: RewardConfig,
    pub conditioner: ConditionerConfig,
    pub critic: CriticConfig,
    pub discriminator: DiscriminatorConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub steps: usize,
    pub attempts: usize,
    pub failures: usize,
    pub mean_reward: f64,
    pub critic_loss: f64,
    pub discriminator_loss: f64,
    pub conditioner_loss: f64,
    pub lambda_rw: f64,
    pub holdout_critic_mse: f64,
    pub good_at_chem: f64,
    pub mean_qed: f64,
    pub mean_sa: f64,
    pub mean_logp: f64,
}

impl EpochMetrics {
    pub const CSV_HEADER: &'static str =
        "epoch,steps,attempts,failures,mean_reward,critic_loss,discriminator_loss,\
conditioner_loss,lambda_rw,holdout_critic_mse,good_at_chem,mean_qed,mean_sa,mean_logp";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.10},{:.10},{:.10},{:.10},{:.10},{:.10},{:.10},{:.10},{:.10},{:.10}",
            self.epoch,
            self.steps,
            self.attempts,
            self.failures,
            self.mean_reward,
            self.critic_loss,
            self.discriminator_loss,
            self.conditioner_loss,
            self.lambda_rw,
            self.holdout_critic_mse,
            self.good_at_chem,
            self.mean_qed,
            self.mean_sa,
            self.mean_logp
        )
    }
}

/// Decodes latent codes through the generator and the assembler in
/// parallel; `None` marks a generation failure.
pub fn decode_codes(
    gen: &dyn PatchGenerator,
    zs: &[Vec<f64>],
    agg: &AggregatorConfig,
) -> Vec<Option<Assembled>> {
    zs.par_iter()
        .map(|z| {
            gen.generate(z)
                .ok()
                .and_then(|p| assemble_molecule(&p, agg).ok())
        })
        .collect()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Training state around a frozen generator.
pub struct Trainer<'a> {
    pub generator: &'a dyn PatchGenerator,
    pub corpus: &'a Corpus,
    pub aggregator: AggregatorConfig,
    pub setup: TrainSetup,
    pub conditioner: Conditioner,
    pub critic: CriticNet,
    pub discriminator: GraphDiscriminator,
    pub ema: EmaState,
    pub step: u64,
    rng: ChaCha8Rng,
    iqr: Vec<f64>,
    validation_inputs: Vec<Vec<f64>>,
    holdout_codes: Vec<Vec<f64>>,
    holdout_features: Vec<Option<GraphFeatures>>,
}

/// Child seed for component `tag`.
fn derive_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(tag.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

impl<'a> Trainer<'a> {
    /// Ranks latent axes against the corpus descriptors, initializes every
    /// network, and fixes the validation slice. `latent` defaults to a
    /// synthetic matrix.
    pub fn new(
        generator: &'a dyn PatchGenerator,
        corpus: &'a Corpus,
        latent: Option<Vec<Vec<f64>>>,
        aggregator: AggregatorConfig,
        setup: TrainSetup,
    ) -> Result<(Self, Vec<Vec<f64>>), TrainError> {
        setup.train.validate()?;
        setup.reward.validate()?;
        aggregator.validate()?;
        let cfg = &setup.train;
        if corpus.len() < 3 {
            return Err(TrainError::Config(format!(
                "corpus has {} usable molecules, need at least 3",
                corpus.len()
            )));
        }
        let inputs = corpus.inputs();
        let latent = match latent {
            Some(z) => z,
            None => super::corpus::synthetic_latent_matrix(
                &inputs,
                cfg.synthetic_latent_width,
                derive_seed(cfg.seed, 1),
            )?,
        };
        if latent.len() != corpus.len() {
            return Err(TrainError::ShapeMismatch {
                what: "latent matrix rows",
                expected: corpus.len(),
                found: latent.len(),
            });
        }
        let k = generator.config().latent_dim;
        let axes = rank_latent_axes(&latent, &inputs, k)?;
        let conditioner = Conditioner::init(
            &setup.conditioner,
            Standardizer::fit(&inputs)?,
            axes.clone(),
            derive_seed(cfg.seed, 2),
        )?;
        let critic = CriticNet::init(k, &setup.critic, derive_seed(cfg.seed, 3));
        let discriminator =
            GraphDiscriminator::init(setup.discriminator.clone(), derive_seed(cfg.seed, 4))?;
        let ema = EmaState::new(&discriminator.flat_params(), setup.discriminator.ema_decay);
        let targets: Vec<Vec<f64>> = latent
            .iter()
            .map(|r| axes.iter().map(|&a| r[a]).collect())
            .collect();

        let mut by_qed: Vec<usize> = (0..corpus.len()).collect();
        by_qed.sort_by(|&a, &b| inputs[a][0].total_cmp(&inputs[b][0]).then(a.cmp(&b)));
        let nv = cfg.validation_size;
        let validation_inputs = (0..nv)
            .map(|i| {
                let pos = ((i as f64 + 0.5) / nv as f64 * corpus.len() as f64) as usize;
                inputs[by_qed[pos.min(corpus.len() - 1)]].clone()
            })
            .collect();

        let t = Trainer {
            generator,
            corpus,
            aggregator,
            conditioner,
            critic,
            discriminator,
            ema,
            step: 0,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 5)),
            iqr: corpus.input_iqr(),
            validation_inputs,
            holdout_codes: Vec::new(),
            holdout_features: Vec::new(),
            setup,
        };
        Ok((t, targets))
    }

    fn cfg(&self) -> &TrainConfig {
        &self.setup.train
    }

    /// Supervised fit of the conditioner to the selected latent columns;
    /// returns the mean loss per epoch.
    pub fn pretrain_conditioner(&mut self, targets: &[Vec<f64>]) -> Result<Vec<f64>, TrainError> {
        let inputs = self.corpus.inputs();
        let (epochs, bs, lr) = (
            self.cfg().pretrain_epochs,
            self.cfg().batch_size,
            self.cfg().lr_pretrain,
        );
        let mut losses = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let mut order: Vec<usize> = (0..inputs.len()).collect();
            shuffle(&mut order, &mut self.rng);
            let mut total = 0.0;
            let mut batches = 0;
            for chunk in order.chunks(bs) {
                let xs: Vec<Vec<f64>> = chunk.iter().map(|&i| inputs[i].clone()).collect();
                let zs: Vec<Vec<f64>> = chunk.iter().map(|&i| targets[i].clone()).collect();
                total += self.conditioner.train_step(&xs, &zs, lr, &mut self.rng)?;
                batches += 1;
            }
            losses.push(total / batches.max(1) as f64);
        }
        Ok(losses)
    }

    fn jitter_descriptors(&mut self, x: &[f64]) -> Vec<f64> {
        let f = self.cfg().descriptor_jitter;
        x.iter()
            .zip(&self.iqr)
            .map(|(v, iqr)| {
                let s = f * iqr;
                if s > 0.0 {
                    let e: f64 = StandardNormal.sample(&mut self.rng);
                    v + s * e
                } else {
                    *v
                }
            })
            .collect()
    }

    fn jitter_code(&mut self, z: &mut [f64]) {
        let s = self.setup.conditioner.jitter_sigma;
        if s > 0.0 {
            let n = Normal::new(0.0, s).expect("positive sigma");
            for v in z.iter_mut() {
                *v += n.sample(&mut self.rng);
            }
        }
    }

    fn sample_rows(&mut self, n: usize) -> Vec<usize> {
        (0..n)
            .map(|_| self.rng.random_range(0..self.corpus.len()))
            .collect()
    }

    fn teacher(&self) -> Result<GraphDiscriminator, TrainError> {
        Ok(self.discriminator.with_params(&self.ema.shadow)?)
    }

    /// Teacher score `σ(logit)` of each decode; failures score 0.
    fn teacher_targets(&self, feats: &[Option<GraphFeatures>]) -> Result<Vec<f64>, TrainError> {
        let teacher = self.teacher()?;
        feats
            .par_iter()
            .map(|f| match f {
                Some(f) => Ok(sigmoid(teacher.forward(f)?)),
                None => Ok(0.0),
            })
            .collect()
    }

    fn real_batch(&mut self, n: usize) -> Vec<GraphFeatures> {
        self.sample_rows(n)
            .into_iter()
            .map(|i| self.corpus.mols[i].features.clone())
            .collect()
    }

    /// Discriminator warm-up on the corpus against current decodes; the EMA
    /// teacher is then reset to the warmed-up weights.
    pub fn warmup_discriminator(&mut self) -> Result<Vec<f64>, TrainError> {
        let bs = self.cfg().batch_size;
        let lr = self.cfg().lr_discriminator;
        let mut losses = Vec::new();
        for _ in 0..self.cfg().discriminator_warmup_epochs {
            let mut order: Vec<usize> = (0..self.corpus.len()).collect();
            shuffle(&mut order, &mut self.rng);
            let mut total = 0.0;
            let mut steps = 0;
            for chunk in order.chunks(bs) {
                let real: Vec<GraphFeatures> = chunk
                    .iter()
                    .map(|&i| self.corpus.mols[i].features.clone())
                    .collect();
                let mut zs = Vec::with_capacity(chunk.len());
                for &i in chunk {
                    let x = self.jitter_descriptors(&self.corpus.mols[i].inputs);
                    let mut z = self.conditioner.forward(&x)?;
                    self.jitter_code(&mut z);
                    zs.push(z);
                }
                let fake: Vec<GraphFeatures> = decode_codes(self.generator, &zs, &self.aggregator)
                    .into_iter()
                    .flatten()
                    .filter_map(|a| graph_features(&a.mol).ok())
                    .collect();
                if fake.is_empty() {
                    continue;
                }
                total += discriminator_train_step(
                    &mut self.discriminator,
                    &mut self.ema,
                    &real,
                    &fake,
                    lr,
                )?;
                steps += 1;
            }
            losses.push(total / steps.max(1) as f64);
        }
        self.ema = EmaState::new(
            &self.discriminator.flat_params(),
            self.setup.discriminator.ema_decay,
        );
        Ok(losses)
    }

    /// Fixes the critic's held-out batch: jittered conditioner codes for
    /// seeded corpus rows, decoded once.
    pub fn fix_holdout(&mut self) -> Result<(), TrainError> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.cfg().seed, 6));
        let n = self.cfg().holdout_size;
        let mut codes = Vec::with_capacity(n);
        for _ in 0..n {
            let i = rng.random_range(0..self.corpus.len());
            let mut z = self.conditioner.forward(&self.corpus.mols[i].inputs)?;
            let s = self.setup.conditioner.jitter_sigma;
            for v in z.iter_mut() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *v += s * e;
            }
            codes.push(z);
        }
        self.holdout_features = decode_codes(self.generator, &codes, &self.aggregator)
            .into_iter()
            .map(|a| a.and_then(|a| graph_features(&a.mol).ok()))
            .collect();
        self.holdout_codes = codes;
        Ok(())
    }

    /// Critic MSE on the held-out batch against the current teacher.
    pub fn holdout_critic_mse(&self) -> Result<f64, TrainError> {
        let targets = self.teacher_targets(&self.holdout_features)?;
        Ok(self.critic.mse(&self.holdout_codes, &targets)?)
    }

    /// Decodes the validation slice without jitter.
    pub fn validate(&self) -> Result<ValidationStats, TrainError> {
        let zs = self
            .validation_inputs
            .iter()
            .map(|x| self.conditioner.forward(x))
            .collect::<Result<Vec<_>, _>>()?;
        let ds: Vec<_> = decode_codes(self.generator, &zs, &self.aggregator)
            .into_iter()
            .flatten()
            .map(|a| a.descriptors)
            .collect();
        Ok(validate_good_at_chem(&ds))
    }

    fn steps_per_epoch(&self) -> usize {
        match self.cfg().steps_per_epoch {
            0 => self.corpus.len().div_ceil(self.cfg().batch_size),
            s => s,
        }
    }

    /// One adversarial epoch. The generator is only read.
    pub fn train_adversarial_epoch(&mut self, epoch: usize) -> Result<EpochMetrics, TrainError> {
        let cfg = self.cfg().clone();
        let steps = self.steps_per_epoch();
        let (mut attempts, mut failures) = (0, 0);
        let (mut rewards_seen, mut critic_losses, mut disc_losses, mut cond_losses) =
            (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut lambda_rw = 0.0;
        for _ in 0..steps {
            // Conditioner forward in training mode on jittered descriptors.
            let rows = self.sample_rows(cfg.batch_size);
            let mut traces = Vec::with_capacity(rows.len());
            let mut zs = Vec::with_capacity(rows.len());
            for &i in &rows {
                let x = self.jitter_descriptors(&self.corpus.mols[i].inputs);
                let xs = self.conditioner.standardizer.apply(&x);
                let trace = self
                    .conditioner
                    .net
                    .forward_trace(&xs, Some(&mut self.rng))?;
                let mut z = trace.output.clone();
                self.jitter_code(&mut z);
                traces.push(trace);
                zs.push(z);
            }
            let decoded = decode_codes(self.generator, &zs, &self.aggregator);
            attempts += decoded.len();
            failures += decoded.iter().filter(|d| d.is_none()).count();
            let feats: Vec<Option<GraphFeatures>> = decoded
                .iter()
                .map(|d| d.as_ref().and_then(|a| graph_features(&a.mol).ok()))
                .collect();

            // Critic regression onto the teacher's scores.
            let targets = self.teacher_targets(&feats)?;
            let mut closs = 0.0;
            for _ in 0..cfg.critic_steps.max(1) {
                closs = self.critic.fit_batch(&zs, &targets, cfg.lr_critic)?;
            }
            critic_losses.push(closs);

            // Rewards over successful decodes, then top-k.
            let ok: Vec<usize> = (0..decoded.len())
                .filter(|&i| decoded[i].is_some())
                .collect();
            let raw: Vec<f64> = ok
                .iter()
                .map(|&i| {
                    chemistry_reward(
                        &decoded[i].as_ref().expect("filtered").descriptors,
                        &self.setup.reward,
                    )
                })
                .collect();
            rewards_seen.extend(&raw);
            let norm = normalize_rewards(&raw, &self.setup.reward);
            let top: Vec<usize> = select_topk(&norm, cfg.top_k.min(ok.len()));
            lambda_rw = warmup_lambda(self.step, cfg.lambda_rw_max, cfg.warmup_steps);
            if !top.is_empty() {
                let k = top.len() as f64;
                let mut grad = DenseGrad::zeros_like(&self.conditioner.net);
                let mut critic_vals = Vec::with_capacity(top.len());
                for &t in &top {
                    let i = ok[t];
                    critic_vals.push(self.critic.value(&zs[i])?);
                    let gz: Vec<f64> = self
                        .critic
                        .input_gradient(&zs[i])?
                        .into_iter()
                        .map(|g| -cfg.lambda_adv * g / k)
                        .collect();
                    self.conditioner.net.backward(&traces[i], &gz, &mut grad);
                }
                let top_rewards: Vec<f64> = top.iter().map(|&t| norm[t]).collect();
                cond_losses.push(conditioner_objective(
                    &critic_vals,
                    &top_rewards,
                    cfg.lambda_adv,
                    lambda_rw,
                )?);
                self.conditioner
                    .net
                    .apply_gradient(&grad, cfg.lr_conditioner);
            }

            // Discriminator on real versus generated graphs, then EMA.
            let fake: Vec<GraphFeatures> = feats.into_iter().flatten().collect();
            if !fake.is_empty() {
                let real = self.real_batch(fake.len());
                disc_losses.push(discriminator_train_step(
                    &mut self.discriminator,
                    &mut self.ema,
                    &real,
                    &fake,
                    cfg.lr_discriminator,
                )?);
            }
            self.step += 1;
        }
        let v = self.validate()?;
        Ok(EpochMetrics {
            epoch,
            steps,
            attempts,
            failures,
            mean_reward: mean(rewards_seen),
            critic_loss: mean(critic_losses),
            discriminator_loss: mean(disc_losses),
            conditioner_loss: mean(cond_losses),
            lambda_rw,
            holdout_critic_mse: self.holdout_critic_mse()?,
            good_at_chem: v.good_at_chem,
            mean_qed: v.mean_qed,
            mean_sa: v.mean_sa,
            mean_logp: v.mean_logp,
        })
    }

    /// Pretraining, warm-up, then `epochs` adversarial epochs with
    /// validation after each. Epoch 0 is the warmed-up starting point and
    /// competes in checkpoint selection. With `out_dir`, per-epoch
    /// conditioner checkpoints, metadata sidecars, a CSV log and a `best`
    /// marker are written there.
    pub fn run(
        &mut self,
        targets: &[Vec<f64>],
        out_dir: Option<&Path>,
    ) -> Result<TrainReport, TrainError> {
        let pretrain_losses = self.pretrain_conditioner(targets)?;
        let warmup_losses = self.warmup_discriminator()?;
        self.fix_holdout()?;
        let seed = self.cfg().seed;
        let v0 = self.validate()?;
        let initial_holdout_mse = self.holdout_critic_mse()?;
        let mut metas = vec![CheckpointMeta::from_stats(0, seed, &v0)];
        let mut epochs = Vec::new();
        let mut best_conditioner = self.conditioner.clone();
        let mut best_epoch = 0;
        let mut log = String::from(EpochMetrics::CSV_HEADER);
        log.push('\n');
        if let Some(dir) = out_dir {
            std::fs::create_dir_all(dir)?;
            self.write_epoch(dir, &metas[0])?;
        }
        for e in 1..=self.cfg().epochs {
            let m = self.train_adversarial_epoch(e)?;
            log.push_str(&m.csv_row());
            log.push('\n');
            let meta = CheckpointMeta {
                epoch: e,
                seed,
                good_at_chem: m.good_at_chem,
                mean_qed: m.mean_qed,
                mean_sa: m.mean_sa,
                mean_logp: m.mean_logp,
            };
            if let Some(dir) = out_dir {
                self.write_epoch(dir, &meta)?;
                atomic_write(&dir.join("metrics.csv"), log.as_bytes())?;
            }
            metas.push(meta);
            if select_checkpoint(&metas)?.epoch == e {
                best_conditioner = self.conditioner.clone();
                best_epoch = e;
            }
            epochs.push(m);
        }
        let best = select_checkpoint(&metas)?.clone();
        debug_assert_eq!(best.epoch, best_epoch);
        if let Some(dir) = out_dir {
            atomic_write(&dir.join("metrics.csv"), log.as_bytes())?;
            let marker = serde_json::json!({
                "epoch": best.epoch,
                "conditioner": conditioner_file(best.epoch),
                "meta": best,
            });
            atomic_write(
                &dir.join("best.json"),
                serde_json::to_string_pretty(&marker)?.as_bytes(),
            )?;
            best_conditioner.save(&dir.join("conditioner_best.pqtb"), Some(seed))?;
            self.critic.save(&dir.join("critic.pqtb"), Some(seed))?;
            self.discriminator.save(
                &dir.join("discriminator.pqtb"),
                Some(&self.ema),
                Some(seed),
            )?;
        }
        Ok(TrainReport {
            pretrain_losses,
            warmup_losses,
            initial_validation: v0,
            initial_holdout_mse,
            epochs,
            checkpoints: metas,
            best,
            best_conditioner,
            log,
        })
    }

    fn write_epoch(&self, dir: &Path, meta: &CheckpointMeta) -> Result<(), TrainError> {
        self.conditioner
            .save(&dir.join(conditioner_file(meta.epoch)), Some(meta.seed))?;
        atomic_write(
            &dir.join(format!("meta_epoch{:03}.json", meta.epoch)),
            serde_json::to_string_pretty(meta)?.as_bytes(),
        )?;
        Ok(())
    }
}

pub fn conditioner_file(epoch: usize) -> PathBuf {
    PathBuf::from(format!("conditioner_epoch{epoch:03}.pqtb"))
}

fn shuffle(v: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        v.swap(i, rng.random_range(0..=i));
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub pretrain_losses: Vec<f64>,
    pub warmup_losses: Vec<f64>,
    pub initial_validation: ValidationStats,
    pub initial_holdout_mse: f64,
    pub epochs: Vec<EpochMetrics>,
    /// Epoch 0 (after warm-up) followed by every adversarial epoch.
    pub checkpoints: Vec<CheckpointMeta>,
    pub best: CheckpointMeta,
    pub best_conditioner: Conditioner,
    /// Per-epoch CSV log, header included.
    pub log: String,
}
