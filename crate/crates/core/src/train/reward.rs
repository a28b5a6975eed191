//! Chemistry-shaped reward, robust normalization, cosine warm-up, top-k
//! selection and the conditioner objective.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::chem::Descriptors;

/// Reward shaping weights: a QED gain, three hinge penalties of the form
/// `w·[x − knot]₊ / scale`, and a capped heteroatom bonus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub qed_weight: f64,
    pub sa_weight: f64,
    pub sa_knot: f64,
    pub sa_scale: f64,
    pub logp_weight: f64,
    pub logp_knot: f64,
    pub logp_scale: f64,
    pub size_weight: f64,
    pub size_knot: f64,
    pub size_scale: f64,
    pub hetero_weight: f64,
    pub hetero_cap: u32,
    /// Normalized rewards are clipped to `±clip_bound`.
    pub clip_bound: f64,
    /// Lower bound on the MAD used as the normalization scale.
    pub mad_floor: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            qed_weight: 1.6,
            sa_weight: 0.45,
            sa_knot: 4.5,
            sa_scale: 5.5,
            logp_weight: 0.25,
            logp_knot: 3.8,
            logp_scale: 5.2,
            size_weight: 0.02,
            size_knot: 30.0,
            size_scale: 20.0,
            hetero_weight: 0.03,
            hetero_cap: 5,
            clip_bound: 3.0,
            mad_floor: 1e-6,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.clip_bound > 0.0) || !(self.mad_floor > 0.0) {
            return Err(TrainError::Config(
                "clip_bound and mad_floor must be positive".into(),
            ));
        }
        if self.sa_scale <= 0.0 || self.logp_scale <= 0.0 || self.size_scale <= 0.0 {
            return Err(TrainError::Config("hinge scales must be positive".into()));
        }
        Ok(())
    }
}

fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

pub fn chemistry_reward(d: &Descriptors, cfg: &RewardConfig) -> f64 {
    cfg.qed_weight * d.qed
        - cfg.sa_weight * hinge(d.sa - cfg.sa_knot) / cfg.sa_scale
        - cfg.logp_weight * hinge(d.logp - cfg.logp_knot) / cfg.logp_scale
        - cfg.size_weight * hinge(d.n_heavy_atoms as f64 - cfg.size_knot) / cfg.size_scale
        + cfg.hetero_weight * d.n_hetero.min(cfg.hetero_cap) as f64
}

/// Median with the two middle values averaged for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(r − median) / max(MAD, floor)`, clipped to `±clip_bound`.
pub fn normalize_rewards(rs: &[f64], cfg: &RewardConfig) -> Vec<f64> {
    if rs.is_empty() {
        return Vec::new();
    }
    let m = median(rs);
    let dev: Vec<f64> = rs.iter().map(|r| (r - m).abs()).collect();
    let scale = median(&dev).max(cfg.mad_floor);
    rs.iter()
        .map(|r| ((r - m) / scale).clamp(-cfg.clip_bound, cfg.clip_bound))
        .collect()
}

/// `λ_max · ½(1 − cos(π·min(t/T, 1)))`, with the cosine written as
/// `−sin(π(u − ½))` so the start, midpoint and end come out exact.
pub fn warmup_lambda(t: u64, lambda_max: f64, warmup_steps: u64) -> f64 {
    let frac = (t as f64 / warmup_steps.max(1) as f64).min(1.0);
    lambda_max * 0.5 * (1.0 + (PI * (frac - 0.5)).sin())
}

/// Indices of the `k` largest scores, best first, ties to the smaller index.
pub fn select_topk(scores: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// `−λ_adv·mean(critic) − λ_rw·mean(reward)` over the selected codes.
pub fn conditioner_objective(
    critic_vals: &[f64],
    rewards: &[f64],
    lambda_adv: f64,
    lambda_rw: f64,
) -> Result<f64, TrainError> {
    if critic_vals.len() != rewards.len() {
        return Err(TrainError::ShapeMismatch {
            what: "top-k rewards",
            expected: critic_vals.len(),
            found: rewards.len(),
        });
    }
    if critic_vals.is_empty() {
        return Ok(0.0);
    }
    let n = critic_vals.len() as f64;
    let mc = critic_vals.iter().sum::<f64>() / n;
    let mr = rewards.iter().sum::<f64>() / n;
    Ok(-lambda_adv * mc - lambda_rw * mr)
}
