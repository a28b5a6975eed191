//! Non-dominated filtering under QED up, SA down and logP down.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub qed: f64,
    pub sa: f64,
    pub logp: f64,
}

/// Feasibility window applied before the constrained front.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParetoConfig {
    pub sa_max: f64,
    pub logp_min: f64,
    pub logp_max: f64,
}

impl Default for ParetoConfig {
    fn default() -> Self {
        ParetoConfig {
            sa_max: 6.0,
            logp_min: -0.5,
            logp_max: 5.0,
        }
    }
}

impl ParetoConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.logp_min <= self.logp_max) || self.sa_max.is_nan() {
            return Err(EvalError::Config(format!(
                "logP window [{}, {}] is not ordered",
                self.logp_min, self.logp_max
            )));
        }
        Ok(())
    }

    pub fn admits(&self, p: &ParetoPoint) -> bool {
        p.sa <= self.sa_max && p.logp >= self.logp_min && p.logp <= self.logp_max
    }
}

/// `a` is at least as good as `b` in every objective and better in one.
pub fn dominates(a: &ParetoPoint, b: &ParetoPoint) -> bool {
    a.qed >= b.qed
        && a.sa <= b.sa
        && a.logp <= b.logp
        && (a.qed > b.qed || a.sa < b.sa || a.logp < b.logp)
}

/// Indices of non-dominated points among `candidates`, ascending.
fn front_of(points: &[ParetoPoint], candidates: Vec<usize>) -> Vec<usize> {
    // After sorting best-first lexicographically every dominator precedes
    // the points it dominates, and dominance is transitive, so comparing
    // against the front built so far is enough.
    let mut order = candidates;
    order.sort_by(|&i, &j| {
        let (a, b) = (&points[i], &points[j]);
        b.qed
            .total_cmp(&a.qed)
            .then(a.sa.total_cmp(&b.sa))
            .then(a.logp.total_cmp(&b.logp))
            .then(i.cmp(&j))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&points[f], &points[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

/// Unconstrained front; equal points are all kept.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<usize> {
    front_of(points, (0..points.len()).collect())
}

/// Front over the points inside the window, as indices into `points`.
pub fn pareto_front_constrained(points: &[ParetoPoint], cfg: &ParetoConfig) -> Vec<usize> {
    front_of(
        points,
        (0..points.len())
            .filter(|&i| cfg.admits(&points[i]))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(qed: f64, sa: f64, logp: f64) -> ParetoPoint {
        ParetoPoint { qed, sa, logp }
    }

    #[test]
    fn examples() {
        assert_eq!(pareto_front(&[p(0.3, 5.0, 2.0)]), vec![0]);
        assert_eq!(pareto_front(&[p(0.8, 4.0, 3.0), p(0.7, 5.0, 3.0)]), vec![0]);
        assert_eq!(
            pareto_front(&[p(0.5, 4.0, 3.0), p(0.5, 4.0, 3.0)]),
            vec![0, 1]
        );
        assert!(pareto_front(&[]).is_empty());
    }

    #[test]
    fn window_filters_before_ranking() {
        let pts = [p(0.9, 7.0, 1.0), p(0.6, 3.0, 1.0), p(0.5, 3.0, -1.0)];
        assert_eq!(pareto_front(&pts), vec![0, 1, 2]);
        assert_eq!(
            pareto_front_constrained(&pts, &ParetoConfig::default()),
            vec![1]
        );
        assert!(ParetoConfig {
            logp_min: 2.0,
            logp_max: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
