//! Monotone piecewise-linear calibration from anchor pairs.

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Non-decreasing map through `(xs[i], ys[i])`, linear between knots and
/// constant outside them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl MonotoneMap {
    pub fn apply(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let hi = self.xs.partition_point(|&v| v <= x);
        let (x0, x1, y0, y1) = (self.xs[hi - 1], self.xs[hi], self.ys[hi - 1], self.ys[hi]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Pool-adjacent-violators fit of `ys` (weights `ws`) to a non-decreasing
/// sequence.
fn isotonic(ys: &[f64], ws: &[f64]) -> Vec<f64> {
    // Blocks of (weighted mean, weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(ys.len());
    for (&y, &w) in ys.iter().zip(ws) {
        blocks.push((y, w, 1));
        while blocks.len() > 1 && blocks[blocks.len() - 2].0 > blocks[blocks.len() - 1].0 {
            let (m2, w2, l2) = blocks.pop().expect("len > 1");
            let (m1, w1, l1) = blocks.pop().expect("len > 1");
            blocks.push(((m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2, l1 + l2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, l)| std::iter::repeat_n(m, l))
        .collect()
}

/// Fits the map from requested targets to achieved medians. Anchors are
/// sorted by target, duplicate targets averaged, and achieved values pooled
/// until non-decreasing.
pub fn logp_quantile_calibration(
    targets: &[f64],
    achieved: &[f64],
) -> Result<MonotoneMap, EvalError> {
    if targets.len() != achieved.len() {
        return Err(EvalError::DegenerateInput(format!(
            "{} targets but {} achieved values",
            targets.len(),
            achieved.len()
        )));
    }
    if targets.iter().chain(achieved).any(|v| !v.is_finite()) {
        return Err(EvalError::DegenerateInput("non-finite anchor".into()));
    }
    let mut pairs: Vec<(f64, f64)> = targets
        .iter()
        .copied()
        .zip(achieved.iter().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut xs, mut ys, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for (x, y) in pairs {
        if xs.last() == Some(&x) {
            let k = ys.len() - 1;
            ys[k] = (ys[k] * ws[k] + y) / (ws[k] + 1.0);
            ws[k] += 1.0;
        } else {
            xs.push(x);
            ys.push(y);
            ws.push(1.0);
        }
    }
    if xs.len() < 2 {
        return Err(EvalError::DegenerateInput(format!(
            "need 2 distinct anchors, got {}",
            xs.len()
        )));
    }
    Ok(MonotoneMap {
        ys: isotonic(&ys, &ws),
        xs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_on_matching_anchors() {
        let t = [-1.0, 0.5, 1.0, 2.0, 4.0];
        let m = logp_quantile_calibration(&t, &t).unwrap();
        for x in [-1.0, -0.2, 0.5, 1.7, 3.9, 4.0] {
            assert!((m.apply(x) - x).abs() < 1e-15);
        }
        assert_eq!(m.apply(-5.0), -1.0);
        assert_eq!(m.apply(9.0), 4.0);
    }

    #[test]
    fn interpolates_between_two_anchors() {
        let m = logp_quantile_calibration(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!(m.apply(0.5), 1.0);
    }

    #[test]
    fn inverted_pair_pools_flat() {
        let m = logp_quantile_calibration(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 2.0, 1.0, 3.0, 4.0])
            .unwrap();
        assert_eq!(m.ys, vec![0.0, 1.5, 1.5, 3.0, 4.0]);
        let mut last = f64::NEG_INFINITY;
        for i in 0..=80 {
            let y = m.apply(-1.0 + i as f64 * 0.075);
            assert!(y >= last);
            last = y;
        }
        assert!(logp_quantile_calibration(&[1.0, 1.0], &[0.0, 2.0]).is_err());
    }
}
