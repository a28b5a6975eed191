//! Rank correlation between latent coordinates and molecular properties.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::EvalError;

/// 1-based ranks with tied values sharing the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with `n − 2` degrees of
    /// freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Spearman's ρ as the Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation, EvalError> {
    let n = x.len();
    if y.len() != n {
        return Err(EvalError::DegenerateInput(format!(
            "lengths differ: {n} vs {}",
            y.len()
        )));
    }
    if n < 10 {
        return Err(EvalError::InsufficientInput { needed: 10, got: n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(EvalError::DegenerateInput("non-finite values".into()));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let m = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - m) * (b - m);
        sxx += (a - m) * (a - m);
        syy += (b - m) * (b - m);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::DegenerateInput(
            "constant input has no ranks to correlate".into(),
        ));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Correlation {
        rho,
        p_value: rho_p_value(rho, n),
        n,
    })
}

/// Two-sided p-value of `t = ρ·√((n − 2)/(1 − ρ²))` under Student's t.
fn rho_p_value(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let df = n as f64 - 2.0;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpearmanAudit {
    pub qed: Correlation,
    pub sa: Correlation,
    pub logp: Correlation,
}

/// Correlates one latent coordinate with QED, SA and logP.
pub fn spearman_audit(
    latent: &[f64],
    props: &[(f64, f64, f64)],
) -> Result<SpearmanAudit, EvalError> {
    let col = |f: fn(&(f64, f64, f64)) -> f64| props.iter().map(f).collect::<Vec<f64>>();
    Ok(SpearmanAudit {
        qed: spearman(latent, &col(|p| p.0))?,
        sa: spearman(latent, &col(|p| p.1))?,
        logp: spearman(latent, &col(|p| p.2))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 5.0]),
            vec![2.5, 4.0, 2.5, 1.0]
        );
    }

    #[test]
    fn monotone_pairs() {
        let x: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let up: Vec<f64> = x.iter().map(|v| v * v).collect();
        let down: Vec<f64> = x.iter().map(|v| -v.exp()).collect();
        let a = spearman(&x, &up).unwrap();
        assert_eq!((a.rho, a.p_value), (1.0, 0.0));
        assert_eq!(spearman(&x, &down).unwrap().rho, -1.0);
    }

    #[test]
    fn p_value_matches_tabulated_t() {
        // Two-sided 5% critical values: t = 2.228139 at 10 df, 2.000298 at 60.
        for (t, n) in [(2.228139f64, 12usize), (2.000298, 62)] {
            let df = n as f64 - 2.0;
            let rho = t / (df + t * t).sqrt();
            assert!((rho_p_value(rho, n) - 0.05).abs() < 1e-6);
        }
        assert_eq!(rho_p_value(0.0, 20), 1.0);
        let x: Vec<f64> = (0..12).map(|i| i as f64).collect();
        assert!(spearman(&x[..5], &x[..5]).is_err());
        assert!(spearman(&x, &[1.0; 12]).is_err());
    }
}
