//! Pairwise fingerprint statistics: mean Tanimoto distance and MaxMin
//! picking.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::chem::{tanimoto, Fingerprint};

/// Pair count above which pairwise means are estimated from a seeded
/// uniform subsample.
pub const DEFAULT_PAIR_BUDGET: usize = 50_000;

/// Number of unordered pairs in `n` items before the first pair of row `i`.
fn row_start(i: u64, n: u64) -> u64 {
    i * (2 * n - i - 1) / 2
}

/// The `k`-th unordered pair `(i, j)`, `i < j`, in row-major order.
pub fn pair_from_index(k: usize, n: usize) -> (usize, usize) {
    let (k, n) = (k as u64, n as u64);
    let total = n * (n - 1) / 2;
    assert!(k < total, "pair index {k} out of range for {n} items");
    // Closed-form row estimate, then exact correction.
    let disc = ((2 * n - 1) * (2 * n - 1)) as f64 - 8.0 * k as f64;
    let mut i = ((2 * n - 1) as f64 - disc.max(0.0).sqrt()) / 2.0;
    i = i.floor().max(0.0);
    let mut i = (i as u64).min(n - 2);
    while i > 0 && row_start(i, n) > k {
        i -= 1;
    }
    while i + 1 < n - 1 && row_start(i + 1, n) <= k {
        i += 1;
    }
    let j = i + 1 + (k - row_start(i, n));
    (i as usize, j as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diversity {
    /// Mean `1 − Tanimoto` over the evaluated pairs.
    pub value: f64,
    pub n_items: usize,
    pub n_pairs: usize,
    pub subsampled: bool,
    pub seed: u64,
}

fn sim(a: &Fingerprint, b: &Fingerprint) -> Result<f64, EvalError> {
    Ok(tanimoto(a, b)?)
}

/// Mean pairwise Tanimoto distance; exact when the pair count fits in
/// `pair_budget`, otherwise estimated from `pair_budget` distinct pairs
/// drawn under `seed`.
pub fn diversity_mean_tanimoto(
    fps: &[Fingerprint],
    pair_budget: usize,
    seed: u64,
) -> Result<Diversity, EvalError> {
    let n = fps.len();
    if n < 2 {
        return Err(EvalError::InsufficientInput { needed: 2, got: n });
    }
    let total = n * (n - 1) / 2;
    let (sum, n_pairs, subsampled) = if total <= pair_budget.max(1) {
        let rows = (0..n - 1)
            .into_par_iter()
            .map(|i| {
                fps[i + 1..]
                    .iter()
                    .map(|b| sim(&fps[i], b).map(|s| 1.0 - s))
                    .sum::<Result<f64, _>>()
            })
            .collect::<Result<Vec<f64>, _>>()?;
        (rows.iter().sum::<f64>(), total, false)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, total, pair_budget).into_vec();
        idx.sort_unstable();
        let d = idx
            .par_iter()
            .map(|&k| {
                let (i, j) = pair_from_index(k, n);
                sim(&fps[i], &fps[j]).map(|s| 1.0 - s)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        (d.iter().sum::<f64>(), pair_budget, true)
    };
    Ok(Diversity {
        value: sum / n_pairs as f64,
        n_items: n,
        n_pairs,
        subsampled,
        seed,
    })
}

/// Greedy farthest-point selection under Tanimoto distance starting from
/// `seed_index`; each pick maximizes its minimum distance to the picks so
/// far, ties to the smaller index.
pub fn maxmin_diverse_select(
    fps: &[Fingerprint],
    k: usize,
    seed_index: usize,
) -> Result<Vec<usize>, EvalError> {
    let n = fps.len();
    if k > n {
        return Err(EvalError::Config(format!("cannot pick {k} of {n} items")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if seed_index >= n {
        return Err(EvalError::Config(format!(
            "seed index {seed_index} out of range for {n} items"
        )));
    }
    let mut picked = vec![seed_index];
    let mut taken = vec![false; n];
    taken[seed_index] = true;
    let mut min_d = vec![f64::INFINITY; n];
    let mut last = seed_index;
    while picked.len() < k {
        let d_last = fps
            .par_iter()
            .map(|f| sim(f, &fps[last]).map(|s| 1.0 - s))
            .collect::<Result<Vec<f64>, _>>()?;
        let mut best: Option<usize> = None;
        for i in 0..n {
            if taken[i] {
                continue;
            }
            min_d[i] = min_d[i].min(d_last[i]);
            if best.is_none_or(|b| min_d[i] > min_d[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("k <= n leaves a candidate");
        taken[b] = true;
        picked.push(b);
        last = b;
    }
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(bits: &[usize]) -> Fingerprint {
        let mut f = Fingerprint::zeros(64);
        for &b in bits {
            f.set(b);
        }
        f
    }

    #[test]
    fn pair_index_enumerates_row_major() {
        for n in 2..40 {
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    assert_eq!(pair_from_index(k, n), (i, j));
                    k += 1;
                }
            }
        }
        let n = 200_000usize;
        let last = n * (n - 1) / 2 - 1;
        assert_eq!(pair_from_index(last, n), (n - 2, n - 1));
    }

    #[test]
    fn diversity_extremes() {
        let same = [fp(&[1, 2]), fp(&[1, 2])];
        assert_eq!(diversity_mean_tanimoto(&same, 10, 0).unwrap().value, 0.0);
        let disjoint = [fp(&[1, 2]), fp(&[3])];
        assert_eq!(
            diversity_mean_tanimoto(&disjoint, 10, 0).unwrap().value,
            1.0
        );
        assert!(matches!(
            diversity_mean_tanimoto(&same[..1], 10, 0),
            Err(EvalError::InsufficientInput { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn subsampling_respects_the_budget() {
        let fps: Vec<Fingerprint> = (0..30)
            .map(|i| fp(&[i % 7, 10 + i % 5, 20 + i % 3]))
            .collect();
        let d = diversity_mean_tanimoto(&fps, 100, 9).unwrap();
        assert!(d.subsampled);
        assert_eq!(d.n_pairs, 100);
        assert_eq!(d, diversity_mean_tanimoto(&fps, 100, 9).unwrap());
        assert!((0.0..=1.0).contains(&d.value));
    }

    #[test]
    fn maxmin_edge_cases() {
        let fps = [fp(&[1]), fp(&[1, 2]), fp(&[5])];
        assert_eq!(maxmin_diverse_select(&fps, 1, 1).unwrap(), vec![1]);
        let all = maxmin_diverse_select(&fps, 3, 0).unwrap();
        assert_eq!(all, vec![0, 2, 1]);
        assert!(maxmin_diverse_select(&fps, 4, 0).is_err());
    }
}
