//! Independent brute-force implementations used to cross-check the
//! library. Nothing here calls the code under test.
#![allow(dead_code)]

use num_complex::Complex64;

pub type CMat = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn gate_rx(t: f64) -> CMat {
    let (s, co) = ((t / 2.0).sin(), (t / 2.0).cos());
    vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
}

fn gate_ry(t: f64) -> CMat {
    let (s, co) = ((t / 2.0).sin(), (t / 2.0).cos());
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

fn gate_rz(t: f64) -> CMat {
    let ph = t / 2.0;
    vec![
        vec![c(ph.cos(), -ph.sin()), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(ph.cos(), ph.sin())],
    ]
}

/// Full-register operator for a one-qubit gate on qubit `q`, with qubit 0
/// as the least significant bit (rightmost Kronecker factor).
pub fn embed(n: usize, q: usize, g: &CMat) -> CMat {
    let mut m = vec![vec![c(1.0, 0.0)]];
    for k in (0..n).rev() {
        let f = if k == q { g.clone() } else { identity(2) };
        m = kron(&m, &f);
    }
    m
}

pub fn cnot_matrix(n: usize, control: usize, target: usize) -> CMat {
    let d = 1usize << n;
    let mut m = vec![vec![c(0.0, 0.0); d]; d];
    for col in 0..d {
        let row = if (col >> control) & 1 == 1 {
            col ^ (1 << target)
        } else {
            col
        };
        m[row][col] = c(1.0, 0.0);
    }
    m
}

/// Whole-circuit unitary: RY encoding, then per layer RX·RY·RZ on each
/// qubit followed by the CNOT ring.
pub fn circuit_unitary(theta_in: &[f64], alpha: &[f64], n_layers: usize) -> CMat {
    let n = theta_in.len();
    let mut u = identity(1 << n);
    let apply = |u: &CMat, op: &CMat| matmul(op, u);
    for q in 0..n {
        u = apply(&u, &embed(n, q, &gate_ry(theta_in[q])));
    }
    for l in 0..n_layers {
        for q in 0..n {
            let a = &alpha[(l * n + q) * 3..(l * n + q) * 3 + 3];
            u = apply(&u, &embed(n, q, &gate_rx(a[0])));
            u = apply(&u, &embed(n, q, &gate_ry(a[1])));
            u = apply(&u, &embed(n, q, &gate_rz(a[2])));
        }
        if n > 1 {
            for q in 0..n {
                u = apply(&u, &cnot_matrix(n, q, (q + 1) % n));
            }
        }
    }
    u
}

/// ⟨ψ|Z_q|ψ⟩ for ψ = U|0…0⟩, with Z_q built as a Kronecker product.
pub fn dense_expectations(theta_in: &[f64], alpha: &[f64], n_layers: usize) -> Vec<f64> {
    let n = theta_in.len();
    let u = circuit_unitary(theta_in, alpha, n_layers);
    let psi: Vec<Complex64> = u.iter().map(|row| row[0]).collect();
    let z = vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(-1.0, 0.0)],
    ];
    (0..n)
        .map(|q| {
            let zq = embed(n, q, &z);
            let mut acc = c(0.0, 0.0);
            for i in 0..psi.len() {
                for j in 0..psi.len() {
                    acc += psi[i].conj() * zq[i][j] * psi[j];
                }
            }
            acc.re
        })
        .collect()
}

/// Scalar re-derivation of the patch map: explicit loops for both affine
/// maps and the logistic function, dense-matrix expectations in between.
pub fn scalar_patch(
    z: &[f64],
    w_in: &[f64],
    b_in: &[f64],
    alpha: &[f64],
    n_layers: usize,
    w_post: &[f64],
    b_post: &[f64],
) -> Vec<f64> {
    let q = b_in.len();
    let mut theta = vec![0.0; q];
    for j in 0..q {
        let mut s = b_in[j];
        for i in 0..z.len() {
            s += z[i] * w_in[i * q + j];
        }
        theta[j] = s;
    }
    let g = dense_expectations(&theta, alpha, n_layers);
    let w = b_post.len();
    let mut out = vec![0.0; w];
    for k in 0..w {
        let mut s = b_post[k];
        for j in 0..q {
            s += g[j] * w_post[j * w + k];
        }
        out[k] = 1.0 / (1.0 + (-s).exp());
    }
    out
}

/// Central difference of `f` along coordinate `k` of `x`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    let mut m = x.to_vec();
    p[k] += h;
    m[k] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

/// Textbook single-pass Pearson correlation; 0 when a side is constant.
pub fn pearson_sums(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx <= 1e-12 * n * sxx.max(1e-300) || vy <= 1e-12 * n * syy.max(1e-300) {
        return 0.0;
    }
    (n * sxy - sx * sy) / (vx * vy).sqrt()
}

/// Straight-line evaluation of `act(W x + b)` layer by layer with weights
/// given as nested rows.
pub fn mlp_forward(layers: &[(Vec<Vec<f64>>, Vec<f64>, &str)], x: &[f64]) -> Vec<f64> {
    let mut h = x.to_vec();
    for (w, b, act) in layers {
        let mut next = Vec::new();
        for (row, bias) in w.iter().zip(b) {
            let mut s = *bias;
            for (wi, hi) in row.iter().zip(&h) {
                s += wi * hi;
            }
            next.push(match *act {
                "relu" => s.max(0.0),
                "sigmoid" => 1.0 / (1.0 + (-s).exp()),
                _ => s,
            });
        }
        h = next;
    }
    h
}

/// Tanimoto over explicit bit-index sets; two empty sets count as identical.
pub fn set_tanimoto(a: &[usize], b: &[usize]) -> f64 {
    let sa: std::collections::BTreeSet<usize> = a.iter().copied().collect();
    let sb: std::collections::BTreeSet<usize> = b.iter().copied().collect();
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Mean `1 − similarity` over all unordered pairs.
pub fn all_pairs_distance(sets: &[Vec<usize>]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            if i < j {
                total += 1.0 - set_tanimoto(&sets[i], &sets[j]);
                count += 1;
            }
        }
    }
    total / count as f64
}

/// Rolling mean similarity recomputed from scratch at every step.
pub fn rolling_similarity(sets: &[Vec<usize>], window: usize) -> Vec<Option<f64>> {
    (1..=sets.len())
        .map(|t| {
            let lo = t.saturating_sub(window);
            let w = &sets[lo..t];
            if w.len() < 2 {
                return None;
            }
            Some(1.0 - all_pairs_distance(w))
        })
        .collect()
}

/// Non-dominated indices by checking every ordered pair.
pub fn dominance_front(points: &[(f64, f64, f64)]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !(0..points.len()).any(|j| {
                let (a, b) = (points[j], points[i]);
                let no_worse = a.0 >= b.0 && a.1 <= b.1 && a.2 <= b.2;
                let better = a.0 > b.0 || a.1 < b.1 || a.2 < b.2;
                j != i && no_worse && better
            })
        })
        .collect()
}

/// Rank as (number strictly below) + (ties including self + 1) / 2.
pub fn counting_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let below = x.iter().filter(|u| *u < v).count() as f64;
            let equal = x.iter().filter(|u| *u == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    pearson_sums(&counting_ranks(x), &counting_ranks(y))
}

/// Greedy MaxMin where every step rescans all selected items.
pub fn greedy_maxmin(sets: &[Vec<usize>], k: usize, seed: usize) -> Vec<usize> {
    let mut picked = vec![seed];
    while picked.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..sets.len() {
            if picked.contains(&i) {
                continue;
            }
            let d = picked
                .iter()
                .map(|&p| 1.0 - set_tanimoto(&sets[i], &sets[p]))
                .fold(f64::INFINITY, f64::min);
            if best.is_none() || d > best.unwrap().1 {
                best = Some((i, d));
            }
        }
        picked.push(best.unwrap().0);
    }
    picked
}
