use super::{exact_entropy, GaussianModel};
use crate::error::{Error, Result};
use crate::matrix::{row_square_sums_squared, col_square_sums_squared, sum_squares, InteractionMatrix, SubsetState};
use crate::numeric::{binomial, mean_stderr, pairwise_sum};
use crate::rng::stream;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

/// Largest `C(n, k)` the enumerate mode accepts.
pub const MAX_ENUMERATION: u128 = 1_000_000;

/// Average of `Tr((A^v)^2)` over all `|v| = k`:
/// `k(k-1)/(n(n-1)) Tr(A^2) + k(n-k)/(n(n-1)) sum_i A_ii^2`.
pub fn avg_trace_sq(a: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidSize("matrix must be square".into()));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={n}, got {k}")));
    }
    if n == 1 {
        return Ok(a[(0, 0)] * a[(0, 0)]);
    }
    let (w1, w2) = weights(n, k);
    let tr2 = (a * a).trace();
    let diag: f64 = a.diagonal().iter().map(|x| x * x).sum();
    Ok(w1 * tr2 + w2 * diag)
}

/// `(k(k-1)/(n(n-1)), k(n-k)/(n(n-1)))`.
fn weights(n: usize, k: usize) -> (f64, f64) {
    let (n, k) = (n as f64, k as f64);
    let d = n * (n - 1.0);
    (k * (k - 1.0) / d, k * (n - k) / d)
}

/// `D_T = sum_i (sum_{m >= 2} T^m/(m+1)! (xi^m)_ii)^2`, truncated once
/// `sum_{m > M} (rho T)^m/(m+1)!` falls below `tol`.
pub fn d_t(xi: &InteractionMatrix, t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = xi.n();
    let rho = super::operator_norm(xi);
    let x = xi.to_matrix();
    let a = rho * t;
    let mut p = x.clone();
    let mut s = vec![0.0; n];
    let mut coef = t / 2.0; // T^m/(m+1)!
    let mut term = a / 2.0; // (rho T)^m/(m+1)!
    let mut m = 1usize;
    loop {
        m += 1;
        p = &p * &x;
        coef *= t / (m + 1) as f64;
        term *= a / (m + 1) as f64;
        for (i, si) in s.iter_mut().enumerate() {
            *si += coef * p[(i, i)];
        }
        let next = term * a / (m + 2) as f64;
        let r = a / (m + 3) as f64;
        let tail = if r < 1.0 { next / (1.0 - r) } else { f64::INFINITY };
        if tail <= tol || m >= 2000 || p.abs().max() == 0.0 {
            break;
        }
    }
    Ok(s.iter().map(|v| v * v).sum())
}

/// Two-sided envelope of `D_T` for nonnegative `xi`:
/// `T^4/36 sum_i ((xi^2)_ii)^2 <= D_T <= 2 T^4 e^{2 rho T} (row + column square sums)`.
pub fn d_t_envelope(xi: &InteractionMatrix, t: f64) -> (f64, f64) {
    let rho = super::operator_norm(xi);
    let lo: f64 = (0..xi.n())
        .map(|i| {
            let d: f64 = xi.row(i).map(|(j, a)| a * xi.get(j, i)).sum();
            d * d
        })
        .sum::<f64>()
        * t.powi(4)
        / 36.0;
    let up = 2.0 * t.powi(4) * (2.0 * rho * t).exp() * (row_square_sums_squared(xi) + col_square_sums_squared(xi));
    (lo, up)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AvgMode {
    Enumerate,
    Sample { reps: usize, seed: u64 },
}

/// Average entropy over `|v| = k`, written as `{k, T, mode, value, stderr?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvgResult {
    pub k: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub mode: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl AvgResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("average serialization cannot fail")
    }
}

pub fn averages_json(rows: &[AvgResult]) -> String {
    serde_json::to_string_pretty(rows).expect("average serialization cannot fail")
}

/// All k-subsets of `[n]` as bitmasks in increasing order (Gosper's hack).
fn k_subsets(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if k == 0 {
        out.push(0);
        return out;
    }
    let limit = 1u128 << n;
    let mut s: u64 = (1u64 << k) - 1;
    while (s as u128) < limit {
        out.push(s);
        let c = s & s.wrapping_neg();
        let r = s + c;
        if r == 0 {
            break;
        }
        s = (((r ^ s) >> 2) / c) | r;
    }
    out
}

pub fn avg_entropy(model: &GaussianModel, k: usize, mode: AvgMode) -> Result<AvgResult> {
    let n = model.n();
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={n}, got {k}")));
    }
    match mode {
        AvgMode::Enumerate => {
            let count = binomial(n as u64, k as u64);
            if count > MAX_ENUMERATION || n > 63 {
                return Err(Error::EnumerationTooLarge { count, limit: MAX_ENUMERATION });
            }
            let masks = k_subsets(n, k);
            let vals: Vec<f64> = masks
                .par_iter()
                .map(|&m| exact_entropy(model, &SubsetState::from_mask(n, m)))
                .collect::<Result<_>>()?;
            Ok(AvgResult {
                k,
                t: model.t,
                mode: "enumerate".into(),
                value: pairwise_sum(&vals) / vals.len() as f64,
                stderr: None,
            })
        }
        AvgMode::Sample { reps, seed } => {
            if reps < 2 {
                return Err(Error::InvalidParameter("sampling needs at least 2 reps".into()));
            }
            let vals: Vec<f64> = (0..reps as u64)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream(seed, r);
                    let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
                    idx.sort_unstable();
                    let v = SubsetState::from_indices(n, &idx)?;
                    exact_entropy(model, &v)
                })
                .collect::<Result<_>>()?;
            let (mean, se) = mean_stderr(&vals);
            Ok(AvgResult { k, t: model.t, mode: "sample".into(), value: mean, stderr: Some(se) })
        }
    }
}

/// Explicit-constant bounds on the average entropy over `|v| = k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvgSandwich {
    pub k: usize,
    pub w1: f64,
    pub w2: f64,
    pub d_t: f64,
    /// `(1/6) avg Tr((A^v)^2)` with `A = Sigma_T/T - I`.
    pub trace_lower: f64,
    /// `e^{6 rho T} avg Tr((A^v)^2)`.
    pub trace_upper: f64,
    /// `(1/6)[(T^2/2) S w1 + (4 D_T + (T^4/9) R) w2]`.
    pub lower: f64,
    /// `e^{6 rho T}[16 T^2 e^{4 rho T} S w1 + (8 D_T + 32 T^4 e^{4 rho T} R) w2]`.
    pub upper: f64,
    pub in_window: bool,
}

pub fn avg_sandwich(model: &GaussianModel, k: usize) -> Result<AvgSandwich> {
    let n = model.n();
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={n}, got {k}")));
    }
    let (w1, w2) = if n == 1 { (0.0, 1.0) } else { weights(n, k) };
    let t = model.t;
    let rt = model.rho * t;
    let s = sum_squares(&model.xi);
    let r = row_square_sums_squared(&model.xi);
    let d = d_t(&model.xi, t, 1e-16)?;
    let avg_tr = avg_trace_sq(&model.normalized_excess(), k)?;
    let e4 = (4.0 * rt).exp();
    let lower = ((t * t / 2.0) * s * w1 + (4.0 * d + t.powi(4) / 9.0 * r) * w2) / 6.0;
    let upper = (6.0 * rt).exp() * (16.0 * t * t * e4 * s * w1 + (8.0 * d + 32.0 * t.powi(4) * e4 * r) * w2);
    Ok(AvgSandwich {
        k,
        w1,
        w2,
        d_t: d,
        trace_lower: avg_tr / 6.0,
        trace_upper: (6.0 * rt).exp() * avg_tr,
        lower,
        upper,
        in_window: model.in_small_time_window(),
    })
}
