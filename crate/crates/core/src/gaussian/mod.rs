//! The linear-drift system `dX = xi X dt + dB` started at the origin, whose
//! law at time `T` is `N(0, Sigma_T)` with `Sigma_T = int_0^T e^{s xi} e^{s xi^T} ds`,
//! against the independent projection `N(0, T I)`.

mod average;
mod entropy;

pub use average::{
    avg_entropy, avg_sandwich, avg_trace_sq, averages_json, d_t, d_t_envelope, AvgMode, AvgResult,
    AvgSandwich, MAX_ENUMERATION,
};
pub use entropy::{
    clique_lower_bound, entropy_bounds, entropy_table_csv, exact_entropy, gaussian_kl,
    h_sandwich, max_upper_bound, EntropyPair,
};

use crate::bounds::ModelConstants;
use crate::error::{Error, Result};
use crate::expm::expm_dense;
use crate::matrix::InteractionMatrix;
use crate::numeric::adaptive_simpson_vec;
use nalgebra::DMatrix;

/// `Gamma_m = sum_r C(m, r) xi^r (xi^T)^{m-r}`, via `Gamma_{m+1} = xi Gamma_m + Gamma_m xi^T`.
pub fn gamma_m(xi: &InteractionMatrix, m: usize) -> DMatrix<f64> {
    let x = xi.to_matrix();
    let mut g = DMatrix::identity(xi.n(), xi.n());
    for _ in 0..m {
        g = &x * &g + &g * x.transpose();
    }
    g
}

/// `||xi||_op` by power iteration on `xi^T xi`.
pub fn operator_norm(xi: &InteractionMatrix) -> f64 {
    let n = xi.n();
    if xi.nnz() == 0 {
        return 0.0;
    }
    let mut u: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * i as f64 / n as f64).collect();
    let mut est = 0.0;
    for _ in 0..100_000 {
        let w = xi.matvec_transpose(&xi.matvec(&u));
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let uu: f64 = u.iter().map(|a| a * a).sum();
        let rayleigh = u.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / uu;
        u = w.into_iter().map(|a| a / norm).collect();
        if (rayleigh - est).abs() <= 1e-13 * rayleigh {
            est = rayleigh;
            break;
        }
        est = rayleigh;
    }
    est.sqrt()
}

#[derive(Debug, Clone)]
pub struct GaussianModel {
    pub xi: InteractionMatrix,
    pub t: f64,
    pub rho: f64,
    pub sigma_t: DMatrix<f64>,
    pub series_order: usize,
    /// Certified bound on the omitted series terms of `Sigma_T / T - I`
    /// (operator norm).
    pub tail_bound: f64,
}

/// `Sigma_T` from `Sigma_T / T - I = sum_{m >= 1} T^m/(m+1)! Gamma_m`, truncated
/// once `sum_{m > M} (2 rho T)^m/(m+1)! <= tol`.
pub fn sigma_t(xi: &InteractionMatrix, t: f64, tol: f64) -> Result<GaussianModel> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    xi.require_well_formed()?;
    let n = xi.n();
    let rho = operator_norm(xi);
    let x = xi.to_matrix();
    let xt = x.transpose();
    let a = 2.0 * rho * t;
    let mut acc = DMatrix::<f64>::identity(n, n);
    let mut g = DMatrix::<f64>::identity(n, n);
    let mut coef = 1.0; // T^m / (m+1)!
    let mut term = 1.0; // a^m / (m+1)!, with ||Gamma_m|| <= (2 rho)^m
    let mut m = 0usize;
    let tail = loop {
        m += 1;
        g = &x * &g + &g * &xt;
        coef *= t / (m + 1) as f64;
        term *= a / (m + 1) as f64;
        acc += &g * coef;
        // successive ratios of the omitted terms are at most a/(m+3)
        let next = term * a / (m + 2) as f64;
        let r = a / (m + 3) as f64;
        let tail = if r < 1.0 { next / (1.0 - r) } else { f64::INFINITY };
        if tail <= tol || m >= 2000 {
            break tail;
        }
    };
    let sigma = acc * t;
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    Ok(GaussianModel { xi: xi.clone(), t, rho, sigma_t: sigma, series_order: m, tail_bound: tail })
}

/// `Sigma_T` by adaptive Simpson quadrature of `e^{s xi} e^{s xi^T}`.
pub fn sigma_t_quadrature(xi: &InteractionMatrix, t: f64, rel_tol: f64) -> DMatrix<f64> {
    let n = xi.n();
    let x = xi.to_matrix();
    let flat = adaptive_simpson_vec(
        |s| {
            let e = expm_dense(&(&x * s));
            let p = &e * e.transpose();
            p.as_slice().to_vec()
        },
        0.0,
        t,
        rel_tol,
    );
    DMatrix::from_column_slice(n, n, &flat)
}

impl GaussianModel {
    pub fn n(&self) -> usize {
        self.xi.n()
    }

    /// `T^{-1} Sigma_T - I`.
    pub fn normalized_excess(&self) -> DMatrix<f64> {
        &self.sigma_t / self.t - DMatrix::identity(self.n(), self.n())
    }

    /// Principal submatrix on the (sorted) indices.
    pub fn sub(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.sigma_t[(idx[a], idx[b])])
    }

    /// Whether `T <= log 2 / (2 rho)`, where the lower bounds apply.
    pub fn in_small_time_window(&self) -> bool {
        self.rho == 0.0 || self.t <= std::f64::consts::LN_2 / (2.0 * self.rho)
    }

    /// Constants for the percolation bound in this model: `sigma = 1`,
    /// `gamma = 2T` from Talagrand's inequality for `N(0, t I)`,
    /// `M = max_i (Sigma_T)_ii`, `C0 = 0`.
    pub fn derived_constants(&self) -> ModelConstants {
        let m = (0..self.n()).map(|i| self.sigma_t[(i, i)]).fold(0.0, f64::max);
        ModelConstants { gamma: 2.0 * self.t, m, sigma: 1.0, eta: None, c0: 0.0, t: self.t }
    }

    pub fn eigenvalue_window(&self) -> (f64, f64) {
        ((-2.0 * self.rho * self.t).exp() - 1.0, (2.0 * self.rho * self.t).exp() - 1.0)
    }
}
