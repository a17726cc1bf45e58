//! Exponential actions `e^{c xi} x` by a scaled truncated Taylor series.
//!
//! The argument is split into `s` steps with `|c| ||xi||_inf / s <= 1`; each
//! step sums Taylor terms until a geometric bound on the remainder drops below
//! `1e-12` of the running result.

use crate::matrix::InteractionMatrix;
use nalgebra::DMatrix;

pub const EXPM_TOL: f64 = 1e-12;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn taylor_action<F: Fn(&[f64]) -> Vec<f64>>(apply: F, theta: f64, x: &[f64]) -> Vec<f64> {
    // theta bounds the induced inf-norm of the full operator.
    let steps = theta.ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let step_norm = theta * h;
    let mut y = x.to_vec();
    for _ in 0..steps {
        let mut term = y.clone();
        let mut acc = y.clone();
        let mut k = 0usize;
        loop {
            k += 1;
            let next = apply(&term);
            for (t, nv) in term.iter_mut().zip(next) {
                *t = nv * h / k as f64;
            }
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            let r = step_norm / (k + 1) as f64;
            let tn = inf_norm(&term);
            if r < 1.0 && tn * r / (1.0 - r) <= EXPM_TOL * inf_norm(&acc).max(f64::MIN_POSITIVE) {
                break;
            }
            if tn == 0.0 || k > 200 {
                break;
            }
        }
        y = acc;
    }
    y
}

/// `e^{c xi} x`.
pub fn expm_action(xi: &InteractionMatrix, c: f64, x: &[f64]) -> Vec<f64> {
    let theta = c.abs() * xi.row_sums().iter().fold(0.0, |m: f64, s| m.max(s.abs()));
    taylor_action(|u| xi.matvec(u).into_iter().map(|v| c * v).collect(), theta, x)
}

/// `e^{c xi^T} x`.
pub fn expm_action_transpose(xi: &InteractionMatrix, c: f64, x: &[f64]) -> Vec<f64> {
    let theta = c.abs() * xi.col_sums().iter().fold(0.0, |m: f64, s| m.max(s.abs()));
    taylor_action(|u| xi.matvec_transpose(u).into_iter().map(|v| c * v).collect(), theta, x)
}

/// Dense `e^{A}` by scaling and squaring a Taylor polynomial.
pub fn expm_dense(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let b = a * scale;
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut acc = term.clone();
    for k in 1..40 {
        term = &term * &b / k as f64;
        acc += &term;
        if term.abs().max() <= 1e-18 * acc.abs().max() {
            break;
        }
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> InteractionMatrix {
        InteractionMatrix::from_rows(&[
            vec![0.0, 0.4, 0.3, 0.0],
            vec![0.2, 0.0, 0.5, 0.1],
            vec![0.0, 0.6, 0.0, 0.3],
            vec![0.5, 0.0, 0.25, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn action_matches_nalgebra_exp() {
        let xi = sample();
        let x = [1.0, -0.5, 2.0, 0.25];
        for &c in &[0.0, 0.3, 1.7, 6.5] {
            let e = (xi.to_matrix() * c).exp();
            let want = &e * nalgebra::DVector::from_column_slice(&x);
            let got = expm_action(&xi, c, &x);
            let want_t = e.transpose() * nalgebra::DVector::from_column_slice(&x);
            let got_t = expm_action_transpose(&xi, c, &x);
            for i in 0..4 {
                assert!((got[i] - want[i]).abs() < 1e-11 * want.amax().max(1.0));
                assert!((got_t[i] - want_t[i]).abs() < 1e-11 * want_t.amax().max(1.0));
            }
        }
    }

    #[test]
    fn dense_matches_nalgebra_exp() {
        let a = sample().to_matrix() * 2.5 - DMatrix::identity(4, 4) * 0.3;
        let diff = (expm_dense(&a) - a.clone().exp()).abs().max();
        assert!(diff < 1e-12 * a.exp().abs().max());
    }
}
