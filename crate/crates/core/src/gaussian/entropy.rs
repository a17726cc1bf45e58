use super::GaussianModel;
use crate::error::{Error, Result};
use crate::matrix::SubsetState;
use crate::numeric::entropy_kernel;
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;

/// Relative entropy `H(N(0, cov1) | N(0, cov0))`:
/// `1/2 [Tr(cov0^{-1} cov1) - k + ln det cov0 - ln det cov1]`.
pub fn gaussian_kl(cov0: &DMatrix<f64>, cov1: &DMatrix<f64>) -> Result<f64> {
    let k = cov0.nrows();
    if cov0.ncols() != k || cov1.nrows() != k || cov1.ncols() != k {
        return Err(Error::InvalidCovariance("covariances must be square of equal size".into()));
    }
    for (name, c) in [("cov0", cov0), ("cov1", cov1)] {
        let scale = c.abs().max().max(1.0);
        if (c - c.transpose()).abs().max() > 1e-12 * scale {
            return Err(Error::InvalidCovariance(format!("{name} is not symmetric")));
        }
    }
    let ch0 = Cholesky::new(cov0.clone())
        .ok_or_else(|| Error::InvalidCovariance("cov0 is not positive definite".into()))?;
    let ch1 = Cholesky::new(cov1.clone())
        .ok_or_else(|| Error::InvalidCovariance("cov1 is not positive definite".into()))?;
    let logdet = |ch: &Cholesky<f64, nalgebra::Dyn>| -> f64 {
        2.0 * ch.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    };
    let tr = ch0.solve(cov1).trace();
    Ok(0.5 * (tr - k as f64 + logdet(&ch0) - logdet(&ch1)))
}

/// `1/2 sum_lambda h(lambda)` over the eigenvalues of `T^{-1} Sigma^v_T - I`.
pub fn exact_entropy(model: &GaussianModel, v: &SubsetState) -> Result<f64> {
    Ok(0.5 * excess_eigenvalues(model, v)?.iter().map(|&l| entropy_kernel(l)).sum::<f64>())
}

fn excess_eigenvalues(model: &GaussianModel, v: &SubsetState) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptySubset);
    }
    if v.ambient() != model.n() {
        return Err(Error::LengthMismatch { expected: model.n(), got: v.ambient() });
    }
    let idx: Vec<usize> = v.iter().collect();
    let k = idx.len();
    let a = model.sub(&idx) / model.t - DMatrix::identity(k, k);
    let ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    if ev.iter().any(|&l| !(l > -1.0 + 1e-14)) {
        return Err(Error::InvalidCovariance(format!("submatrix on {v} is numerically not positive definite")));
    }
    Ok(ev)
}

/// Exact entropy of a subset with its trace sandwich.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyPair {
    pub v: SubsetState,
    pub exact: f64,
    /// `(1/6) Tr((T^{-1} Sigma^v_T - I)^2)`, valid when `in_window`.
    pub lower: f64,
    /// `e^{6 rho T} Tr((T^{-1} Sigma^v_T - I)^2)`.
    pub upper: f64,
    pub in_window: bool,
}

impl EntropyPair {
    /// The sandwich, with the lower side only asserted inside the window.
    pub fn holds(&self, slack: f64) -> bool {
        let up = self.exact <= self.upper + slack;
        let lo = !self.in_window || self.lower <= self.exact + slack;
        up && lo
    }
}

pub fn entropy_bounds(model: &GaussianModel, v: &SubsetState) -> Result<EntropyPair> {
    let ev = excess_eigenvalues(model, v)?;
    let exact = 0.5 * ev.iter().map(|&l| entropy_kernel(l)).sum::<f64>();
    let tr: f64 = ev.iter().map(|l| l * l).sum();
    Ok(EntropyPair {
        v: v.clone(),
        exact,
        lower: tr / 6.0,
        upper: (6.0 * model.rho * model.t).exp() * tr,
        in_window: model.in_small_time_window(),
    })
}

/// `(T^2/12) sum_{i,j in v} xi_ij^2`.
pub fn clique_lower_bound(model: &GaussianModel, v: &SubsetState) -> f64 {
    let s: f64 = v
        .iter()
        .flat_map(|i| model.xi.row(i).filter(|&(j, _)| v.contains(j)).map(|(_, x)| x * x))
        .sum();
    model.t * model.t / 12.0 * s
}

/// `e^{10 rho T} delta^2 |v|^2`, for row sums at most 1.
pub fn max_upper_bound(model: &GaussianModel, v: &SubsetState) -> f64 {
    let d = model.xi.delta();
    let k = v.len() as f64;
    (10.0 * model.rho * model.t).exp() * d * d * k * k
}

/// Quadratic sandwich of `h` on `[alpha, 1]`: returns
/// `(x^2/6, x^2 (1/2 + alpha_- / (3 (1 + alpha)^3)))`.
pub fn h_sandwich(x: f64, alpha: f64) -> (f64, f64) {
    let neg = (-alpha).max(0.0);
    let up = x * x * (0.5 + neg / (3.0 * (1.0 + alpha).powi(3)));
    (x * x / 6.0, up)
}

/// CSV with header `v,exact,lower,upper`; `v` is written as a quoted set.
pub fn entropy_table_csv(rows: &[EntropyPair]) -> String {
    let mut out = String::from("v,exact,lower,upper\n");
    for r in rows {
        out.push_str(&format!("\"{}\",{:e},{:e},{:e}\n", r.v, r.exact, r.lower, r.upper));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::sigma_t;
    use crate::matrix::InteractionMatrix;

    #[test]
    fn kl_examples() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let two = DMatrix::from_element(1, 1, 2.0);
        assert_eq!(gaussian_kl(&one, &one).unwrap(), 0.0);
        let want = 0.5 * (2.0 - 1.0 - 2f64.ln());
        assert!((gaussian_kl(&one, &two).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.15343).abs() < 1e-5);
        assert!((gaussian_kl(&two, &one).unwrap() - want).abs() > 1e-3);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(gaussian_kl(&bad, &bad), Err(Error::InvalidCovariance(_))));
    }

    #[test]
    fn kl_agrees_with_trace_h_for_scalar_reference() {
        let c1 = DMatrix::from_row_slice(2, 2, &[1.3, 0.2, 0.2, 0.8]);
        let t = 0.9;
        let c0 = DMatrix::identity(2, 2) * t;
        let ev = SymmetricEigen::new(&c1 / t - DMatrix::identity(2, 2)).eigenvalues;
        let via_h = 0.5 * ev.iter().map(|&l| entropy_kernel(l)).sum::<f64>();
        assert!((gaussian_kl(&c0, &c1).unwrap() - via_h).abs() < 1e-14);
    }

    #[test]
    fn pair_example() {
        let a = 0.5;
        let t = 0.5;
        let xi = InteractionMatrix::from_rows(&[vec![0.0, a], vec![a, 0.0]]).unwrap();
        let m = sigma_t(&xi, t, 1e-15).unwrap();
        let v = SubsetState::full(2);
        let l1 = (0.5f64.exp() - 1.0) / 0.5 - 1.0;
        let l2 = (1.0 - (-0.5f64).exp()) / 0.5 - 1.0;
        let want = 0.5 * (l1 - l1.ln_1p() + l2 - l2.ln_1p());
        let got = exact_entropy(&m, &v).unwrap();
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        assert!((got - 0.0318).abs() < 1e-3);
        let one = SubsetState::from_indices(2, &[0]).unwrap();
        assert!(exact_entropy(&m, &one).unwrap() <= got);
        // through the generic KL as a second route
        let kl = gaussian_kl(&(DMatrix::identity(2, 2) * t), &m.sigma_t).unwrap();
        assert!((kl - got).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let m = sigma_t(&InteractionMatrix::zeros(3), 0.4, 1e-14).unwrap();
        let p = entropy_bounds(&m, &SubsetState::full(3)).unwrap();
        assert_eq!((p.exact, p.lower, p.upper), (0.0, 0.0, 0.0));
        assert!(exact_entropy(&m, &SubsetState::empty(3)).is_err());
    }

    #[test]
    fn h_sandwich_grid() {
        for &rt in &[0.05, 0.2, std::f64::consts::LN_2 / 2.0] {
            let alpha = (-2.0f64 * rt).exp() - 1.0;
            for i in 0..=400 {
                let x = alpha + (1.0 - alpha) * i as f64 / 400.0;
                let (lo, up) = h_sandwich(x, alpha);
                let h = entropy_kernel(x);
                assert!(lo <= h + 1e-16 && h <= up + 1e-16, "x={x}");
                assert!(h >= 0.5 * x * x - x * x * x / 3.0 - 1e-16);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let m = sigma_t(&InteractionMatrix::zeros(2), 1.0, 1e-14).unwrap();
        let p = entropy_bounds(&m, &SubsetState::full(2)).unwrap();
        let csv = entropy_table_csv(&[p]);
        assert!(csv.starts_with("v,exact,lower,upper\n\"{0,1}\","));
    }
}
