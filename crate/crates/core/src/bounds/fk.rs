use super::ModelConstants;
use crate::error::{Error, Result};
use crate::matrix::{InteractionMatrix, SubsetState};
use crate::percolation::{ExactEngine, Functional, PercolationModel, SubsetFunction};

/// Relative accuracy of the time integral.
pub const FK_TOL: f64 = 1e-6;

/// Switches for [`percolation_entropy_bound`].
#[derive(Debug, Clone, Default)]
pub struct FkOptions {
    /// Initial entropies `H_0(v)`; `None` means `H_0 = 0`.
    pub h0: Option<SubsetFunction>,
    /// Use `Chat` with this `h3` instead of `C`.
    pub h3: Option<f64>,
    /// Uniform-in-time form with discount `r = sigma^2 / (4 eta)`.
    pub uniform: bool,
}

/// `E_v[H_0(X_T)] + int_0^T E_v[C(X_t)] dt` for the percolation process with
/// rate scale `kappa = gamma / sigma^2`, or its discounted uniform-in-time
/// version `e^{-rT} E_v[H_0(X_T)] + int_0^T e^{-rt} E_v[C(X_t)] dt`.
pub fn percolation_entropy_bound(
    xi: &InteractionMatrix,
    v: &SubsetState,
    constants: &ModelConstants,
    opts: &FkOptions,
) -> Result<f64> {
    constants.validate()?;
    let horizon = constants.t;
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter("horizon T must be positive".into()));
    }
    let r = if opts.uniform { constants.uniform_rate()? } else { 0.0 };
    let model = PercolationModel::new(xi.clone(), constants.kappa())?;
    let engine = ExactEngine::new(&model)?;
    let c_fun = match opts.h3 {
        Some(h3) => Functional::CHat { constants: *constants, h3 },
        None => Functional::C(*constants),
    };
    let table = c_fun.table(xi)?;
    let tol = FK_TOL * 1e-3;
    let integral = engine.discounted_integral(&table, v, horizon, r, tol)?;
    let initial = match &opts.h0 {
        Some(h0) => (-r * horizon).exp() * engine.expectation(h0, v, horizon, tol)?,
        None => 0.0,
    };
    Ok(initial + integral)
}

/// Explicit bound on the three-particle entropies when
/// `H_0(v) <= C0 delta^2 |v|^3`: `8 e^{3 gamma T}(C0 + M/(3 gamma sigma^2)) 27 delta^2`,
/// or `8 (C0 + M/(sigma^2 (r - 3 gamma))) 27 delta^2` in the uniform regime.
pub fn h3_bound(constants: &ModelConstants, delta: f64, uniform: bool) -> Result<f64> {
    constants.validate()?;
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be nonnegative, got {delta}")));
    }
    let ModelConstants { gamma, m, sigma, c0, t, .. } = *constants;
    let s2 = sigma * sigma;
    let cube = 27.0 * delta * delta;
    if uniform {
        let r = constants.uniform_rate()?;
        Ok(8.0 * (c0 + m / (s2 * (r - 3.0 * gamma))) * cube)
    } else {
        Ok(8.0 * (3.0 * gamma * t).exp() * (c0 + m / (3.0 * gamma * s2)) * cube)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_mean_field, c_of_v};

    #[test]
    fn zero_matrix_gives_zero() {
        let xi = InteractionMatrix::zeros(4);
        let v = SubsetState::from_indices(4, &[0, 1]).unwrap();
        let b = percolation_entropy_bound(&xi, &v, &ModelConstants::default(), &FkOptions::default()).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn singleton_matches_ode_oracle() {
        // For a singleton v the integrand starts at C(v) = 0. Integrate the
        // Kolmogorov backward system with small explicit steps as an oracle.
        let xi = InteractionMatrix::from_rows(&[
            vec![0.0, 0.5, 0.25],
            vec![0.4, 0.0, 0.3],
            vec![0.2, 0.6, 0.0],
        ])
        .unwrap();
        let c = ModelConstants { gamma: 1.2, m: 0.7, sigma: 0.9, t: 0.8, ..Default::default() };
        let v = SubsetState::from_indices(3, &[1]).unwrap();
        let got = percolation_entropy_bound(&xi, &v, &c, &FkOptions::default()).unwrap();
        let kappa = c.kappa();
        let cvals: Vec<f64> = (0..8u64)
            .map(|m| c_of_v(&xi, &SubsetState::from_mask(3, m), &c).unwrap())
            .collect();
        let gen = |u: &[f64]| -> Vec<f64> {
            (0..8usize)
                .map(|m| {
                    (0..3)
                        .filter(|&j| m >> j & 1 == 0)
                        .map(|j| {
                            let rate: f64 = (0..3).filter(|&i| m >> i & 1 == 1).map(|i| xi.get(i, j)).sum();
                            kappa * rate * (u[m | 1 << j] - u[m])
                        })
                        .sum()
                })
                .collect()
        };
        // State (u, acc): u' = A u, acc' = u.
        let steps = 4000;
        let h = c.t / steps as f64;
        let mut u = cvals.clone();
        let mut acc = vec![0.0; 8];
        for _ in 0..steps {
            let k1 = gen(&u);
            let u2: Vec<f64> = u.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = gen(&u2);
            let u3: Vec<f64> = u.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = gen(&u3);
            let u4: Vec<f64> = u.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = gen(&u4);
            for m in 0..8 {
                acc[m] += h / 6.0 * (u[m] + 2.0 * u2[m] + 2.0 * u3[m] + u4[m]);
                u[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
            }
        }
        assert!((got - acc[0b010]).abs() < 1e-6 * got.max(1e-12), "{got} vs {}", acc[0b010]);
    }

    #[test]
    fn uniform_mode_discounts_and_checks_temperature() {
        let xi = build_mean_field(5).unwrap();
        let v = SubsetState::from_indices(5, &[0, 1]).unwrap();
        let base = ModelConstants { gamma: 0.5, t: 2.0, ..Default::default() };
        let finite = percolation_entropy_bound(&xi, &v, &base, &FkOptions::default()).unwrap();
        let hot = ModelConstants { eta: Some(0.1), ..base };
        let unif = FkOptions { uniform: true, ..Default::default() };
        let u = percolation_entropy_bound(&xi, &v, &hot, &unif).unwrap();
        assert!(u < finite && u > 0.0);
        let cold = ModelConstants { eta: Some(1.0), ..base };
        assert!(percolation_entropy_bound(&xi, &v, &cold, &unif).is_err());
        assert!(percolation_entropy_bound(&xi, &v, &base, &unif).is_err());
    }

    #[test]
    fn h0_enters_at_the_horizon() {
        let xi = build_mean_field(4).unwrap();
        let v = SubsetState::from_indices(4, &[2]).unwrap();
        let c = ModelConstants::default();
        let h0 = SubsetFunction::constant(4, 0.25).unwrap();
        let opts = FkOptions { h0: Some(h0), ..Default::default() };
        let with = percolation_entropy_bound(&xi, &v, &c, &opts).unwrap();
        let without = percolation_entropy_bound(&xi, &v, &c, &FkOptions::default()).unwrap();
        assert!((with - without - 0.25).abs() < 1e-9);
    }

    #[test]
    fn h3_examples() {
        let c = ModelConstants { t: 0.0, ..Default::default() };
        assert_eq!(h3_bound(&c, 0.0, false).unwrap(), 0.0);
        let d = 0.2;
        assert!((h3_bound(&c, d, false).unwrap() - 8.0 / 3.0 * d * d * 27.0).abs() < 1e-12);
        let ratios: Vec<f64> = [10usize, 20, 40]
            .iter()
            .map(|&n| {
                let delta = 1.0 / (n - 1) as f64;
                h3_bound(&ModelConstants::default(), delta, false).unwrap() * (n * n) as f64
            })
            .collect();
        // n^2 h3 approaches a constant.
        assert!((ratios[2] / ratios[1] - 1.0).abs() < (ratios[1] / ratios[0] - 1.0).abs());
        let hot = ModelConstants { eta: Some(0.05), ..Default::default() };
        let r = hot.uniform_rate().unwrap();
        let want = 8.0 * (1.0 / (r - 3.0)) * 27.0 * d * d;
        assert!((h3_bound(&hot, d, true).unwrap() - want).abs() < 1e-12);
        let cold = ModelConstants { eta: Some(0.5), ..Default::default() };
        assert!(h3_bound(&cold, d, true).is_err());
    }
}
