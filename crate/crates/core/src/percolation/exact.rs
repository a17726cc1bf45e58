use super::{PercolationModel, SubsetFunction};
use crate::error::{Error, Result};
use crate::matrix::SubsetState;
use crate::numeric::poisson_weights;

pub const DEFAULT_ENGINE_LIMIT: usize = 16;

/// Exact transient solver on the full subset lattice by uniformization.
///
/// With `Lambda` the largest out-rate, `P = I + A/Lambda` is stochastic and
/// `e^{tA} = sum_k Pois(k; Lambda t) P^k`. Because every transition enlarges
/// the mask, `P` can be applied in place by sweeping masks upward: the new
/// value at `m` only reads strict supersets, which are still unmodified.
pub struct ExactEngine<'a> {
    model: &'a PercolationModel,
    n: usize,
    /// `in_rate[m * n + j] = kappa * sum_{i in m} xi_ij`.
    in_rate: Vec<f64>,
    out_rate: Vec<f64>,
    lambda: f64,
}

impl<'a> ExactEngine<'a> {
    pub fn new(model: &'a PercolationModel) -> Result<Self> {
        Self::with_limit(model, DEFAULT_ENGINE_LIMIT)
    }

    pub fn with_limit(model: &'a PercolationModel, limit: usize) -> Result<Self> {
        let n = model.n();
        if n > limit || n > super::SUBSET_TABLE_LIMIT {
            return Err(Error::EngineTooLarge { n, limit: limit.min(super::SUBSET_TABLE_LIMIT) });
        }
        let states = 1usize << n;
        let mut in_rate = vec![0.0; states * n];
        let mut out_rate = vec![0.0; states];
        let kappa = model.kappa();
        for m in 1..states {
            let low = m.trailing_zeros() as usize;
            let prev = m & (m - 1);
            let (head, tail) = in_rate.split_at_mut(m * n);
            let dst = &mut tail[..n];
            dst.copy_from_slice(&head[prev * n..prev * n + n]);
            for (j, x) in model.xi().row(low) {
                dst[j] += kappa * x;
            }
            out_rate[m] = (0..n).filter(|&j| m >> j & 1 == 0).map(|j| dst[j]).sum();
        }
        let lambda = out_rate.iter().fold(0.0, |a: f64, &b| a.max(b));
        Ok(ExactEngine { model, n, in_rate, out_rate, lambda })
    }

    pub fn model(&self) -> &PercolationModel {
        self.model
    }

    /// Uniformization rate (maximum total out-rate over all states).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn out_rate(&self, mask: u64) -> f64 {
        self.out_rate[mask as usize]
    }

    pub fn rate(&self, mask: u64, j: usize) -> f64 {
        if mask >> j & 1 == 1 {
            0.0
        } else {
            self.in_rate[mask as usize * self.n + j]
        }
    }

    fn check(&self, f: &SubsetFunction) -> Result<()> {
        if f.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: f.n() });
        }
        Ok(())
    }

    fn mask_of(&self, v: &SubsetState) -> Result<u64> {
        if v.ambient() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: v.ambient() });
        }
        Ok(v.mask().expect("engine sizes fit a mask"))
    }

    /// `AF(v) = sum_{j not in v} rate(v, j) (F(v + j) - F(v))` on every subset.
    pub fn generator_apply(&self, f: &SubsetFunction) -> Result<SubsetFunction> {
        self.check(f)?;
        let vals = f.values();
        let out = (0..vals.len())
            .map(|m| {
                let base = vals[m];
                (0..self.n)
                    .filter(|&j| m >> j & 1 == 0)
                    .map(|j| self.in_rate[m * self.n + j] * (vals[m | 1 << j] - base))
                    .sum()
            })
            .collect();
        SubsetFunction::new(self.n, out)
    }

    /// Masks containing `base`, in increasing order.
    fn supersets(&self, base: u64) -> Vec<u64> {
        let full = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let comp = full & !base;
        let mut out = Vec::with_capacity(1usize << comp.count_ones());
        let mut s = 0u64;
        loop {
            out.push(base | s);
            if s == comp {
                break;
            }
            s = s.wrapping_sub(comp) & comp;
        }
        out
    }

    /// One in-place application of `P = I + A/Lambda` on the listed masks.
    fn step(&self, work: &mut [f64], masks: &[u64]) {
        let inv = 1.0 / self.lambda;
        for &m in masks {
            let m = m as usize;
            let base = work[m];
            let mut delta = 0.0;
            for j in 0..self.n {
                if m >> j & 1 == 0 {
                    delta += self.in_rate[m * self.n + j] * (work[m | 1 << j] - base);
                }
            }
            work[m] = base + inv * delta;
        }
    }

    /// `sum_k weights[k] (P^k F)(v)`; also returns the full vector when `all`.
    fn series(&self, f: &SubsetFunction, base: u64, weights: &[f64], all: bool) -> (f64, Option<Vec<f64>>) {
        let masks = self.supersets(base);
        let mut work = f.values().to_vec();
        let mut acc = 0.0;
        let mut acc_all = all.then(|| vec![0.0; work.len()]);
        for (k, &w) in weights.iter().enumerate() {
            if k > 0 {
                self.step(&mut work, &masks);
            }
            acc += w * work[base as usize];
            if let Some(a) = acc_all.as_mut() {
                for (x, y) in a.iter_mut().zip(&work) {
                    *x += w * y;
                }
            }
        }
        (acc, acc_all)
    }

    fn check_time(t: f64, tol: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        Ok(())
    }

    /// `E_v[F(X_t)]` with truncation error at most `tol * ||F||_inf`.
    pub fn expectation(&self, f: &SubsetFunction, v: &SubsetState, t: f64, tol: f64) -> Result<f64> {
        self.check(f)?;
        Self::check_time(t, tol)?;
        let base = self.mask_of(v)?;
        if t == 0.0 || self.lambda == 0.0 {
            return Ok(f.get(base));
        }
        let w = poisson_weights(self.lambda * t, tol);
        Ok(self.series(f, base, &w, false).0)
    }

    /// `e^{tA} F` on every subset.
    pub fn expectation_all(&self, f: &SubsetFunction, t: f64, tol: f64) -> Result<SubsetFunction> {
        self.check(f)?;
        Self::check_time(t, tol)?;
        if t == 0.0 || self.lambda == 0.0 {
            return Ok(f.clone());
        }
        let w = poisson_weights(self.lambda * t, tol);
        let all = self.series(f, 0, &w, true).1.expect("requested");
        SubsetFunction::new(self.n, all)
    }

    /// `int_0^T E_v[F(X_t)] dt`, using
    /// `int_0^T Pois(k; Lambda t) dt = P(N_{Lambda T} >= k + 1) / Lambda`.
    pub fn integral(&self, f: &SubsetFunction, v: &SubsetState, horizon: f64, tol: f64) -> Result<f64> {
        self.discounted_integral(f, v, horizon, 0.0, tol)
    }

    /// `int_0^T e^{-r t} E_v[F(X_t)] dt`, using
    /// `int_0^T e^{-rt} Pois(k; Lambda t) dt
    ///   = Lambda^k / (Lambda + r)^{k+1} P(N_{(Lambda + r) T} >= k + 1)`.
    pub fn discounted_integral(
        &self,
        f: &SubsetFunction,
        v: &SubsetState,
        horizon: f64,
        r: f64,
        tol: f64,
    ) -> Result<f64> {
        self.check(f)?;
        Self::check_time(horizon, tol)?;
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!("discount rate must be nonnegative, got {r}")));
        }
        let base = self.mask_of(v)?;
        if horizon == 0.0 {
            return Ok(0.0);
        }
        if self.lambda == 0.0 {
            let mass = if r == 0.0 { horizon } else { -(-r * horizon).exp_m1() / r };
            return Ok(mass * f.get(base));
        }
        let total = self.lambda + r;
        let pmf = poisson_weights(total * horizon, (tol * 1e-3).max(1e-300));
        let mut tail = vec![0.0; pmf.len()];
        let mut run = 0.0;
        for k in (0..pmf.len()).rev() {
            tail[k] = run;
            run += pmf[k];
        }
        let ratio = self.lambda / total;
        let mut geo = 1.0 / total;
        let weights: Vec<f64> = tail
            .iter()
            .map(|&tk| {
                let w = geo * tk;
                geo *= ratio;
                w
            })
            .collect();
        Ok(self.series(f, base, &weights, false).0)
    }
}

/// Free-standing generator application with the default engine limit.
pub fn generator_apply(model: &PercolationModel, f: &SubsetFunction) -> Result<SubsetFunction> {
    ExactEngine::new(model)?.generator_apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::InteractionMatrix;

    fn pair(a: f64, kappa: f64) -> PercolationModel {
        let xi = InteractionMatrix::from_rows(&[vec![0.0, a], vec![0.0, 0.0]]).unwrap();
        PercolationModel::new(xi, kappa).unwrap()
    }

    fn random_model(n: usize, seed: u64) -> PercolationModel {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, 0);
        let mut rows = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                if i != j && rng.random::<f64>() < 0.5 {
                    *x = rng.random::<f64>() / n as f64;
                }
            }
        }
        PercolationModel::new(InteractionMatrix::from_rows(&rows).unwrap(), 1.3).unwrap()
    }

    /// Classical RK4 on `u' = A u` over the full lattice.
    fn rk4(engine: &ExactEngine, f: &SubsetFunction, t: f64, steps: usize) -> Vec<f64> {
        let h = t / steps as f64;
        let n = f.n();
        let apply = |u: &[f64]| engine.generator_apply(&SubsetFunction::new(n, u.to_vec()).unwrap()).unwrap().values().to_vec();
        let mut u = f.values().to_vec();
        for _ in 0..steps {
            let k1 = apply(&u);
            let y2: Vec<f64> = u.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = apply(&y2);
            let y3: Vec<f64> = u.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = apply(&y3);
            let y4: Vec<f64> = u.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = apply(&y4);
            for i in 0..u.len() {
                u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        u
    }

    #[test]
    fn generator_examples() {
        let m = pair(0.7, 1.5);
        let e = ExactEngine::new(&m).unwrap();
        let one = SubsetFunction::constant(2, 1.0).unwrap();
        assert!(e.generator_apply(&one).unwrap().values().iter().all(|&x| x == 0.0));
        let card = SubsetFunction::cardinality_pow(2, 1).unwrap();
        let af = e.generator_apply(&card).unwrap();
        assert!((af.get(0b01) - 1.5 * 0.7).abs() < 1e-15);
        assert_eq!(af.get(0b11), 0.0);
        assert_eq!(af.get(0b10), 0.0);
    }

    #[test]
    fn two_state_closed_form() {
        let m = pair(1.0, 1.0);
        let e = ExactEngine::new(&m).unwrap();
        let card = SubsetFunction::cardinality_pow(2, 1).unwrap();
        let v = SubsetState::from_indices(2, &[0]).unwrap();
        for &t in &[0.0, 0.1, 1.0, 3.0, 10.0] {
            let got = e.expectation(&card, &v, t, 1e-14).unwrap();
            assert!((got - (2.0 - (-t).exp())).abs() < 1e-12, "t={t}");
            let int = e.integral(&card, &v, t, 1e-14).unwrap();
            let want = 2.0 * t - (1.0 - (-t).exp());
            assert!((int - want).abs() < 1e-11, "t={t}: {int} vs {want}");
            let r = 0.8;
            let disc = e.discounted_integral(&card, &v, t, r, 1e-14).unwrap();
            // int_0^t e^{-rs}(2 - e^{-s}) ds
            let want = 2.0 * (1.0 - (-r * t).exp()) / r - (1.0 - (-(1.0 + r) * t).exp()) / (1.0 + r);
            assert!((disc - want).abs() < 1e-11, "t={t}: {disc} vs {want}");
        }
    }

    #[test]
    fn full_set_is_absorbing_and_constants_fixed() {
        let m = random_model(6, 4);
        let e = ExactEngine::new(&m).unwrap();
        let f = SubsetFunction::from_fn(6, |mask| (mask as f64).sin()).unwrap();
        let full = SubsetState::full(6);
        assert!((e.expectation(&f, &full, 2.0, 1e-15).unwrap() - f.get(63)).abs() < 1e-14);
        let c = SubsetFunction::constant(6, 3.5).unwrap();
        let all = e.expectation_all(&c, 1.7, 1e-13).unwrap();
        assert!(all.values().iter().all(|&x| (x - 3.5).abs() < 1e-12));
    }

    #[test]
    fn matches_rk4_oracle() {
        let m = random_model(5, 9);
        let e = ExactEngine::new(&m).unwrap();
        let f = SubsetFunction::from_fn(5, |mask| (mask.count_ones() as f64).powi(2) + (mask & 3) as f64).unwrap();
        let t = 1.3;
        let want = rk4(&e, &f, t, 2000);
        let got = e.expectation_all(&f, t, 1e-14).unwrap();
        for (a, b) in got.values().iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
        let v = SubsetState::from_indices(5, &[1, 3]).unwrap();
        let single = e.expectation(&f, &v, t, 1e-14).unwrap();
        assert!((single - want[0b01010]).abs() < 1e-10);
    }

    #[test]
    fn integral_matches_quadrature_of_expectation() {
        let m = random_model(5, 2);
        let e = ExactEngine::new(&m).unwrap();
        let f = SubsetFunction::cardinality_pow(5, 2).unwrap();
        let v = SubsetState::from_indices(5, &[2]).unwrap();
        let (t, r) = (2.0, 0.6);
        let quad = crate::numeric::adaptive_simpson(
            |s| (-r * s).exp() * e.expectation(&f, &v, s, 1e-14).unwrap(),
            0.0,
            t,
            1e-11,
        );
        let closed = e.discounted_integral(&f, &v, t, r, 1e-13).unwrap();
        assert!((quad - closed).abs() < 1e-9 * closed.abs());
    }

    #[test]
    fn size_limit_enforced() {
        let xi = InteractionMatrix::zeros(17);
        let m = PercolationModel::new(xi, 1.0).unwrap();
        assert!(matches!(ExactEngine::new(&m), Err(Error::EngineTooLarge { .. })));
        assert!(ExactEngine::with_limit(&m, 17).is_ok());
    }
}
