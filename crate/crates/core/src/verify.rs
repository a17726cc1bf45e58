//! Randomized battery of the pointwise inequalities: generator lemmas,
//! expectation bounds, the Gaussian sandwiches and the percolation
//! certification of the Gaussian entropies.

use crate::bounds::{percolation_entropy_bound, FkOptions};
use crate::error::{Error, Result};
use crate::gaussian::{
    avg_entropy, avg_sandwich, avg_trace_sq, clique_lower_bound, d_t, d_t_envelope, entropy_bounds,
    h_sandwich, max_upper_bound, sigma_t, AvgMode, GaussianModel,
};
use crate::matrix::{InteractionMatrix, SubsetState};
use crate::numeric::entropy_kernel;
use crate::percolation::{
    mean_field_moment, yule_second_moment, BoundFamily, ExactEngine, ExpectationBound, Payload,
    PercolationModel, SubsetFunction,
};
use crate::rng::{stream, StreamRng};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Absolute slack allowed on the exact generator inequalities.
pub const GENERATOR_SLACK: f64 = 1e-9;
/// Relative slack for inequalities involving truncated series or quadrature.
pub const NUMERIC_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Generator,
    Expectations,
    Gaussian,
    Bounds,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generator" => Ok(Suite::Generator),
            "expectations" => Ok(Suite::Expectations),
            "gaussian" => Ok(Suite::Gaussian),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidParameter(format!("unknown suite `{other}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Generator => "generator",
            Suite::Expectations => "expectations",
            Suite::Gaussian => "gaussian",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

/// One inequality `lhs <= rhs`, aggregated over the subsets it was checked on:
/// `slack` is the smallest `rhs - lhs` and `worst` the subset attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub instance: usize,
    pub n: usize,
    pub evaluated: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub worst: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub instances: usize,
    pub seed: u64,
    pub checks: usize,
    pub failures: usize,
    pub min_slack: f64,
    pub entries: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Running minimum of `rhs - lhs` for one named inequality.
struct Tracker {
    suite: &'static str,
    name: String,
    instance: usize,
    n: usize,
    evaluated: usize,
    lhs: f64,
    rhs: f64,
    slack: f64,
    tol: f64,
    worst: Option<String>,
    pass: bool,
}

impl Tracker {
    fn new(suite: &'static str, name: impl Into<String>, instance: usize, n: usize) -> Self {
        Tracker {
            suite,
            name: name.into(),
            instance,
            n,
            evaluated: 0,
            lhs: f64::NAN,
            rhs: f64::NAN,
            slack: f64::INFINITY,
            tol: 0.0,
            worst: None,
            pass: true,
        }
    }

    /// Record `lhs <= rhs` with an absolute tolerance.
    fn record(&mut self, lhs: f64, rhs: f64, tol: f64, at: Option<&SubsetState>) {
        self.evaluated += 1;
        let slack = rhs - lhs;
        let ok = slack >= -tol && slack.is_finite();
        if !ok {
            self.pass = false;
        }
        if self.evaluated == 1 || slack < self.slack || slack.is_nan() {
            self.slack = slack;
            self.lhs = lhs;
            self.rhs = rhs;
            self.tol = tol;
            self.worst = at.map(|v| v.to_string());
        }
    }

    fn finish(self) -> Check {
        Check {
            suite: self.suite.into(),
            name: self.name,
            instance: self.instance,
            n: self.n,
            evaluated: self.evaluated,
            lhs: self.lhs,
            rhs: self.rhs,
            slack: self.slack,
            tolerance: self.tol,
            worst: self.worst,
            pass: self.pass,
        }
    }
}

/// Random nonnegative `xi` with zero diagonal and row and column sums at most 1.
pub fn random_instance(n: usize, rng: &mut StreamRng) -> InteractionMatrix {
    let density: f64 = rng.random_range(0.3..1.0);
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j && rng.random::<f64>() < density {
                *x = rng.random::<f64>();
            }
        }
    }
    let row_max = rows.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let col_max = (0..n).map(|j| rows.iter().map(|r| r[j]).sum::<f64>()).fold(0.0, f64::max);
    let top = row_max.max(col_max);
    if top > 0.0 {
        let scale = rng.random_range(0.5..1.0) / top;
        rows.iter_mut().flatten().for_each(|x| *x *= scale);
    }
    InteractionMatrix::from_rows(&rows).expect("generated matrix is well formed")
}

/// Random `xi` with unit row sums (column sums unconstrained).
pub fn random_stochastic(n: usize, rng: &mut StreamRng) -> InteractionMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = rng.random::<f64>().powi(2);
            }
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    InteractionMatrix::from_rows(&rows).expect("generated matrix is well formed")
}

fn random_vector(n: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn random_nonneg_matrix(n: usize, rng: &mut StreamRng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random::<f64>())
}

/// Pointwise generator inequalities over all `2^n` subsets.
pub fn generator_checks(xi: &InteractionMatrix, kappa: f64, instance: usize, rng: &mut StreamRng) -> Result<Vec<Check>> {
    let n = xi.n();
    let model = PercolationModel::new(xi.clone(), kappa)?;
    let engine = ExactEngine::new(&model)?;
    let x = random_vector(n, rng);
    let g = random_nonneg_matrix(n, rng);
    let xi_x = xi.matvec(&x);
    let gm = xi.to_matrix();
    let g_diag: Vec<f64> = (0..n).map(|i| g[(i, i)]).collect();
    let xi_gdiag = xi.matvec(&g_diag);
    let sym = &gm * &g + &g * gm.transpose();
    let dot = |mask: u64, y: &[f64]| -> f64 { (0..n).filter(|i| mask >> i & 1 == 1).map(|i| y[i]).sum() };
    let quad = |mask: u64, m: &DMatrix<f64>| -> f64 {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        idx.iter().map(|&i| idx.iter().map(|&j| m[(i, j)]).sum::<f64>()).sum()
    };
    let card = |mask: u64| (mask.count_ones()) as f64;
    let mut out = Vec::new();
    let mut run = |name: String,
                   f: &dyn Fn(u64) -> f64,
                   bound: &dyn Fn(u64) -> f64|
     -> Result<()> {
        let table = SubsetFunction::from_fn(n, f)?;
        let af = engine.generator_apply(&table)?;
        let mut tr = Tracker::new("generator", name, instance, n);
        for mask in 0..(1u64 << n) {
            let v = SubsetState::from_mask(n, mask);
            tr.record(af.get(mask), bound(mask), GENERATOR_SLACK, Some(&v));
        }
        out.push(tr.finish());
        Ok(())
    };
    for l in 1..=3i32 {
        run(
            format!("poly l={l}"),
            &|m| card(m).powi(l),
            &|m| kappa * card(m) * ((card(m) + 1.0).powi(l) - card(m).powi(l)),
        )?;
    }
    for l in 0..=2i32 {
        run(
            format!("linear l={l}"),
            &|m| card(m).powi(l) * dot(m, &x),
            &|m| {
                let k = card(m);
                kappa * (k + 1.0).powi(l) * dot(m, &xi_x) + kappa * k * ((k + 1.0).powi(l) - k.powi(l)) * dot(m, &x)
            },
        )?;
    }
    run(
        "quadratic".into(),
        &|m| quad(m, &g),
        &|m| kappa * dot(m, &xi_gdiag) + kappa * quad(m, &sym),
    )?;
    run(
        "quadratic weighted".into(),
        &|m| card(m) * quad(m, &g),
        &|m| {
            let k = card(m);
            kappa * (k + 1.0) * (dot(m, &xi_gdiag) + quad(m, &sym)) + kappa * k * quad(m, &g)
        },
    )?;
    Ok(out)
}

/// Exact expectations against the eight bound families at the given times.
pub fn expectation_checks(
    xi: &InteractionMatrix,
    kappa: f64,
    times: &[f64],
    instance: usize,
    rng: &mut StreamRng,
) -> Result<Vec<Check>> {
    let n = xi.n();
    let model = PercolationModel::new(xi.clone(), kappa)?;
    let engine = ExactEngine::new(&model)?;
    let x = Payload::Vector(random_vector(n, rng));
    let g = Payload::Matrix(random_nonneg_matrix(n, rng));
    let mut out = Vec::new();
    for family in BoundFamily::ALL {
        let payload = match family {
            BoundFamily::Ia | BoundFamily::Ib | BoundFamily::Ic => Payload::None,
            BoundFamily::IIa | BoundFamily::IIb | BoundFamily::IIc => x.clone(),
            _ => g.clone(),
        };
        let table = family.target(&payload, n)?.table(xi)?;
        for &t in times {
            let exact = engine.expectation_all(&table, t, 1e-13)?;
            let bound = ExpectationBound::new(&model, family, t, &payload)?;
            let mut tr = Tracker::new("expectations", format!("{family} t={t}"), instance, n);
            for mask in 1..(1u64 << n) {
                let v = SubsetState::from_mask(n, mask);
                let rhs = bound.evaluate(&v);
                tr.record(exact.get(mask), rhs, NUMERIC_SLACK * rhs.abs().max(1.0), Some(&v));
            }
            out.push(tr.finish());
        }
    }
    Ok(out)
}

/// `E_v |X_t|^2 <= yule_second_moment(|v|, kappa, t)` on the mean-field model.
pub fn yule_checks(n: usize, kappa: f64, sizes: &[usize], times: &[f64]) -> Result<Vec<Check>> {
    let mut tr = Tracker::new("expectations", format!("yule domination n={n}"), 0, n);
    for &k in sizes {
        for &t in times {
            let exact = mean_field_moment(n, k, kappa, t, 2)?;
            let yule = yule_second_moment(k, kappa, t);
            tr.record(exact, yule, NUMERIC_SLACK * yule.max(1.0), None);
        }
    }
    Ok(vec![tr.finish()])
}

/// Horizon inside the small-time window of `xi`.
fn window_time(xi: &InteractionMatrix, cap: f64, rng: &mut StreamRng) -> f64 {
    let rho = crate::gaussian::operator_norm(xi);
    let window = if rho > 0.0 { std::f64::consts::LN_2 / (2.0 * rho) } else { cap };
    rng.random_range(0.2..1.0) * window.min(cap)
}

/// Gaussian sandwiches on one instance; `k_max` caps the average checks.
pub fn gaussian_checks(model: &GaussianModel, instance: usize, k_max: usize) -> Result<Vec<Check>> {
    let n = model.n();
    let mut out = Vec::new();
    let tol = |x: f64| NUMERIC_SLACK * x.abs().max(1e-12) + 1e-15;
    // eigenvalue window
    let (lo, hi) = model.eigenvalue_window();
    let ev = SymmetricEigen::new(model.normalized_excess()).eigenvalues;
    let mut low = Tracker::new("gaussian", "eigenvalues >= e^{-2 rho T} - 1", instance, n);
    let mut high = Tracker::new("gaussian", "eigenvalues <= e^{2 rho T} - 1", instance, n);
    for &l in ev.iter() {
        low.record(lo, l, 1e-12, None);
        high.record(l, hi, 1e-12, None);
    }
    out.push(low.finish());
    out.push(high.finish());

    let in_window = model.in_small_time_window();
    let rows_ok = model.xi.max_row_sum() <= 1.0 + 1e-12;
    let mut sand_lo = Tracker::new("gaussian", "trace/6 <= H", instance, n);
    let mut sand_up = Tracker::new("gaussian", "H <= e^{6 rho T} trace", instance, n);
    let mut clique = Tracker::new("gaussian", "clique T^2/12 sum xi^2 <= H", instance, n);
    let mut maxb = Tracker::new("gaussian", "H <= e^{10 rho T} delta^2 |v|^2", instance, n);
    let mut mono = Tracker::new("gaussian", "H(v) <= H(v + j)", instance, n);
    let full = 1u64 << n;
    let mut exact = vec![0.0; full as usize];
    for mask in 1..full {
        let v = SubsetState::from_mask(n, mask);
        let p = entropy_bounds(model, &v)?;
        exact[mask as usize] = p.exact;
        sand_up.record(p.exact, p.upper, tol(p.upper), Some(&v));
        if in_window {
            sand_lo.record(p.lower, p.exact, tol(p.exact), Some(&v));
            clique.record(clique_lower_bound(model, &v), p.exact, tol(p.exact), Some(&v));
        }
        if rows_ok {
            let b = max_upper_bound(model, &v);
            maxb.record(p.exact, b, tol(b), Some(&v));
        }
    }
    for mask in 1..full {
        for j in 0..n {
            if mask >> j & 1 == 0 {
                let big = exact[(mask | 1 << j) as usize];
                mono.record(exact[mask as usize], big, 1e-13 + NUMERIC_SLACK * big, Some(&SubsetState::from_mask(n, mask)));
            }
        }
    }
    out.push(sand_up.finish());
    out.push(mono.finish());
    if in_window {
        out.push(sand_lo.finish());
        out.push(clique.finish());
    }
    if rows_ok {
        out.push(maxb.finish());
    }

    // average identity and sandwich
    let a = model.normalized_excess();
    let mut ident = Tracker::new("gaussian", "avgtrace identity", instance, n);
    for k in 1..=n {
        let closed = avg_trace_sq(&a, k)?;
        let mut sum = 0.0;
        let mut count = 0usize;
        for mask in 1..full {
            if mask.count_ones() as usize == k {
                let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let s = DMatrix::from_fn(k, k, |x, y| a[(idx[x], idx[y])]);
                sum += (&s * &s).trace();
                count += 1;
            }
        }
        let brute = sum / count as f64;
        // two-sided: record both directions
        ident.record(closed, brute, 1e-12, None);
        ident.record(brute, closed, 1e-12, None);
    }
    out.push(ident.finish());

    let mut avg_lo = Tracker::new("gaussian", "explicit average lower", instance, n);
    let mut avg_up = Tracker::new("gaussian", "explicit average upper", instance, n);
    let mut tr_lo = Tracker::new("gaussian", "average trace/6 <= avg H", instance, n);
    let mut tr_up = Tracker::new("gaussian", "avg H <= e^{6 rho T} average trace", instance, n);
    for k in 1..=k_max.min(n) {
        let avg = avg_entropy(model, k, AvgMode::Enumerate)?.value;
        let s = avg_sandwich(model, k)?;
        avg_up.record(avg, s.upper, tol(s.upper), None);
        tr_up.record(avg, s.trace_upper, tol(s.trace_upper), None);
        if in_window {
            avg_lo.record(s.lower, avg, tol(avg), None);
            tr_lo.record(s.trace_lower, avg, tol(avg), None);
        }
    }
    out.push(avg_up.finish());
    out.push(tr_up.finish());
    if in_window {
        out.push(avg_lo.finish());
        out.push(tr_lo.finish());
    }

    let d = d_t(&model.xi, model.t, 1e-16)?;
    let (dl, du) = d_t_envelope(&model.xi, model.t);
    let mut env = Tracker::new("gaussian", "D_T envelope", instance, n);
    env.record(dl, d, tol(d) + 1e-300, None);
    env.record(d, du, tol(du) + 1e-300, None);
    out.push(env.finish());
    Ok(out)
}

/// `h` sandwich on a grid of `[alpha, 1]` for a few windows.
pub fn h_grid_checks() -> Vec<Check> {
    let mut lo = Tracker::new("gaussian", "h(x) >= x^2/6 on [alpha, 1]", 0, 0);
    let mut up = Tracker::new("gaussian", "h(x) <= x^2 (1/2 + alpha_-/(3(1+alpha)^3))", 0, 0);
    for &rt in &[0.01, 0.1, 0.25, std::f64::consts::LN_2 / 2.0] {
        let alpha = (-2.0f64 * rt).exp() - 1.0;
        for i in 0..=1000 {
            let x = alpha + (1.0 - alpha) * i as f64 / 1000.0;
            let (l, u) = h_sandwich(x, alpha);
            let h = entropy_kernel(x);
            lo.record(l, h, 1e-16, None);
            up.record(h, u, 1e-16, None);
        }
    }
    vec![lo.finish(), up.finish()]
}

/// The percolation bound with the Gaussian constants dominates the exact
/// Gaussian entropy for every nonempty subset.
pub fn certification_checks(model: &GaussianModel, instance: usize) -> Result<Vec<Check>> {
    let n = model.n();
    let c = model.derived_constants();
    let mut tr = Tracker::new("bounds", "Gaussian entropy <= percolation bound", instance, n);
    let vals: Vec<(u64, f64, f64)> = (1..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let v = SubsetState::from_mask(n, mask);
            let h = crate::gaussian::exact_entropy(model, &v)?;
            let b = percolation_entropy_bound(&model.xi, &v, &c, &FkOptions::default())?;
            Ok((mask, h, b))
        })
        .collect::<Result<_>>()?;
    for (mask, h, b) in vals {
        tr.record(h, b, 1e-6 * b.max(1e-12), Some(&SubsetState::from_mask(n, mask)));
    }
    Ok(vec![tr.finish()])
}

fn report(suite: Suite, instances: usize, seed: u64, entries: Vec<Check>) -> VerifyReport {
    let failures = entries.iter().filter(|c| !c.pass).count();
    let min_slack = entries.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
    VerifyReport { suite: suite.to_string(), instances, seed, checks: entries.len(), failures, min_slack, entries }
}

/// Instance `idx` of the shared ensemble: `n` in `3..=n_max`, `kappa` in `[0.5, 2)`.
pub fn ensemble_instance(seed: u64, idx: usize, n_max: usize) -> (InteractionMatrix, f64, StreamRng) {
    let mut rng = stream(seed, idx as u64);
    let n = rng.random_range(3..=n_max);
    let xi = random_instance(n, &mut rng);
    let kappa = rng.random_range(0.5..2.0);
    (xi, kappa, rng)
}

/// Instance `idx` of the Gaussian ensemble: unit row sums for even `idx`,
/// row and column sums at most 1 for odd `idx`; `T` inside the window.
pub fn gaussian_instance(seed: u64, idx: usize, n_max: usize, t_cap: f64) -> Result<GaussianModel> {
    let mut rng = stream(seed, 1 << 32 | idx as u64);
    let n = rng.random_range(2..=n_max);
    let xi = if idx % 2 == 0 { random_stochastic(n, &mut rng) } else { random_instance(n, &mut rng) };
    let t = window_time(&xi, t_cap, &mut rng);
    sigma_t(&xi, t, 1e-15)
}

pub fn run_suite(suite: Suite, instances: usize, seed: u64) -> Result<VerifyReport> {
    let mut entries = Vec::new();
    let want = |s: Suite| suite == Suite::All || suite == s;
    if want(Suite::Generator) {
        let parts: Vec<Vec<Check>> = (0..instances)
            .into_par_iter()
            .map(|i| {
                let (xi, kappa, mut rng) = ensemble_instance(seed, i, 10);
                generator_checks(&xi, kappa, i, &mut rng)
            })
            .collect::<Result<_>>()?;
        entries.extend(parts.into_iter().flatten());
    }
    if want(Suite::Expectations) {
        let parts: Vec<Vec<Check>> = (0..instances)
            .into_par_iter()
            .map(|i| {
                let (xi, kappa, mut rng) = ensemble_instance(seed, i, 10);
                expectation_checks(&xi, kappa, &[0.1, 0.5, 1.0, 2.0], i, &mut rng)
            })
            .collect::<Result<_>>()?;
        entries.extend(parts.into_iter().flatten());
        entries.extend(yule_checks(20, 1.0, &[1, 2, 3, 4, 5, 6], &[0.25, 1.0, 4.0])?);
    }
    if want(Suite::Gaussian) {
        let parts: Vec<Vec<Check>> = (0..instances)
            .into_par_iter()
            .map(|i| {
                let model = gaussian_instance(seed, i, 10, 1.0)?;
                gaussian_checks(&model, i, 4)
            })
            .collect::<Result<_>>()?;
        entries.extend(parts.into_iter().flatten());
        entries.extend(h_grid_checks());
    }
    if want(Suite::Bounds) {
        let parts: Vec<Vec<Check>> = (0..instances)
            .into_par_iter()
            .map(|i| {
                let model = gaussian_instance(seed, i, 8, 0.5)?;
                certification_checks(&model, i)
            })
            .collect::<Result<_>>()?;
        entries.extend(parts.into_iter().flatten());
    }
    Ok(report(suite, instances, seed, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_is_well_formed() {
        for i in 0..20 {
            let (xi, _, _) = ensemble_instance(3, i, 10);
            assert!(xi.is_well_formed() && xi.max_col_sum() <= 1.0 + 1e-12);
        }
        let mut rng = stream(1, 1);
        let s = random_stochastic(5, &mut rng);
        assert!(s.row_sums().iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn small_generator_suite_passes() {
        let r = run_suite(Suite::Generator, 4, 9).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.checks, 4 * 8);
    }

    #[test]
    fn tracker_flags_violation() {
        let mut t = Tracker::new("x", "y", 0, 1);
        t.record(1.0, 2.0, 0.0, None);
        t.record(2.0, 1.0, 1e-9, None);
        let c = t.finish();
        assert!(!c.pass);
        assert_eq!(c.slack, -1.0);
    }
}
