//! Euler–Maruyama for the particle system
//! `dX^i = (b0(X^i) + sum_j xi_ij b(X^i, X^j)) dt + sigma dB^i` and for its
//! independent projection. Coordinates of `R^d` are driven componentwise.

use crate::error::{Error, Result};
use crate::matrix::InteractionMatrix;
use crate::numeric::{entropy_kernel, pairwise_sum};
use crate::rng::{stream, StreamRng};
use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Shrinkage added to empirical covariances before taking the entropy.
pub const SHRINKAGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    /// `b0 = 0`, `b(x, y) = y`.
    Linear,
    /// No drift at all.
    Zero,
    /// `b0 = 0`, `b(x, y) = sin(y - x)`.
    Kuramoto,
    /// `b0 = -x`, `b(x, y) = tanh(y - x)`.
    Tanh,
}

impl std::str::FromStr for DriftKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(DriftKind::Linear),
            "zero" => Ok(DriftKind::Zero),
            "kuramoto" => Ok(DriftKind::Kuramoto),
            "tanh" => Ok(DriftKind::Tanh),
            other => Err(Error::InvalidParameter(format!("unknown drift `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub kind: DriftKind,
    pub d: usize,
}

impl DriftSpec {
    pub fn new(kind: DriftKind, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
        }
        Ok(DriftSpec { kind, d })
    }

    pub fn linear() -> Self {
        DriftSpec { kind: DriftKind::Linear, d: 1 }
    }

    #[inline]
    pub fn b0(&self, _t: f64, x: f64) -> f64 {
        match self.kind {
            DriftKind::Tanh => -x,
            _ => 0.0,
        }
    }

    #[inline]
    pub fn b(&self, _t: f64, x: f64, y: f64) -> f64 {
        match self.kind {
            DriftKind::Linear => y,
            DriftKind::Zero => 0.0,
            DriftKind::Kuramoto => (y - x).sin(),
            DriftKind::Tanh => (y - x).tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t: f64,
    pub samples: usize,
    pub seed: u64,
    pub sigma: f64,
}

impl SimConfig {
    /// Number of steps `T / dt`, after checking it is an integer up to rounding.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.t >= 0.0) || !(self.sigma >= 0.0) {
            return Err(Error::InvalidParameter("need dt > 0, T >= 0, sigma >= 0".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        let ratio = self.t / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!("T / dt = {ratio} is not an integer")));
        }
        Ok(steps as usize)
    }
}

/// Terminal samples, one row of `n * d` values per sample
/// (particle-major: column `i * d + c`).
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub n: usize,
    pub d: usize,
    pub data: Vec<f64>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.data.len() / (self.n * self.d).max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn width(&self) -> usize {
        self.n * self.d
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let w = self.width();
        &self.data[s * w..(s + 1) * w]
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<String> = (0..self.n)
            .flat_map(|i| {
                (0..self.d).map(move |c| if self.d == 1 { format!("x{i}") } else { format!("x{i}_{c}") })
            })
            .collect();
        let mut out = header.join(",");
        out.push('\n');
        for s in 0..self.len() {
            let row: Vec<String> = self.row(s).iter().map(|x| format!("{x:e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn gaussian(rng: &mut StreamRng) -> f64 {
    StandardNormal.sample(rng)
}

/// One path of the particle system from the origin; increments are drawn in
/// (step, particle, component) order from the sample's own stream.
fn particle_path(xi: &InteractionMatrix, drift: &DriftSpec, cfg: &SimConfig, steps: usize, r: u64) -> Vec<f64> {
    let n = xi.n();
    let d = drift.d;
    let mut rng = stream(cfg.seed, r);
    let mut x = vec![0.0; n * d];
    let mut next = vec![0.0; n * d];
    let sq = cfg.sigma * cfg.dt.sqrt();
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        for i in 0..n {
            for c in 0..d {
                let xi_c = x[i * d + c];
                let mut drift_v = drift.b0(t, xi_c);
                for (j, a) in xi.row(i) {
                    drift_v += a * drift.b(t, xi_c, x[j * d + c]);
                }
                next[i * d + c] = xi_c + drift_v * cfg.dt + sq * gaussian(&mut rng);
            }
        }
        std::mem::swap(&mut x, &mut next);
    }
    x
}

pub fn simulate_particles(xi: &InteractionMatrix, drift: &DriftSpec, cfg: &SimConfig) -> Result<Samples> {
    let steps = cfg.steps()?;
    if drift.d == 0 {
        return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
    }
    let rows: Vec<Vec<f64>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|r| particle_path(xi, drift, cfg, steps, r))
        .collect();
    Ok(Samples { n: xi.n(), d: drift.d, data: rows.concat() })
}

fn is_stochastic(xi: &InteractionMatrix) -> bool {
    xi.row_sums().iter().all(|s| (s - 1.0).abs() <= 1e-12)
}

/// Terminal samples of the independent projection.
///
/// Linear drift: the mean-field terms vanish and `Y = sigma B`. Zero `xi` or
/// zero drift: the projection coincides with the particle system. Otherwise
/// `xi` must have unit row sums, and `<Q^j_t, b(y, .)>` is replaced by the
/// empirical average over the simulated ensemble of coordinate `j`.
pub fn simulate_projection(xi: &InteractionMatrix, drift: &DriftSpec, cfg: &SimConfig) -> Result<Samples> {
    let steps = cfg.steps()?;
    let n = xi.n();
    let zero = InteractionMatrix::zeros(n);
    match drift.kind {
        DriftKind::Linear => {
            let brownian = DriftSpec { kind: DriftKind::Zero, d: drift.d };
            return simulate_particles(&zero, &brownian, cfg);
        }
        DriftKind::Zero => return simulate_particles(&zero, drift, cfg),
        _ if xi.nnz() == 0 => return simulate_particles(&zero, drift, cfg),
        _ => {}
    }
    if !is_stochastic(xi) {
        return Err(Error::NotApplicable(
            "nonlinear drift needs unit row sums; the mean-field terms <Q^j_t, b> are otherwise unknown".into(),
        ));
    }
    let d = drift.d;
    let w = n * d;
    let s_count = cfg.samples;
    let mut rngs: Vec<StreamRng> = (0..s_count as u64).map(|r| stream(cfg.seed, r)).collect();
    let mut state = vec![0.0; s_count * w];
    let sq = cfg.sigma * cfg.dt.sqrt();
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        // Column (particle j, component c) of the ensemble.
        let column = |col: usize| -> Vec<f64> { (0..s_count).map(|s| state[s * w + col]).collect() };
        let moments: Option<Vec<(f64, f64)>> = match drift.kind {
            DriftKind::Kuramoto => Some(
                (0..w)
                    .map(|col| {
                        let ys = column(col);
                        let sin: Vec<f64> = ys.iter().map(|y| y.sin()).collect();
                        let cos: Vec<f64> = ys.iter().map(|y| y.cos()).collect();
                        (pairwise_sum(&sin) / s_count as f64, pairwise_sum(&cos) / s_count as f64)
                    })
                    .collect(),
            ),
            _ => None,
        };
        let columns: Vec<Vec<f64>> = if moments.is_none() { (0..w).map(column).collect() } else { Vec::new() };
        let prev = &state;
        let updated: Vec<Vec<f64>> = rngs
            .par_iter_mut()
            .enumerate()
            .map(|(s, rng)| {
                let row = &prev[s * w..(s + 1) * w];
                let mut out = vec![0.0; w];
                for i in 0..n {
                    for c in 0..d {
                        let x = row[i * d + c];
                        let mut v = drift.b0(t, x);
                        for (j, a) in xi.row(i) {
                            let col = j * d + c;
                            let mean = match &moments {
                                // <Q, sin(. - x)> = E sin Y cos x - E cos Y sin x
                                Some(m) => m[col].0 * x.cos() - m[col].1 * x.sin(),
                                None => {
                                    let vals: Vec<f64> = columns[col].iter().map(|&y| drift.b(t, x, y)).collect();
                                    pairwise_sum(&vals) / s_count as f64
                                }
                            };
                            v += a * mean;
                        }
                        out[i * d + c] = x + v * cfg.dt + sq * gaussian(rng);
                    }
                }
                out
            })
            .collect();
        state = updated.concat();
    }
    Ok(Samples { n, d, data: state })
}

/// Empirical mean and covariance of the sample rows, with the standard
/// error of each covariance entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    pub mean: Vec<f64>,
    pub cov: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
}

pub fn empirical_covariance(samples: &Samples) -> Result<CovEstimate> {
    let count = samples.len();
    if count < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let w = samples.width();
    let mean: Vec<f64> = (0..w)
        .map(|c| {
            let col: Vec<f64> = (0..count).map(|s| samples.data[s * w + c]).collect();
            pairwise_sum(&col) / count as f64
        })
        .collect();
    let mut cov = DMatrix::zeros(w, w);
    let mut se = DMatrix::zeros(w, w);
    for a in 0..w {
        for b in a..w {
            let prods: Vec<f64> = (0..count)
                .map(|s| (samples.data[s * w + a] - mean[a]) * (samples.data[s * w + b] - mean[b]))
                .collect();
            let (m, e) = crate::numeric::mean_stderr(&prods);
            let c = m * count as f64 / (count - 1) as f64;
            cov[(a, b)] = c;
            cov[(b, a)] = c;
            se[(a, b)] = e;
            se[(b, a)] = e;
        }
    }
    Ok(CovEstimate { mean, cov, stderr: se })
}

/// `1/2 Tr h(T^{-1} Sigma_hat^v - I)` for scalar (d = 1) linear-drift samples.
pub fn gaussian_entropy_from_samples(samples: &Samples, v: &[usize], t: f64) -> Result<f64> {
    if samples.d != 1 {
        return Err(Error::NotApplicable("entropy from samples is defined for d = 1".into()));
    }
    if v.is_empty() {
        return Err(Error::EmptySubset);
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t}")));
    }
    if let Some(&bad) = v.iter().find(|&&i| i >= samples.n) {
        return Err(Error::InvalidParameter(format!("index {bad} out of range")));
    }
    let need = 10 * v.len() * v.len();
    if samples.len() < need {
        return Err(Error::InvalidParameter(format!(
            "need at least {need} samples for |v| = {}, got {}",
            v.len(),
            samples.len()
        )));
    }
    let sub = Samples {
        n: v.len(),
        d: 1,
        data: (0..samples.len()).flat_map(|s| v.iter().map(move |&i| samples.data[s * samples.n + i])).collect(),
    };
    let est = empirical_covariance(&sub)?;
    let k = v.len();
    let a = (est.cov + DMatrix::identity(k, k) * SHRINKAGE) / t - DMatrix::identity(k, k);
    let ev = SymmetricEigen::new(a).eigenvalues;
    if ev.iter().any(|&l| !(l > -1.0)) {
        return Err(Error::InvalidCovariance("empirical covariance is not positive definite".into()));
    }
    Ok(0.5 * ev.iter().map(|&l| entropy_kernel(l)).sum::<f64>())
}

/// Exact covariance of the Euler–Maruyama chain for the linear drift:
/// `C_{k+1} = (I + dt xi) C_k (I + dt xi)^T + sigma^2 dt I`.
pub fn em_linear_covariance(xi: &InteractionMatrix, cfg: &SimConfig) -> Result<DMatrix<f64>> {
    let steps = cfg.steps()?;
    let n = xi.n();
    let a = DMatrix::identity(n, n) + xi.to_matrix() * cfg.dt;
    let noise = DMatrix::identity(n, n) * (cfg.sigma * cfg.sigma * cfg.dt);
    let mut c = DMatrix::zeros(n, n);
    for _ in 0..steps {
        c = &a * c * a.transpose() + &noise;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::sigma_t;

    fn cfg(dt: f64, t: f64, samples: usize, seed: u64) -> SimConfig {
        SimConfig { dt, t, samples, seed, sigma: 1.0 }
    }

    fn small_xi() -> InteractionMatrix {
        InteractionMatrix::from_rows(&[
            vec![0.0, 0.5, 0.3, 0.0],
            vec![0.2, 0.0, 0.4, 0.1],
            vec![0.0, 0.6, 0.0, 0.3],
            vec![0.5, 0.0, 0.2, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn config_checks() {
        assert_eq!(cfg(0.01, 1.0, 1, 0).steps().unwrap(), 100);
        assert!(cfg(0.3, 1.0, 1, 0).steps().is_err());
        assert!(cfg(0.0, 1.0, 1, 0).steps().is_err());
        assert!(cfg(0.1, 1.0, 0, 0).steps().is_err());
    }

    #[test]
    fn brownian_covariance() {
        let c = cfg(0.05, 1.0, 20_000, 3);
        let s = simulate_particles(&InteractionMatrix::zeros(3), &DriftSpec::linear(), &c).unwrap();
        let est = empirical_covariance(&s).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((est.cov[(a, b)] - want).abs() < 5.0 * est.stderr[(a, b)]);
            }
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let xi = small_xi();
        let c = cfg(0.01, 0.5, 64, 11);
        let a = simulate_particles(&xi, &DriftSpec::linear(), &c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_particles(&xi, &DriftSpec::linear(), &c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn em_covariance_converges_at_order_one() {
        let xi = small_xi();
        let exact = sigma_t(&xi, 1.0, 1e-15).unwrap().sigma_t;
        let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&dt| (em_linear_covariance(&xi, &cfg(dt, 1.0, 1, 0)).unwrap() - &exact).abs().max())
            .collect();
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((r1 - 2.0).abs() < 0.1 && (r2 - 2.0).abs() < 0.1, "{errs:?}");
    }

    #[test]
    fn projection_of_linear_drift_is_brownian() {
        let xi = small_xi();
        let c = cfg(0.01, 0.5, 50, 2);
        let p = simulate_projection(&xi, &DriftSpec::linear(), &c).unwrap();
        let b = simulate_particles(&InteractionMatrix::zeros(4), &DriftSpec::new(DriftKind::Zero, 1).unwrap(), &c).unwrap();
        assert_eq!(p, b);
    }

    #[test]
    fn zero_xi_projection_matches_particles() {
        let z = InteractionMatrix::zeros(3);
        let c = cfg(0.02, 0.4, 30, 9);
        for kind in [DriftKind::Linear, DriftKind::Zero, DriftKind::Kuramoto, DriftKind::Tanh] {
            let d = DriftSpec::new(kind, 2).unwrap();
            assert_eq!(simulate_projection(&z, &d, &c).unwrap(), simulate_particles(&z, &d, &c).unwrap());
        }
    }

    #[test]
    fn nonstochastic_nonlinear_rejected() {
        let c = cfg(0.1, 0.2, 4, 0);
        let d = DriftSpec::new(DriftKind::Tanh, 1).unwrap();
        assert!(matches!(simulate_projection(&small_xi(), &d, &c), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn kuramoto_moment_trick_matches_direct_average() {
        let xi = crate::matrix::build_mean_field(3).unwrap();
        let c = cfg(0.1, 0.3, 20, 4);
        let d = DriftSpec::new(DriftKind::Kuramoto, 1).unwrap();
        let out = simulate_projection(&xi, &d, &c).unwrap();
        // O(S^2) reference with the same streams
        let mut rngs: Vec<StreamRng> = (0..20).map(|r| stream(4, r)).collect();
        let mut y = vec![vec![0.0f64; 3]; 20];
        for _ in 0..3 {
            let prev = y.clone();
            for (s, rng) in rngs.iter_mut().enumerate() {
                for i in 0..3 {
                    let x = prev[s][i];
                    let mut v = 0.0;
                    for (j, a) in xi.row(i) {
                        let m: f64 = prev.iter().map(|row| (row[j] - x).sin()).sum::<f64>() / 20.0;
                        v += a * m;
                    }
                    y[s][i] = x + v * 0.1 + 0.1f64.sqrt() * gaussian(rng);
                }
            }
        }
        let flat: Vec<f64> = y.concat();
        for (a, b) in out.data.iter().zip(&flat) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let s = Samples { n: 2, d: 1, data: vec![1.0, 2.0, 3.0, 4.0] };
        let csv = s.to_csv();
        assert!(csv.starts_with("x0,x1\n"));
        assert_eq!(csv.lines().count(), 3);
        let s2 = Samples { n: 1, d: 2, data: vec![1.0, 2.0] };
        assert!(s2.to_csv().starts_with("x0_0,x0_1\n"));
    }

    #[test]
    fn entropy_from_samples_requires_enough_rows() {
        let s = Samples { n: 2, d: 1, data: vec![0.0; 20] };
        assert!(gaussian_entropy_from_samples(&s, &[0, 1], 1.0).is_err());
    }
}
