use super::PercolationModel;
use crate::error::{Error, Result};
use crate::matrix::SubsetState;
use crate::rng::{stream, StreamRng};
use rand::Rng;
use rand_distr::Exp1;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A sample path of the percolation process up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: SubsetState,
    pub times: Vec<f64>,
    pub added: Vec<usize>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> SubsetState {
        let mut s = self.initial.clone();
        for &j in &self.added {
            s.insert(j);
        }
        s
    }

    /// State at time `t <= horizon`.
    pub fn state_at(&self, t: f64) -> SubsetState {
        let mut s = self.initial.clone();
        for (&tj, &j) in self.times.iter().zip(&self.added) {
            if tj > t {
                break;
            }
            s.insert(j);
        }
        s
    }

    /// CSV `time,added_index`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,added_index\n");
        for (t, j) in self.times.iter().zip(&self.added) {
            out.push_str(&format!("{t},{j}\n"));
        }
        out
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Gillespie sampling of the jump chain up to time `t`.
pub fn simulate(model: &PercolationModel, v: &SubsetState, t: f64, seed: u64) -> Result<Trajectory> {
    simulate_with_rng(model, v, t, &mut stream(seed, 0))
}

pub fn simulate_with_rng(
    model: &PercolationModel,
    v: &SubsetState,
    t: f64,
    rng: &mut StreamRng,
) -> Result<Trajectory> {
    check_time(t)?;
    let n = model.n();
    if v.ambient() != n {
        return Err(Error::LengthMismatch { expected: n, got: v.ambient() });
    }
    let kappa = model.kappa();
    let mut state = v.clone();
    let mut incoming = vec![0.0; n];
    for i in v.iter() {
        for (j, x) in model.xi().row(i) {
            incoming[j] += kappa * x;
        }
    }
    let (mut times, mut added) = (Vec::new(), Vec::new());
    let mut now = 0.0;
    loop {
        let total: f64 = (0..n).filter(|&j| !state.contains(j)).map(|j| incoming[j]).sum();
        if total <= 0.0 {
            break;
        }
        let hold: f64 = rng.sample::<f64, _>(Exp1) / total;
        if now + hold > t {
            break;
        }
        now += hold;
        let target = rng.random::<f64>() * total;
        let mut run = 0.0;
        let mut pick = None;
        for j in (0..n).filter(|&j| !state.contains(j)) {
            if incoming[j] > 0.0 {
                run += incoming[j];
                pick = Some(j);
                if run > target {
                    break;
                }
            }
        }
        let j = pick.expect("positive total rate has a candidate");
        state.insert(j);
        for (k, x) in model.xi().row(j) {
            incoming[k] += kappa * x;
        }
        times.push(now);
        added.push(j);
    }
    Ok(Trajectory { initial: v.clone(), times, added, horizon: t })
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Min-heap on distance, ties by index.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// First-passage percolation: i.i.d. `Exp(kappa xi_ij)` passage times on the
/// edges, and `X_t` is the ball of radius `t` around `v`. Requires symmetric
/// `xi`.
pub fn fpp_simulate(model: &PercolationModel, v: &SubsetState, t: f64, seed: u64) -> Result<Trajectory> {
    fpp_simulate_with_rng(model, v, t, &mut stream(seed, 0))
}

pub fn fpp_simulate_with_rng(
    model: &PercolationModel,
    v: &SubsetState,
    t: f64,
    rng: &mut StreamRng,
) -> Result<Trajectory> {
    check_time(t)?;
    if !model.xi().is_symmetric() {
        return Err(Error::NotApplicable("first-passage percolation needs a symmetric matrix".into()));
    }
    let n = model.n();
    if v.ambient() != n {
        return Err(Error::LengthMismatch { expected: n, got: v.ambient() });
    }
    let kappa = model.kappa();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    for i in v.iter() {
        dist[i] = 0.0;
        heap.push(Entry(0.0, i));
    }
    let (mut times, mut added) = (Vec::new(), Vec::new());
    // Each edge clock is drawn the first time the edge is relaxed from a
    // settled endpoint; it can never be consulted again, so lazy sampling
    // gives the same joint law as drawing all clocks up front.
    while let Some(Entry(d, i)) = heap.pop() {
        if settled[i] || d > dist[i] {
            continue;
        }
        if d > t {
            break;
        }
        settled[i] = true;
        if !v.contains(i) {
            times.push(d);
            added.push(i);
        }
        for (j, x) in model.xi().row(i) {
            if settled[j] {
                continue;
            }
            let clock: f64 = rng.sample::<f64, _>(Exp1) / (kappa * x);
            let cand = d + clock;
            if cand < dist[j] {
                dist[j] = cand;
                heap.push(Entry(cand, j));
            }
        }
    }
    Ok(Trajectory { initial: v.clone(), times, added, horizon: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_mean_field, InteractionMatrix};

    #[test]
    fn trivial_cases_have_no_jumps() {
        let m = PercolationModel::new(build_mean_field(5).unwrap(), 1.0).unwrap();
        let full = SubsetState::full(5);
        assert!(simulate(&m, &full, 10.0, 1).unwrap().added.is_empty());
        let z = PercolationModel::new(InteractionMatrix::zeros(5), 1.0).unwrap();
        let v = SubsetState::from_indices(5, &[1]).unwrap();
        assert!(simulate(&z, &v, 10.0, 1).unwrap().added.is_empty());
        assert!(fpp_simulate(&z, &v, 10.0, 1).unwrap().added.is_empty());
    }

    #[test]
    fn paths_are_monotone_and_reproducible() {
        let m = PercolationModel::new(build_mean_field(30).unwrap(), 1.0).unwrap();
        let v = SubsetState::from_indices(30, &[0, 1, 2]).unwrap();
        let a = simulate(&m, &v, 50.0, 42).unwrap();
        assert_eq!(a, simulate(&m, &v, 50.0, 42).unwrap());
        assert!(a.final_state().is_full());
        assert!(a.times.windows(2).all(|w| w[0] <= w[1]));
        let mut seen = v.clone();
        for &j in &a.added {
            assert!(seen.insert(j));
        }
        let b = fpp_simulate(&m, &v, 50.0, 42).unwrap();
        assert!(b.final_state().is_full());
        assert!(b.times.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.to_csv().starts_with("time,added_index\n"));
    }

    #[test]
    fn fpp_rejects_asymmetric() {
        let xi = InteractionMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let m = PercolationModel::new(xi, 1.0).unwrap();
        let v = SubsetState::from_indices(2, &[0]).unwrap();
        assert!(matches!(fpp_simulate(&m, &v, 1.0, 0), Err(Error::NotApplicable(_))));
    }
}
