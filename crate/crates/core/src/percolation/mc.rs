use super::{fpp_simulate_with_rng, simulate_with_rng, Functional, PercolationModel};
use crate::error::{Error, Result};
use crate::matrix::SubsetState;
use crate::numeric::mean_stderr;
use crate::rng::stream;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McEngine {
    Gillespie,
    Fpp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub functional: String,
    pub v: Vec<usize>,
    pub t: f64,
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serialization cannot fail")
    }
}

/// Terminal states of `reps` independent paths; replication `r` uses stream
/// `(seed, r)` and results are kept in replication order.
fn terminal_states(
    model: &PercolationModel,
    v: &SubsetState,
    t: f64,
    reps: usize,
    seed: u64,
    engine: McEngine,
) -> Result<Vec<SubsetState>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let path = match engine {
                McEngine::Gillespie => simulate_with_rng(model, v, t, &mut rng)?,
                McEngine::Fpp => fpp_simulate_with_rng(model, v, t, &mut rng)?,
            };
            Ok(path.final_state())
        })
        .collect()
}

/// Sample mean of `F(X_t)` with its standard error.
pub fn mc_expectation(
    model: &PercolationModel,
    functional: &Functional,
    v: &SubsetState,
    t: f64,
    reps: usize,
    seed: u64,
    engine: McEngine,
) -> Result<McEstimate> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 replications, got {reps}")));
    }
    let states = terminal_states(model, v, t, reps, seed, engine)?;
    let values = states
        .par_iter()
        .map(|s| functional.evaluate(model.xi(), s))
        .collect::<Result<Vec<f64>>>()?;
    let (mean, stderr) = mean_stderr(&values);
    Ok(McEstimate {
        functional: functional.name(),
        v: v.iter().collect(),
        t,
        mean,
        stderr,
        reps,
        seed,
    })
}

/// Empirical law of `X_t` (relative frequencies keyed by member list).
pub fn mc_law(
    model: &PercolationModel,
    v: &SubsetState,
    t: f64,
    reps: usize,
    seed: u64,
    engine: McEngine,
) -> Result<BTreeMap<Vec<usize>, f64>> {
    let states = terminal_states(model, v, t, reps, seed, engine)?;
    let mut law = BTreeMap::new();
    for s in states {
        *law.entry(s.iter().collect()).or_insert(0.0) += 1.0;
    }
    for p in law.values_mut() {
        *p /= reps as f64;
    }
    Ok(law)
}
