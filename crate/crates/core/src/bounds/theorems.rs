use super::{BoundReport, ModelConstants};
use crate::error::{Error, Result};
use crate::matrix::{p_xi, q_xi_core, sum_squares, validate, InteractionMatrix, SubsetState};
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Slack on the weight-vector conditions.
pub const WEIGHT_SLACK: f64 = 1e-12;

/// Comparison of a bound against an oracle value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub oracle: f64,
    /// `oracle / structural`; bounded in `n` when the theorem is sharp.
    pub ratio: f64,
    /// Whether the explicit value dominates the oracle, when one exists.
    pub dominated: Option<bool>,
}

impl BoundReport {
    pub fn with_oracle(mut self, oracle: f64) -> Self {
        self.verdict = Some(Verdict {
            oracle,
            ratio: oracle / self.structural,
            dominated: self.explicit.map(|e| e >= oracle),
        });
        self
    }
}

fn check_k(xi: &InteractionMatrix, k: usize) -> Result<()> {
    if k == 0 || k > xi.n() {
        return Err(Error::InvalidParameter(format!("k must lie in 1..={}, got {k}", xi.n())));
    }
    Ok(())
}

fn check_columns(xi: &InteractionMatrix) -> Result<()> {
    let r = validate(xi, true);
    if !r.col_violations.is_empty() {
        return Err(Error::ColumnSumViolation(r.col_violations));
    }
    Ok(())
}

fn report(theorem: &str, prefactor: f64, core: f64, inputs: serde_json::Value) -> BoundReport {
    BoundReport {
        theorem: theorem.to_string(),
        structural: prefactor * core,
        core,
        prefactor,
        explicit: None,
        reversed: false,
        inputs,
        verdict: None,
    }
}

/// `(delta k + 1)(delta k)^2`.
pub fn max_entropy_bound(xi: &InteractionMatrix, k: usize, c: &ModelConstants) -> Result<BoundReport> {
    check_k(xi, k)?;
    let dk = xi.delta() * k as f64;
    Ok(report("max", dk + 1.0, dk * dk, json!({"n": xi.n(), "k": k, "delta": xi.delta(), "constants": c})))
}

/// `(delta k + 1) k^2/n sum_i delta_i^2`; needs column sums `<= 1`.
pub fn avg_entropy_bound(xi: &InteractionMatrix, k: usize, c: &ModelConstants) -> Result<BoundReport> {
    check_k(xi, k)?;
    check_columns(xi)?;
    let n = xi.n() as f64;
    let kf = k as f64;
    let s: f64 = xi.delta_i().iter().map(|d| d * d).sum();
    Ok(report(
        "avg",
        xi.delta() * kf + 1.0,
        kf * kf / n * s,
        json!({"n": xi.n(), "k": k, "delta": xi.delta(), "sum_delta_i_sq": s, "constants": c}),
    ))
}

/// `(delta k + 1) k^2 sum_i pi_i delta_i^2` for a sub-invariant weight vector.
pub fn weighted_avg_bound(
    xi: &InteractionMatrix,
    k: usize,
    pi: &[f64],
    c: &ModelConstants,
) -> Result<BoundReport> {
    check_k(xi, k)?;
    let n = xi.n();
    if pi.len() != n {
        return Err(Error::InvalidWeights(format!("expected {n} weights, got {}", pi.len())));
    }
    if let Some(i) = pi.iter().position(|&p| !(p >= 0.0)) {
        return Err(Error::InvalidWeights(format!("pi must be nonnegative (pi[{i}] = {})", pi[i])));
    }
    let total: f64 = pi.iter().sum();
    if total > 1.0 + WEIGHT_SLACK {
        return Err(Error::InvalidWeights(format!("sum of pi must be at most 1, got {total}")));
    }
    let pt = xi.matvec_transpose(pi);
    if let Some(j) = (0..n).find(|&j| pt[j] > pi[j] + WEIGHT_SLACK) {
        return Err(Error::InvalidWeights(format!(
            "pi^T xi <= pi^T fails at coordinate {j}: {} > {}",
            pt[j], pi[j]
        )));
    }
    let kf = k as f64;
    let s: f64 = pi.iter().zip(xi.delta_i()).map(|(p, d)| p * d * d).sum();
    Ok(report(
        "weighted",
        xi.delta() * kf + 1.0,
        kf * kf * s,
        json!({"n": n, "k": k, "delta": xi.delta(), "sum_pi_delta_i_sq": s, "constants": c}),
    ))
}

/// `(delta k + 1)(k^2/n^2 sum xi_ij^2 + k/n p_xi)`; needs column sums `<= 1`.
pub fn sharper_avg_bound(xi: &InteractionMatrix, k: usize, c: &ModelConstants) -> Result<BoundReport> {
    check_k(xi, k)?;
    check_columns(xi)?;
    let n = xi.n() as f64;
    let kf = k as f64;
    let s2 = sum_squares(xi);
    let p = p_xi(xi);
    Ok(report(
        "sharper",
        xi.delta() * kf + 1.0,
        kf * kf / (n * n) * s2 + kf / n * p,
        json!({"n": xi.n(), "k": k, "delta": xi.delta(), "sum_sq": s2, "p_xi": p, "constants": c}),
    ))
}

/// `q_xi(v)`; needs column sums `<= 1`.
pub fn setwise_bound(xi: &InteractionMatrix, v: &SubsetState, c: &ModelConstants) -> Result<BoundReport> {
    check_columns(xi)?;
    let core = q_xi_core(xi, v)?;
    Ok(report(
        "setwise",
        xi.delta() * v.len() as f64 + 1.0,
        core,
        json!({"n": xi.n(), "v": v.iter().collect::<Vec<_>>(), "delta": xi.delta(), "constants": c}),
    ))
}

/// Bound for the reversed entropy: the same value with the `(delta k + 1)`
/// prefactor removed.
pub fn reversed_variant(report: &BoundReport) -> BoundReport {
    let mut out = report.clone();
    out.structural = report.core;
    out.prefactor = 1.0;
    out.reversed = true;
    out.verdict = None;
    out
}

/// One row of a batch evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub theorem: String,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub v: Option<Vec<usize>>,
    #[serde(default)]
    pub pi: Option<Vec<f64>>,
    #[serde(default)]
    pub reversed: bool,
}

pub fn run_request(xi: &InteractionMatrix, req: &BoundRequest, c: &ModelConstants) -> Result<BoundReport> {
    let need_k = || req.k.ok_or_else(|| Error::InvalidParameter(format!("{} needs k", req.theorem)));
    let rep = match req.theorem.as_str() {
        "max" => max_entropy_bound(xi, need_k()?, c)?,
        "avg" => avg_entropy_bound(xi, need_k()?, c)?,
        "weighted" => {
            let pi = req.pi.as_ref().ok_or_else(|| Error::InvalidWeights("weighted needs pi".into()))?;
            weighted_avg_bound(xi, need_k()?, pi, c)?
        }
        "sharper" => sharper_avg_bound(xi, need_k()?, c)?,
        "setwise" => {
            let idx = req.v.as_ref().ok_or_else(|| Error::InvalidParameter("setwise needs v".into()))?;
            setwise_bound(xi, &SubsetState::from_indices(xi.n(), idx)?, c)?
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    Ok(if req.reversed { reversed_variant(&rep) } else { rep })
}

/// CSV `theorem,k,v,reversed,structural,core,prefactor`, one row per request.
pub fn batch_csv(xi: &InteractionMatrix, reqs: &[BoundRequest], c: &ModelConstants) -> Result<String> {
    let mut out = String::from("theorem,k,v,reversed,structural,core,prefactor\n");
    for req in reqs {
        let rep = run_request(xi, req, c)?;
        let k = req.k.map(|k| k.to_string()).unwrap_or_default();
        let v = req
            .v
            .as_ref()
            .map(|v| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rep.theorem, k, v, rep.reversed, rep.structural, rep.core, rep.prefactor
        ));
    }
    Ok(out)
}
