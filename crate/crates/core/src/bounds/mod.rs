//! Entropy bounds: the percolation (Feynman–Kac) bound with explicit
//! constants, the structural values of the max / average / weighted /
//! sharper / setwise theorems, and log-Sobolev constants.

mod fk;
mod lsi;
mod theorems;

pub use fk::{h3_bound, percolation_entropy_bound, FkOptions};
pub use lsi::{lsi_constant, LsiKind};
pub use theorems::{
    avg_entropy_bound, batch_csv, max_entropy_bound, reversed_variant, run_request,
    setwise_bound, sharper_avg_bound, weighted_avg_bound, BoundRequest, Verdict,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Constants `(gamma, M, sigma, eta, C0, T)` of the model assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub gamma: f64,
    pub m: f64,
    pub sigma: f64,
    pub eta: Option<f64>,
    pub c0: f64,
    pub t: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants { gamma: 1.0, m: 1.0, sigma: 1.0, eta: None, c0: 0.0, t: 1.0 }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("gamma", self.gamma), ("M", self.m), ("sigma", self.sigma)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
            }
        }
        if !(self.c0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("C0 must be nonnegative, got {}", self.c0)));
        }
        if !(self.t >= 0.0) {
            return Err(Error::InvalidParameter(format!("T must be nonnegative, got {}", self.t)));
        }
        Ok(())
    }

    /// Rate scale of the percolation process, `gamma / sigma^2`.
    pub fn kappa(&self) -> f64 {
        self.gamma / (self.sigma * self.sigma)
    }

    /// Discount rate `r = sigma^2 / (4 eta)` of the uniform-in-time regime,
    /// after checking `sigma^2 > 12 eta gamma`.
    pub fn uniform_rate(&self) -> Result<f64> {
        let eta = self
            .eta
            .ok_or_else(|| Error::InvalidParameter("uniform mode needs the LSI constant eta".into()))?;
        if !(eta > 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        let s2 = self.sigma * self.sigma;
        if s2 <= 12.0 * eta * self.gamma {
            return Err(Error::NotApplicable(format!(
                "uniform regime needs sigma^2 > 12 eta gamma ({s2} <= {})",
                12.0 * eta * self.gamma
            )));
        }
        Ok(s2 / (4.0 * eta))
    }
}

/// Result of one structural bound evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub theorem: String,
    /// Bracketed quantity of the theorem, without its unspecified constant.
    pub structural: f64,
    /// The same quantity with the `(delta k + 1)` prefactor removed.
    pub core: f64,
    pub prefactor: f64,
    /// Value with explicit constants, where the argument provides them.
    pub explicit: Option<f64>,
    pub reversed: bool,
    pub inputs: serde_json::Value,
    pub verdict: Option<Verdict>,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
