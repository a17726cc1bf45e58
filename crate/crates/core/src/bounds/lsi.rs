use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Settings with an explicit log-Sobolev constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LsiKind {
    /// Strongly convex confinement `grad^2 U >= lambda I`, initial LSI `eta0`.
    Convex { eta0: f64, sigma: f64, lambda: f64 },
    /// Torus with initial densities in `[1/lambda, lambda]` and
    /// `div_k = ||div K||_inf`.
    Torus { lambda: f64, sigma: f64, div_k: f64 },
}

pub fn lsi_constant(kind: LsiKind) -> Result<f64> {
    match kind {
        LsiKind::Convex { eta0, sigma, lambda } => {
            if !(lambda > 0.0) || !(eta0 >= 0.0) || !(sigma > 0.0) {
                return Err(Error::InvalidParameter("convex case needs lambda > 0, eta0 >= 0, sigma > 0".into()));
            }
            Ok((eta0 / 4.0).max(sigma * sigma / lambda))
        }
        LsiKind::Torus { lambda, sigma, div_k } => {
            if !(lambda >= 1.0) || !(sigma > 0.0) || !(div_k >= 0.0) {
                return Err(Error::InvalidParameter("torus case needs lambda >= 1, sigma > 0, div_k >= 0".into()));
            }
            let s = (2.0 * lambda.ln()).sqrt();
            let base = 2.0 * sigma * sigma * PI * PI;
            if div_k >= base / (1.0 + s) {
                return Err(Error::NotApplicable(format!(
                    "||div K|| = {div_k} violates the smallness threshold {}",
                    base / (1.0 + s)
                )));
            }
            let factor = 1.0 - s * div_k / (2.0 * (base - div_k));
            Ok(lambda * lambda / (8.0 * PI * PI) / factor)
        }
    }
}
