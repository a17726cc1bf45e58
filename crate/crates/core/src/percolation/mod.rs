//! The subset-valued percolation process: at rate `kappa * sum_{i in v} xi_ij`
//! the index `j` joins the current set `v`. Sets only grow and the full set
//! is absorbing.

mod bounds;
mod exact;
mod functional;
mod mc;
mod sim;
mod yule;

pub use bounds::{expectation_bound, payload_matrix, BoundFamily, ExpectationBound, Payload};
pub use exact::{generator_apply, ExactEngine, DEFAULT_ENGINE_LIMIT};
pub use functional::{Functional, FunctionalContext};
pub use mc::{mc_expectation, mc_law, McEngine, McEstimate};
pub use sim::{fpp_simulate, fpp_simulate_with_rng, simulate, simulate_with_rng, Trajectory};
pub use yule::{mean_field_cardinality_law, mean_field_moment, yule_second_moment};

use crate::error::{Error, Result};
use crate::matrix::{InteractionMatrix, SubsetState};

/// Largest `n` for which a [`SubsetFunction`] table may be allocated.
pub const SUBSET_TABLE_LIMIT: usize = 26;

#[derive(Debug, Clone)]
pub struct PercolationModel {
    xi: InteractionMatrix,
    kappa: f64,
}

impl PercolationModel {
    pub fn new(xi: InteractionMatrix, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        xi.require_well_formed()?;
        Ok(PercolationModel { xi, kappa })
    }

    pub fn xi(&self) -> &InteractionMatrix {
        &self.xi
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n(&self) -> usize {
        self.xi.n()
    }

    /// Transition rate `v -> v + j`; zero when `j` is already in `v`.
    pub fn rate(&self, v: &SubsetState, j: usize) -> f64 {
        if v.contains(j) {
            return 0.0;
        }
        self.kappa * v.iter().map(|i| self.xi.get(i, j)).sum::<f64>()
    }
}

/// A real function on all `2^n` subsets, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetFunction {
    n: usize,
    values: Vec<f64>,
}

impl SubsetFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_table(n)?;
        if values.len() != 1usize << n {
            return Err(Error::LengthMismatch { expected: 1 << n, got: values.len() });
        }
        Ok(SubsetFunction { n, values })
    }

    pub fn from_fn<F: FnMut(u64) -> f64>(n: usize, mut f: F) -> Result<Self> {
        check_table(n)?;
        Ok(SubsetFunction { n, values: (0..1u64 << n).map(&mut f).collect() })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    /// `|v|^p`.
    pub fn cardinality_pow(n: usize, p: i32) -> Result<Self> {
        Self::from_fn(n, |m| (m.count_ones() as f64).powi(p))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }

    pub fn at(&self, v: &SubsetState) -> Result<f64> {
        if v.ambient() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: v.ambient() });
        }
        Ok(self.values[v.mask().expect("table sizes fit a mask") as usize])
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    }
}

fn check_table(n: usize) -> Result<()> {
    if n > SUBSET_TABLE_LIMIT {
        return Err(Error::EngineTooLarge { n, limit: SUBSET_TABLE_LIMIT });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_rejects_bad_inputs() {
        let xi = InteractionMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(PercolationModel::new(xi.clone(), 0.0).is_err());
        let diag = InteractionMatrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(PercolationModel::new(diag, 1.0).is_err());
        let m = PercolationModel::new(xi, 2.0).unwrap();
        let v = SubsetState::from_indices(2, &[0]).unwrap();
        assert_eq!(m.rate(&v, 1), 2.0);
        assert_eq!(m.rate(&v, 0), 0.0);
    }

    #[test]
    fn subset_function_shapes() {
        assert!(SubsetFunction::new(3, vec![0.0; 7]).is_err());
        let f = SubsetFunction::cardinality_pow(3, 2).unwrap();
        assert_eq!(f.get(0b111), 9.0);
        assert_eq!(f.at(&SubsetState::from_indices(3, &[0, 2]).unwrap()).unwrap(), 4.0);
    }
}
