use crate::{usage, CliError};
use chaoscope_core::bounds::ModelConstants;
use chaoscope_core::matrix::io::read_matrix;
use chaoscope_core::matrix::{build_mean_field, build_random_walk, Graph};
use chaoscope_core::{InteractionMatrix, SubsetState};
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;

/// Where the interaction matrix comes from. At most one may be given.
#[derive(Args, Debug, Clone, Default, Serialize)]
pub struct MatrixSource {
    /// Matrix file, JSON (coo) or dense CSV.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Mean-field matrix 1/(n-1) off the diagonal.
    #[arg(long, value_name = "N")]
    pub mean_field: Option<usize>,
    /// Random walk on the n-cycle.
    #[arg(long, value_name = "N")]
    pub cycle: Option<usize>,
    /// Two particles with xi_01 = A and xi_10 = 0.
    #[arg(long, value_name = "A")]
    pub single_edge: Option<f64>,
}

impl MatrixSource {
    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    fn count(&self) -> usize {
        [self.matrix.is_some(), self.mean_field.is_some(), self.cycle.is_some(), self.single_edge.is_some()]
            .iter()
            .filter(|b| **b)
            .count()
    }

    pub fn load(&self) -> Result<InteractionMatrix, CliError> {
        if self.count() != 1 {
            return usage("give exactly one of --matrix, --mean-field, --cycle, --single-edge");
        }
        if let Some(path) = &self.matrix {
            return Ok(read_matrix(&read_file(path)?)?);
        }
        if let Some(n) = self.mean_field {
            return Ok(build_mean_field(n)?);
        }
        if let Some(n) = self.cycle {
            return Ok(build_random_walk(&Graph::cycle(n)?));
        }
        let a = self.single_edge.unwrap_or_default();
        Ok(InteractionMatrix::from_rows(&[vec![0.0, a], vec![0.0, 0.0]])?)
    }
}

/// Model constants of the entropy bounds.
#[derive(Args, Debug, Clone, Serialize)]
pub struct ConstantsArgs {
    /// Transport-entropy constant gamma.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Second-moment constant M.
    #[arg(long = "M", default_value_t = 1.0)]
    pub m: f64,
    /// Noise level sigma.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Log-Sobolev constant, needed for the uniform-in-time form.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Initial-entropy constant C0.
    #[arg(long, default_value_t = 0.0)]
    pub c0: f64,
    /// Time horizon T.
    #[arg(long = "T", default_value_t = 1.0)]
    pub horizon: f64,
}

impl ConstantsArgs {
    pub fn constants(&self) -> Result<ModelConstants, CliError> {
        let c = ModelConstants {
            gamma: self.gamma,
            m: self.m,
            sigma: self.sigma,
            eta: self.eta,
            c0: self.c0,
            t: self.horizon,
        };
        c.validate()?;
        Ok(c)
    }
}

pub fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn subset(n: usize, text: &str) -> Result<SubsetState, CliError> {
    Ok(SubsetState::parse(n, text)?)
}
