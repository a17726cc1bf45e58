use crate::output::{num, opt, Format, Output, Plot, Table};
use crate::source::MatrixSource;
use crate::{usage, CliError};
use chaoscope_core::gaussian::sigma_t;
use chaoscope_core::matrix::build_mean_field;
use chaoscope_core::sde::{
    em_linear_covariance, empirical_covariance, simulate_particles, simulate_projection, DriftKind,
    DriftSpec, SimConfig,
};
use chaoscope_core::InteractionMatrix;
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;

/// `--check` fails when an entry is further than this many standard errors
/// from the continuous-time covariance.
const CHECK_Z: f64 = 5.0;

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// Mean-field xi on n particles when no source is given.
    #[arg(long)]
    pub n: Option<usize>,
    /// Shorthand for `--drift linear`.
    #[arg(long)]
    pub linear: bool,
    /// linear, zero, kuramoto or tanh.
    #[arg(long)]
    pub drift: Option<String>,
    /// Dimension of each particle.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Simulate the independent projection instead of the particle system.
    #[arg(long)]
    pub projection: bool,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Write the terminal samples as CSV.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    /// Exit 1 if some covariance entry is more than 5 stderr from the oracle.
    #[arg(long)]
    pub check: bool,
}

#[derive(Serialize)]
struct Entry {
    i: usize,
    j: usize,
    empirical: f64,
    stderr: f64,
    oracle: Option<f64>,
    em_oracle: Option<f64>,
    z: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    drift: DriftKind,
    projection: bool,
    n: usize,
    d: usize,
    config: SimConfig,
    mean: Vec<f64>,
    entries: Vec<Entry>,
}

fn matrix(a: &SimulateArgs) -> Result<InteractionMatrix, CliError> {
    match (a.n, a.source.is_empty()) {
        (Some(n), true) => Ok(build_mean_field(n)?),
        (None, false) => a.source.load(),
        _ => usage("give either --n or one matrix source"),
    }
}

pub fn run(a: &SimulateArgs, format: Option<Format>) -> Result<Output, CliError> {
    let xi = matrix(a)?;
    let n = xi.n();
    let kind = match (&a.drift, a.linear) {
        (Some(_), true) => return usage("--linear and --drift are exclusive"),
        (Some(s), false) => s.parse::<DriftKind>()?,
        (None, _) => DriftKind::Linear,
    };
    let drift = DriftSpec::new(kind, a.d)?;
    let cfg = SimConfig { dt: a.dt, t: a.t, samples: a.samples, seed: a.seed, sigma: a.sigma };
    let samples = if a.projection {
        simulate_projection(&xi, &drift, &cfg)?
    } else {
        simulate_particles(&xi, &drift, &cfg)?
    };
    let mut files = Vec::new();
    if let Some(path) = &a.samples_out {
        std::fs::write(path, samples.to_csv())?;
        files.push(path.clone());
    }
    let est = empirical_covariance(&samples)?;

    // covariance oracles exist for the scalar linear model
    let s2 = a.sigma * a.sigma;
    let (oracle, em) = match (kind, a.d, a.projection) {
        (DriftKind::Linear, 1, false) => {
            let exact = sigma_t(&xi, a.t, 1e-15)?.sigma_t * s2;
            (Some(exact), Some(em_linear_covariance(&xi, &cfg)?))
        }
        (DriftKind::Linear, 1, true) => {
            let zero = InteractionMatrix::zeros(n);
            let exact = sigma_t(&zero, a.t, 1e-15)?.sigma_t * s2;
            (Some(exact), Some(em_linear_covariance(&zero, &cfg)?))
        }
        _ => (None, None),
    };
    let w = samples.width();
    let mut entries = Vec::new();
    for i in 0..w {
        for j in i..w {
            let o = oracle.as_ref().map(|m| m[(i, j)]);
            let se = est.stderr[(i, j)];
            entries.push(Entry {
                i,
                j,
                empirical: est.cov[(i, j)],
                stderr: se,
                oracle: o,
                em_oracle: em.as_ref().map(|m| m[(i, j)]),
                z: o.map(|o| if se > 0.0 { (est.cov[(i, j)] - o) / se } else { 0.0 }),
            });
        }
    }
    let ok = !a.check || entries.iter().all(|e| e.z.is_none_or(|z| z.abs() <= CHECK_Z));
    if a.check && oracle.is_none() {
        return usage("--check needs the scalar linear drift");
    }

    let mut out = match format.unwrap_or(Format::Csv) {
        Format::Json => Output::json(&Report {
            drift: kind,
            projection: a.projection,
            n,
            d: a.d,
            config: cfg,
            mean: est.mean.clone(),
            entries,
        }),
        Format::Csv => {
            let mut t = Table::new("i,j,empirical,stderr,oracle,em_oracle,z");
            for e in &entries {
                t.row(&[
                    e.i.to_string(),
                    e.j.to_string(),
                    num(e.empirical),
                    num(e.stderr),
                    opt(e.oracle),
                    opt(e.em_oracle),
                    opt(e.z),
                ]);
            }
            let plot = Plot::new(t.header(), "oracle", &["empirical", "em_oracle"], "points");
            Output::new(t.render(), Format::Csv).with_plot(plot)
        }
    };
    out.files = files;
    out.ok = ok;
    Ok(out)
}
