use crate::output::{num, opt, subset_cell, Format, Output, Plot, Table};
use crate::source::{subset, MatrixSource};
use crate::{usage, CliError};
use chaoscope_core::gaussian::{
    avg_entropy, avg_sandwich, clique_lower_bound, entropy_bounds, max_upper_bound, sigma_t, AvgMode,
    GaussianModel,
};
use chaoscope_core::rng::stream;
use chaoscope_core::verify::{random_instance, random_stochastic};
use chaoscope_core::{InteractionMatrix, SubsetState};
use clap::Args;
use serde::Serialize;

/// Largest n for the all-subsets table.
const TABLE_LIMIT: usize = 16;

#[derive(Args, Debug, Serialize)]
pub struct GaussianArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// Random xi on n particles (row and column sums at most 1) instead of a source.
    #[arg(long)]
    pub n: Option<usize>,
    /// With --n: unit row sums.
    #[arg(long)]
    pub stochastic: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time T.
    #[arg(long = "T")]
    pub t: f64,
    /// Subset sizes for the average entropy, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub avg_k: Vec<usize>,
    /// Estimate averages from this many sampled subsets instead of enumerating.
    #[arg(long)]
    pub sample_reps: Option<usize>,
    /// Single subset, e.g. `0,3`.
    #[arg(long)]
    pub v: Option<String>,
    /// Truncation tolerance of the covariance series.
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
}

#[derive(Serialize)]
struct AvgRow {
    k: usize,
    exact: f64,
    stderr: Option<f64>,
    lower: f64,
    upper: f64,
    trace_lower: f64,
    trace_upper: f64,
    d_t: f64,
    w1: f64,
    w2: f64,
}

#[derive(Serialize)]
struct SubsetRow {
    v: SubsetState,
    exact: f64,
    lower: f64,
    upper: f64,
    clique: f64,
    max: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    n: usize,
    #[serde(rename = "T")]
    t: f64,
    rho: f64,
    in_window: bool,
    series_order: usize,
    tail_bound: f64,
    averages: Vec<AvgRow>,
    subsets: Vec<SubsetRow>,
}

fn matrix(a: &GaussianArgs) -> Result<InteractionMatrix, CliError> {
    match (a.n, a.source.is_empty()) {
        (Some(n), true) => {
            if n < 2 {
                return usage("--n must be at least 2");
            }
            let mut rng = stream(a.seed, 0);
            Ok(if a.stochastic { random_stochastic(n, &mut rng) } else { random_instance(n, &mut rng) })
        }
        (None, false) => a.source.load(),
        _ => usage("give either --n or one matrix source"),
    }
}

fn subset_row(model: &GaussianModel, v: SubsetState, rows_ok: bool) -> Result<SubsetRow, CliError> {
    let p = entropy_bounds(model, &v)?;
    Ok(SubsetRow {
        exact: p.exact,
        lower: p.lower,
        upper: p.upper,
        clique: clique_lower_bound(model, &v),
        max: rows_ok.then(|| max_upper_bound(model, &v)),
        v,
    })
}

pub fn run(a: &GaussianArgs, format: Option<Format>) -> Result<Output, CliError> {
    let xi = matrix(a)?;
    let n = xi.n();
    let model = sigma_t(&xi, a.t, a.tol)?;
    let rows_ok = xi.max_row_sum() <= 1.0 + 1e-12;

    let mut averages = Vec::new();
    for &k in &a.avg_k {
        let mode = match a.sample_reps {
            Some(reps) => AvgMode::Sample { reps, seed: a.seed },
            None => AvgMode::Enumerate,
        };
        let avg = avg_entropy(&model, k, mode)?;
        let s = avg_sandwich(&model, k)?;
        averages.push(AvgRow {
            k,
            exact: avg.value,
            stderr: avg.stderr,
            lower: s.lower,
            upper: s.upper,
            trace_lower: s.trace_lower,
            trace_upper: s.trace_upper,
            d_t: s.d_t,
            w1: s.w1,
            w2: s.w2,
        });
    }
    let mut subsets = Vec::new();
    if let Some(text) = &a.v {
        subsets.push(subset_row(&model, subset(n, text)?, rows_ok)?);
    } else if a.avg_k.is_empty() {
        if n > TABLE_LIMIT {
            return usage(format!("all-subsets table needs n <= {TABLE_LIMIT}; give --v or --avg-k"));
        }
        for mask in 1..(1u64 << n) {
            subsets.push(subset_row(&model, SubsetState::from_mask(n, mask), rows_ok)?);
        }
    }

    let report = Report {
        n,
        t: a.t,
        rho: model.rho,
        in_window: model.in_small_time_window(),
        series_order: model.series_order,
        tail_bound: model.tail_bound,
        averages,
        subsets,
    };
    match format.unwrap_or(Format::Csv) {
        Format::Json => Ok(Output::json(&report)),
        Format::Csv => {
            let mut parts = Vec::new();
            let mut plot = None;
            if !report.averages.is_empty() {
                let mut t = Table::new("k,T,rho,in_window,exact,stderr,lower,upper,trace_lower,trace_upper,d_t");
                for r in &report.averages {
                    t.row(&[
                        r.k.to_string(),
                        num(report.t),
                        num(report.rho),
                        report.in_window.to_string(),
                        num(r.exact),
                        opt(r.stderr),
                        num(r.lower),
                        num(r.upper),
                        num(r.trace_lower),
                        num(r.trace_upper),
                        num(r.d_t),
                    ]);
                }
                plot = Some(Plot::new(t.header(), "k", &["exact", "lower", "upper"], "linespoints"));
                parts.push(t.render());
            }
            if !report.subsets.is_empty() {
                let mut t = Table::new("v,size,exact,lower,upper,clique,max,in_window");
                for r in &report.subsets {
                    t.row(&[
                        subset_cell(&r.v),
                        r.v.len().to_string(),
                        num(r.exact),
                        num(r.lower),
                        num(r.upper),
                        num(r.clique),
                        opt(r.max),
                        report.in_window.to_string(),
                    ]);
                }
                plot.get_or_insert_with(|| Plot::new(t.header(), "size", &["exact", "lower", "upper"], "points"));
                parts.push(t.render());
            }
            let out = Output::new(parts.join("\n"), Format::Csv);
            Ok(match plot {
                Some(p) => out.with_plot(p),
                None => out,
            })
        }
    }
}
