use super::matrix::parse_vec;
use crate::output::{num, opt, subset_cell, Format, Output, Plot, Table};
use crate::source::{subset, ConstantsArgs, MatrixSource};
use crate::CliError;
use chaoscope_core::percolation::{
    mc_expectation, payload_matrix, BoundFamily, ExactEngine, ExpectationBound, Functional,
    FunctionalContext, McEngine, Payload, PercolationModel,
};
use clap::{Args, ValueEnum};
use serde::Serialize;

/// Truncation tolerance of the exact engine, relative to `sup |F|`.
const EXACT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Mc,
    Fpp,
}

#[derive(Args, Debug, Serialize)]
pub struct PercolateArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// Rate scale kappa.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    pub engine: Engine,
    /// card:p, linear[:p], quadratic[:p], C or Chat.
    #[arg(long, default_value = "card:1")]
    pub functional: String,
    /// Initial set, e.g. `0,2`.
    #[arg(long)]
    pub v: String,
    /// Times, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Payload x of the linear functionals (default all ones).
    #[arg(long)]
    pub x: Option<String>,
    /// Payload G of the quadratic functionals, row-major (default xi squared entrywise).
    #[arg(long)]
    pub g: Option<String>,
    /// h3 of the Chat functional.
    #[arg(long, default_value_t = 0.0)]
    pub h3: f64,
    /// Also evaluate this expectation-bound family (ia..iiib); the functional
    /// is then the one the family bounds.
    #[arg(long)]
    pub bound: Option<String>,
    #[command(flatten)]
    pub constants: ConstantsArgs,
}

#[derive(Serialize)]
struct Row {
    engine: Engine,
    functional: String,
    v: String,
    t: f64,
    value: f64,
    stderr: Option<f64>,
    reps: Option<usize>,
    seed: Option<u64>,
    bound: Option<f64>,
}

pub fn run(a: &PercolateArgs, format: Option<Format>) -> Result<Output, CliError> {
    let xi = a.source.load()?;
    let n = xi.n();
    let model = PercolationModel::new(xi.clone(), a.kappa)?;
    let v = subset(n, &a.v)?;
    let ctx = FunctionalContext {
        x: a.x.as_deref().map(parse_vec).transpose()?,
        g: a.g.as_deref().map(parse_vec).transpose()?,
        constants: Some(a.constants.constants()?),
        h3: a.h3,
    };
    let family = a.bound.as_deref().map(str::parse::<BoundFamily>).transpose()?;
    let payload = match family {
        Some(BoundFamily::IIa | BoundFamily::IIb | BoundFamily::IIc) => {
            Payload::Vector(ctx.x.clone().unwrap_or_else(|| vec![1.0; n]))
        }
        Some(BoundFamily::IIIa | BoundFamily::IIIb) => {
            payload_matrix(n, &ctx.g.clone().unwrap_or_else(|| xi.entrywise_square().to_dense()))
        }
        _ => Payload::None,
    };
    let functional = match family {
        Some(f) => f.target(&payload, n)?,
        None => Functional::parse(&a.functional, &xi, &ctx)?,
    };

    let mut rows = Vec::with_capacity(a.t.len());
    let exact = match a.engine {
        Engine::Exact => Some((ExactEngine::new(&model)?, functional.table(&xi)?)),
        _ => None,
    };
    for &t in &a.t {
        let bound = match family {
            Some(f) => Some(ExpectationBound::new(&model, f, t, &payload)?.evaluate(&v)),
            None => None,
        };
        let row = match (&exact, a.engine) {
            (Some((engine, table)), _) => Row {
                engine: a.engine,
                functional: functional.name(),
                v: v.to_string(),
                t,
                value: engine.expectation(table, &v, t, EXACT_TOL)?,
                stderr: None,
                reps: None,
                seed: None,
                bound,
            },
            (None, e) => {
                let mc = if e == Engine::Fpp { McEngine::Fpp } else { McEngine::Gillespie };
                let est = mc_expectation(&model, &functional, &v, t, a.reps, a.seed, mc)?;
                Row {
                    engine: a.engine,
                    functional: est.functional,
                    v: v.to_string(),
                    t,
                    value: est.mean,
                    stderr: Some(est.stderr),
                    reps: Some(est.reps),
                    seed: Some(est.seed),
                    bound,
                }
            }
        };
        rows.push(row);
    }

    match format.unwrap_or(Format::Csv) {
        Format::Json => Ok(Output::json(&rows)),
        Format::Csv => {
            let mut t = Table::new("engine,functional,v,t,value,stderr,reps,seed,bound");
            for r in &rows {
                t.row(&[
                    format!("{:?}", r.engine).to_lowercase(),
                    r.functional.clone(),
                    subset_cell(&v),
                    num(r.t),
                    num(r.value),
                    opt(r.stderr),
                    r.reps.map(|x| x.to_string()).unwrap_or_default(),
                    r.seed.map(|x| x.to_string()).unwrap_or_default(),
                    opt(r.bound),
                ]);
            }
            let ys: &[&str] = if family.is_some() { &["value", "bound"] } else { &["value"] };
            let plot = Plot::new(t.header(), "t", ys, "linespoints");
            Ok(Output::new(t.render(), Format::Csv).with_plot(plot))
        }
    }
}
