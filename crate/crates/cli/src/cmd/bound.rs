use super::matrix::parse_vec;
use crate::output::{Format, Output, Plot};
use crate::source::{read_file, subset, ConstantsArgs, MatrixSource};
use crate::{usage, CliError};
use chaoscope_core::bounds::{
    batch_csv, h3_bound, percolation_entropy_bound, run_request, BoundRequest, FkOptions,
};
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    /// max, avg, weighted, sharper, setwise, or fk (percolation bound for --v).
    #[arg(long)]
    pub theorem: Option<String>,
    /// Subset size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Subset, e.g. `0,1,4` (setwise and fk).
    #[arg(long)]
    pub v: Option<String>,
    /// Weight vector of the weighted average, comma-separated.
    #[arg(long)]
    pub pi: Option<String>,
    /// Reversed-entropy variant.
    #[arg(long)]
    pub reversed: bool,
    /// Compare against a known value of the entropy.
    #[arg(long)]
    pub oracle: Option<f64>,
    /// fk: discounted uniform-in-time form (needs --eta).
    #[arg(long)]
    pub uniform: bool,
    /// fk: use Chat with this h3; `auto` takes the explicit three-particle bound.
    #[arg(long)]
    pub h3: Option<String>,
    /// JSON list of requests `{theorem, k, v, pi, reversed}`.
    #[arg(long)]
    pub batch: Option<PathBuf>,
    #[command(flatten)]
    pub constants: ConstantsArgs,
}

#[derive(Serialize)]
struct FkReport {
    theorem: &'static str,
    v: String,
    value: f64,
    uniform: bool,
    h3: Option<f64>,
    constants: chaoscope_core::bounds::ModelConstants,
    oracle: Option<f64>,
    dominated: Option<bool>,
}

pub fn run(a: &BoundArgs, format: Option<Format>) -> Result<Output, CliError> {
    let xi = a.source.load()?;
    let c = a.constants.constants()?;

    if let Some(path) = &a.batch {
        let reqs: Vec<BoundRequest> = serde_json::from_str(&read_file(path)?)
            .map_err(|e| CliError::Usage(format!("{}: line {}: {e}", path.display(), e.line())))?;
        return match format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let text = batch_csv(&xi, &reqs, &c)?;
                let header = text.lines().next().unwrap_or_default().to_string();
                Ok(Output::new(text, Format::Csv).with_plot(Plot::new(&header, "k", &["structural", "core"], "points")))
            }
            Format::Json => {
                let reps = reqs.iter().map(|r| run_request(&xi, r, &c)).collect::<Result<Vec<_>, _>>()?;
                Ok(Output::json(&reps))
            }
        };
    }

    let Some(theorem) = a.theorem.as_deref() else {
        return usage("give --theorem or --batch");
    };
    if format == Some(Format::Csv) {
        return usage("single bound reports are JSON; use --batch for CSV");
    }
    if theorem == "fk" {
        let Some(text) = &a.v else { return usage("fk needs --v") };
        let v = subset(xi.n(), text)?;
        let h3 = match a.h3.as_deref() {
            None => None,
            Some("auto") => Some(h3_bound(&c, xi.delta(), a.uniform)?),
            Some(s) => Some(s.parse::<f64>().map_err(|_| CliError::Usage(format!("bad h3 `{s}`")))?),
        };
        let opts = FkOptions { h0: None, h3, uniform: a.uniform };
        let value = percolation_entropy_bound(&xi, &v, &c, &opts)?;
        return Ok(Output::json(&FkReport {
            theorem: "fk",
            v: v.to_string(),
            value,
            uniform: a.uniform,
            h3,
            constants: c,
            oracle: a.oracle,
            dominated: a.oracle.map(|o| value >= o),
        }));
    }
    let req = BoundRequest {
        theorem: theorem.to_string(),
        k: a.k,
        v: match &a.v {
            Some(text) => Some(subset(xi.n(), text)?.iter().collect()),
            None => None,
        },
        pi: a.pi.as_deref().map(parse_vec).transpose()?,
        reversed: a.reversed,
    };
    let mut rep = run_request(&xi, &req, &c)?;
    if let Some(o) = a.oracle {
        rep = rep.with_oracle(o);
    }
    Ok(Output::json(&rep))
}
