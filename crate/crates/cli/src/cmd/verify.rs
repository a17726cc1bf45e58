use crate::output::{num, Format, Output, Plot, Table};
use crate::CliError;
use chaoscope_core::verify::{run_suite, Suite};
use clap::Args;
use serde::Serialize;

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// generator, expectations, gaussian, bounds or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

pub fn run(a: &VerifyArgs, format: Option<Format>) -> Result<Output, CliError> {
    let suite: Suite = a.suite.parse().map_err(|e: chaoscope_core::Error| CliError::Usage(e.to_string()))?;
    let report = run_suite(suite, a.instances, a.seed)?;
    let mut out = match format.unwrap_or(Format::Json) {
        Format::Json => Output::new(report.to_json() + "\n", Format::Json),
        Format::Csv => {
            let mut t = Table::new("suite,name,instance,n,evaluated,lhs,rhs,slack,tolerance,worst,pass");
            for c in &report.entries {
                t.row(&[
                    c.suite.clone(),
                    format!("\"{}\"", c.name),
                    c.instance.to_string(),
                    c.n.to_string(),
                    c.evaluated.to_string(),
                    num(c.lhs),
                    num(c.rhs),
                    num(c.slack),
                    num(c.tolerance),
                    c.worst.as_ref().map(|w| format!("\"{w}\"")).unwrap_or_default(),
                    c.pass.to_string(),
                ]);
            }
            let plot = Plot::new(t.header(), "instance", &["slack"], "points");
            Output::new(t.render(), Format::Csv).with_plot(plot)
        }
    };
    out.ok = report.passed();
    if !out.ok {
        eprintln!("chaoscope: {} of {} checks failed", report.failures, report.checks);
    }
    Ok(out)
}
