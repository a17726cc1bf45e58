use clap::ValueEnum;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// What a subcommand produced.
pub struct Output {
    pub text: String,
    pub format: Format,
    /// Side files already written (matrix, graph, samples).
    pub files: Vec<PathBuf>,
    pub plot: Option<Plot>,
    /// False when a check failed; the process then exits 1.
    pub ok: bool,
}

impl Output {
    pub fn new(text: String, format: Format) -> Self {
        Output { text, format, files: Vec::new(), plot: None, ok: true }
    }

    pub fn json<T: Serialize>(value: &T) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("serialization cannot fail");
        text.push('\n');
        Output::new(text, Format::Json)
    }

    pub fn with_plot(mut self, plot: Plot) -> Self {
        if self.format == Format::Csv {
            self.plot = Some(plot);
        }
        self
    }
}

/// Column-name description of a plot over the CSV's own header.
pub struct Plot {
    pub header: Vec<String>,
    pub x: String,
    pub ys: Vec<String>,
    pub style: &'static str,
}

impl Plot {
    pub fn new(header: &str, x: &str, ys: &[&str], style: &'static str) -> Self {
        Plot {
            header: header.split(',').map(str::to_string).collect(),
            x: x.to_string(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
            style,
        }
    }

    fn column(&self, name: &str) -> String {
        // "0" is gnuplot's row counter
        match self.header.iter().position(|h| h == name) {
            Some(i) => (i + 1).to_string(),
            None => "0".to_string(),
        }
    }

    pub fn script(&self, csv: &Path) -> String {
        let file = csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let x = self.column(&self.x);
        let parts: Vec<String> = self
            .ys
            .iter()
            .map(|y| format!("'{file}' using {x}:{} with {} title '{y}'", self.column(y), self.style))
            .collect();
        format!(
            "set datafile separator ','\nset key outside\nset xlabel '{}'\nplot {}\npause -1\n",
            self.x,
            parts.join(", \\\n     ")
        )
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub threads: Option<usize>,
    pub format: Format,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization cannot fail") + "\n"
    }
}

/// `dir/name.ext` -> `dir/name.ext.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes CSV rows with a fixed header.
pub struct Table {
    header: String,
    rows: Vec<String>,
}

impl Table {
    pub fn new(header: &str) -> Self {
        Table { header: header.to_string(), rows: Vec::new() }
    }

    pub fn header(&self) -> &str {
        &self.header
    }

    pub fn row(&mut self, cells: &[String]) {
        self.rows.push(cells.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = self.header.clone();
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

pub fn num(x: f64) -> String {
    // no "-0" in tables
    if x == 0.0 { "0".to_string() } else { x.to_string() }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Member list quoted for CSV, e.g. `"{0,2}"`.
pub fn subset_cell(v: &chaoscope_core::SubsetState) -> String {
    format!("\"{v}\"")
}
