use crate::output::{num, Format, Output, Plot, Table};
use crate::source::{read_file, subset};
use crate::{usage, CliError};
use chaoscope_core::matrix::io::{edge_list, parse_edge_list, read_matrix, to_csv, to_json};
use chaoscope_core::matrix::{
    build_mean_field, build_random_walk, build_rank_one, build_scaled_adjacency, build_sequential,
    col_square_sums_squared, p_xi, q_xi, row_square_sums_squared, sample_erdos_renyi, sum_cubes,
    sum_squares, validate, Graph, ValidityReport,
};
use chaoscope_core::InteractionMatrix;
use clap::Args;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args, Debug, Serialize)]
pub struct MatrixArgs {
    /// Mean-field matrix on N particles.
    #[arg(long, value_name = "N")]
    pub mean_field: Option<usize>,
    /// Random walk on the graph in this edge-list file.
    #[arg(long, value_name = "GRAPH")]
    pub random_walk: Option<PathBuf>,
    /// Erdős–Rényi graph G(N, P), seeded by --seed.
    #[arg(long, num_args = 2, value_names = ["N", "P"])]
    pub er: Option<Vec<f64>>,
    /// Uniform random M-regular graph on N vertices, seeded by --seed.
    #[arg(long, num_args = 2, value_names = ["N", "M"])]
    pub regular: Option<Vec<usize>>,
    /// Random walk on the N-cycle.
    #[arg(long, value_name = "N")]
    pub cycle: Option<usize>,
    /// Sequential matrix 1_{j<i}/(i-1).
    #[arg(long, value_name = "N")]
    pub sequential: Option<usize>,
    /// Rank-one matrix alpha_i beta_j; comma-separated vectors.
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"])]
    pub rank_one: Option<Vec<String>>,
    /// Existing matrix file (JSON or CSV).
    #[arg(long)]
    pub load: Option<PathBuf>,
    /// For graph sources: use scale * adjacency instead of the random walk.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also evaluate q_xi(v), e.g. `--v 0,1`.
    #[arg(long)]
    pub v: Option<String>,
    /// Check column sums as well.
    #[arg(long)]
    pub columns: bool,
    /// Write the matrix here (`.csv` gives dense CSV, anything else JSON).
    #[arg(long)]
    pub write: Option<PathBuf>,
    /// Write the graph as an edge list.
    #[arg(long)]
    pub write_graph: Option<PathBuf>,
}

#[derive(Serialize)]
struct Vertex {
    vertex: usize,
    degree: Option<usize>,
    delta_i: f64,
    row_sum: f64,
    col_sum: f64,
}

#[derive(Serialize)]
struct GraphSummary {
    n: usize,
    edges: usize,
    min_degree: usize,
    max_degree: usize,
    regular_degree: Option<usize>,
}

#[derive(Serialize)]
struct QValue {
    v: String,
    q_xi: f64,
}

#[derive(Serialize)]
struct MatrixReport {
    source: String,
    n: usize,
    nnz: usize,
    symmetric: bool,
    delta: f64,
    delta_i_min: f64,
    delta_i_max: f64,
    validity: ValidityReport,
    sum_squares: f64,
    sum_cubes: f64,
    row_square_sums_squared: f64,
    col_square_sums_squared: f64,
    p_xi: f64,
    q: Option<QValue>,
    graph: Option<GraphSummary>,
    vertices: Vec<Vertex>,
}

fn graph_matrix(g: &Graph, scale: Option<f64>) -> Result<InteractionMatrix, CliError> {
    Ok(match scale {
        Some(s) => build_scaled_adjacency(g, s)?,
        None => build_random_walk(g),
    })
}

fn build(a: &MatrixArgs) -> Result<(String, InteractionMatrix, Option<Graph>), CliError> {
    let given = [
        a.mean_field.is_some(),
        a.random_walk.is_some(),
        a.er.is_some(),
        a.regular.is_some(),
        a.cycle.is_some(),
        a.sequential.is_some(),
        a.rank_one.is_some(),
        a.load.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if given != 1 {
        return usage("give exactly one matrix source");
    }
    if let Some(n) = a.mean_field {
        return Ok((format!("mean-field {n}"), build_mean_field(n)?, None));
    }
    if let Some(path) = &a.random_walk {
        let g = parse_edge_list(&read_file(path)?, None)?;
        return Ok((format!("graph {}", path.display()), graph_matrix(&g, a.scale)?, Some(g)));
    }
    if let Some(er) = &a.er {
        let (n, p) = (er[0], er[1]);
        if n < 1.0 || n.fract() != 0.0 {
            return usage(format!("--er needs an integer vertex count, got {n}"));
        }
        let g = sample_erdos_renyi(n as usize, p, a.seed)?;
        return Ok((format!("erdos-renyi {n} {p} seed {}", a.seed), graph_matrix(&g, a.scale)?, Some(g)));
    }
    if let Some(r) = &a.regular {
        let g = Graph::random_regular(r[0], r[1], a.seed)?;
        return Ok((format!("regular {} {} seed {}", r[0], r[1], a.seed), graph_matrix(&g, a.scale)?, Some(g)));
    }
    if let Some(n) = a.cycle {
        let g = Graph::cycle(n)?;
        return Ok((format!("cycle {n}"), graph_matrix(&g, a.scale)?, Some(g)));
    }
    if let Some(n) = a.sequential {
        return Ok((format!("sequential {n}"), build_sequential(n)?, None));
    }
    if let Some(ab) = &a.rank_one {
        let alpha = parse_vec(&ab[0])?;
        let beta = parse_vec(&ab[1])?;
        return Ok(("rank-one".into(), build_rank_one(&alpha, &beta)?, None));
    }
    let path = a.load.as_ref().expect("one source is set");
    Ok((format!("file {}", path.display()), read_matrix(&read_file(path)?)?, None))
}

pub fn parse_vec(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Usage(format!("bad number `{t}`"))))
        .collect()
}

pub fn run(a: &MatrixArgs, format: Option<Format>) -> Result<Output, CliError> {
    let (source, xi, graph) = build(a)?;
    let n = xi.n();
    let q = match &a.v {
        Some(text) => {
            let v = subset(n, text)?;
            Some(QValue { v: v.to_string(), q_xi: q_xi(&xi, &v)? })
        }
        None => None,
    };
    let mut files = Vec::new();
    if let Some(path) = &a.write {
        let body = if path.extension().is_some_and(|e| e == "csv") { to_csv(&xi) } else { to_json(&xi) };
        std::fs::write(path, body)?;
        files.push(path.clone());
    }
    if let Some(path) = &a.write_graph {
        match &graph {
            Some(g) => std::fs::write(path, edge_list(g))?,
            None => return usage("--write-graph needs a graph source"),
        }
        files.push(path.clone());
    }

    let vertices: Vec<Vertex> = (0..n)
        .map(|i| Vertex {
            vertex: i,
            degree: graph.as_ref().map(|g| g.degrees()[i]),
            delta_i: xi.delta_i()[i],
            row_sum: xi.row_sums()[i],
            col_sum: xi.col_sums()[i],
        })
        .collect();
    let fmt = format.unwrap_or(Format::Json);
    let mut out = match fmt {
        Format::Json => {
            let report = MatrixReport {
                source,
                n,
                nnz: xi.nnz(),
                symmetric: xi.is_symmetric(),
                delta: xi.delta(),
                delta_i_min: xi.delta_i().iter().copied().fold(f64::INFINITY, f64::min),
                delta_i_max: xi.delta_i().iter().copied().fold(0.0, f64::max),
                validity: validate(&xi, a.columns),
                sum_squares: sum_squares(&xi),
                sum_cubes: sum_cubes(&xi),
                row_square_sums_squared: row_square_sums_squared(&xi),
                col_square_sums_squared: col_square_sums_squared(&xi),
                p_xi: p_xi(&xi),
                q,
                graph: graph.as_ref().map(|g| GraphSummary {
                    n: g.n(),
                    edges: g.edge_count(),
                    min_degree: g.degrees().iter().copied().min().unwrap_or(0),
                    max_degree: g.degrees().iter().copied().max().unwrap_or(0),
                    regular_degree: g.regular_degree(),
                }),
                vertices,
            };
            Output::json(&report)
        }
        Format::Csv => {
            let mut t = Table::new("vertex,degree,delta_i,row_sum,col_sum");
            for v in &vertices {
                t.row(&[
                    v.vertex.to_string(),
                    v.degree.map(|d| d.to_string()).unwrap_or_default(),
                    num(v.delta_i),
                    num(v.row_sum),
                    num(v.col_sum),
                ]);
            }
            let plot = Plot::new(t.header(), "vertex", &["delta_i", "row_sum", "col_sum"], "points");
            if let Some(q) = q {
                // scalar, kept out of the vertex table
                eprintln!("q_xi({}) = {}", q.v, q.q_xi);
            }
            Output::new(t.render(), Format::Csv).with_plot(plot)
        }
    };
    out.files = files;
    Ok(out)
}
