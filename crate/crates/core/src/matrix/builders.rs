use super::{Graph, InteractionMatrix};
use crate::error::{Error, Result};
use crate::rng::aux_stream;
use rand::Rng;

/// `xi_ij = 1/(n-1)` off the diagonal.
pub fn build_mean_field(n: usize) -> Result<InteractionMatrix> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("mean-field needs n >= 2, got {n}")));
    }
    let w = 1.0 / (n - 1) as f64;
    InteractionMatrix::from_triplets(
        n,
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j, w))),
    )
}

/// `xi_ij = 1/deg(i)` on edges; isolated vertices get a zero row.
pub fn build_random_walk(g: &Graph) -> InteractionMatrix {
    let trip = (0..g.n()).flat_map(|i| {
        let w = 1.0 / g.degrees()[i] as f64;
        g.neighbors(i).iter().map(move |&j| (i, j, w))
    });
    InteractionMatrix::from_triplets(g.n(), trip).expect("graph edges are in range")
}

/// `xi = scale * A` with `A` the adjacency matrix.
pub fn build_scaled_adjacency(g: &Graph, scale: f64) -> Result<InteractionMatrix> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    let trip = g.edges().iter().flat_map(|&(a, b)| [(a, b, scale), (b, a, scale)]);
    InteractionMatrix::from_triplets(g.n(), trip)
}

/// Erdős–Rényi `G(n, p)` by geometric skipping over the unordered pairs.
pub fn sample_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 0.0 || n < 2 {
        return Ok(Graph::empty(n));
    }
    if p == 1.0 {
        return Ok(Graph::complete(n));
    }
    let mut rng = aux_stream(seed, 2);
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::new();
    // Pairs (a, b) with a > b, walked row by row.
    let (mut a, mut b): (usize, i64) = (1, -1);
    while a < n {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        b += 1 + if skip.is_finite() { skip.min(1e15) as i64 } else { i64::MAX / 4 };
        while a < n && b >= a as i64 {
            b -= a as i64;
            a += 1;
        }
        if a < n {
            edges.push((b as usize, a));
        }
    }
    Graph::new(n, &edges)
}

/// `xi_ij = alpha_i beta_j` for `i != j`.
pub fn build_rank_one(alpha: &[f64], beta: &[f64]) -> Result<InteractionMatrix> {
    if alpha.len() != beta.len() {
        return Err(Error::LengthMismatch { expected: alpha.len(), got: beta.len() });
    }
    if alpha.iter().chain(beta).any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidParameter("rank-one factors must be nonnegative".into()));
    }
    let n = alpha.len();
    InteractionMatrix::from_triplets(
        n,
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j, alpha[i] * beta[j]))),
    )
}

/// Lower-triangular averaging over predecessors: `xi_ij = 1/i` for `j < i`
/// (0-based row `i`).
pub fn build_sequential(n: usize) -> Result<InteractionMatrix> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("sequential needs n >= 2, got {n}")));
    }
    InteractionMatrix::from_triplets(
        n,
        (1..n).flat_map(|i| (0..i).map(move |j| (i, j, 1.0 / i as f64))),
    )
}
