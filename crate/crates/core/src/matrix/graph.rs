use crate::error::{Error, Result};
use crate::rng::aux_stream;
use rand::Rng;
use std::collections::HashSet;

/// Simple undirected graph on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Edges are normalized to `(min, max)` and sorted. Self-loops,
    /// duplicates and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {a}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        Ok(Self::from_normalized(n, norm))
    }

    fn from_normalized(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let degrees = adjacency.iter().map(Vec::len).collect();
        Graph { n, edges, degrees, adjacency }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_normalized(n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::from_normalized(n, edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSize(format!("cycle needs n >= 3, got {n}")));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_normalized(n, edges)
    }

    /// Star `K_{1,leaves}` with center `0`.
    pub fn star(leaves: usize) -> Self {
        let edges = (1..=leaves).map(|i| (0, i)).collect();
        Self::from_normalized(leaves + 1, edges)
    }

    /// Random `m`-regular graph: a circulant starting point randomized by
    /// degree-preserving double-edge swaps.
    pub fn random_regular(n: usize, m: usize, seed: u64) -> Result<Self> {
        if m >= n || (n * m) % 2 == 1 {
            return Err(Error::InvalidSize(format!("no simple {m}-regular graph on {n} vertices")));
        }
        let mut set: HashSet<(usize, usize)> = HashSet::new();
        for i in 0..n {
            for off in 1..=m / 2 {
                let j = (i + off) % n;
                set.insert((i.min(j), i.max(j)));
            }
            if m % 2 == 1 {
                let j = (i + n / 2) % n;
                set.insert((i.min(j), i.max(j)));
            }
        }
        let mut edges: Vec<(usize, usize)> = set.iter().copied().collect();
        edges.sort_unstable();
        let mut rng = aux_stream(seed, 1);
        let attempts = 10 * edges.len();
        for _ in 0..attempts {
            if edges.len() < 2 {
                break;
            }
            let p = rng.random_range(0..edges.len());
            let q = rng.random_range(0..edges.len());
            if p == q {
                continue;
            }
            let (a, b) = edges[p];
            let (c, d) = if rng.random::<bool>() { edges[q] } else { (edges[q].1, edges[q].0) };
            if a == d || c == b || a == c || b == d {
                continue;
            }
            let e1 = (a.min(d), a.max(d));
            let e2 = (c.min(b), c.max(b));
            if set.contains(&e1) || set.contains(&e2) {
                continue;
            }
            set.remove(&edges[p]);
            set.remove(&edges[q]);
            set.insert(e1);
            set.insert(e2);
            edges[p] = e1;
            edges[q] = e2;
        }
        edges.sort_unstable();
        Ok(Self::from_normalized(n, edges))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = *self.degrees.first()?;
        self.degrees.iter().all(|&x| x == d).then_some(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(Graph::new(3, &[(1, 1)]).is_err());
        assert!(Graph::new(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn degrees_follow_edges() {
        let g = Graph::star(3);
        assert_eq!(g.degrees(), &[3, 1, 1, 1]);
        assert_eq!(Graph::cycle(5).unwrap().regular_degree(), Some(2));
        assert_eq!(Graph::complete(4).edge_count(), 6);
    }

    #[test]
    fn random_regular_is_regular_and_simple() {
        for &(n, m) in &[(10, 3), (50, 4), (21, 8), (200, 2)] {
            let g = Graph::random_regular(n, m, 11).unwrap();
            assert_eq!(g.regular_degree(), Some(m));
            assert!(Graph::new(n, g.edges()).is_ok());
        }
        assert!(Graph::random_regular(5, 3, 0).is_err());
    }
}
