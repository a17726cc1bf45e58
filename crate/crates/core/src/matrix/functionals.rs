use super::{InteractionMatrix, SubsetState};
use crate::bounds::ModelConstants;
use crate::error::{Error, Result};

/// `sum_ij xi_ij^2`.
pub fn sum_squares(xi: &InteractionMatrix) -> f64 {
    xi.triplets().map(|(_, _, v)| v * v).sum()
}

/// `sum_ij xi_ij^3`.
pub fn sum_cubes(xi: &InteractionMatrix) -> f64 {
    xi.triplets().map(|(_, _, v)| v * v * v).sum()
}

/// `sum_i (sum_j xi_ij^2)^2`.
pub fn row_square_sums_squared(xi: &InteractionMatrix) -> f64 {
    (0..xi.n())
        .map(|i| {
            let s: f64 = xi.row(i).map(|(_, v)| v * v).sum();
            s * s
        })
        .sum()
}

/// `sum_j (sum_i xi_ij^2)^2`.
pub fn col_square_sums_squared(xi: &InteractionMatrix) -> f64 {
    let mut col = vec![0.0; xi.n()];
    for (_, j, v) in xi.triplets() {
        col[j] += v * v;
    }
    col.iter().map(|s| s * s).sum()
}

/// `p_xi = sum_ij xi_ij^2 (xi_ij + xi_ji) + sum_i (sum_j xi_ij^2 + xi_ji^2)^2`.
pub fn p_xi(xi: &InteractionMatrix) -> f64 {
    let n = xi.n();
    let first: f64 = xi.triplets().map(|(i, j, v)| v * v * (v + xi.get(j, i))).sum();
    let mut mixed = vec![0.0; n];
    for (i, j, v) in xi.triplets() {
        mixed[i] += v * v;
        mixed[j] += v * v;
    }
    first + mixed.iter().map(|s| s * s).sum::<f64>()
}

/// Closed form of [`p_xi`] valid for symmetric `xi`:
/// `2 sum xi^3 + 4 sum_i (sum_j xi_ij^2)^2`.
pub fn p_xi_symmetric(xi: &InteractionMatrix) -> f64 {
    2.0 * sum_cubes(xi) + 4.0 * row_square_sums_squared(xi)
}

/// The bracket of `q_xi(v)` without the `(delta |v| + 1)` prefactor:
/// `sum_{i,j in v} xi_ij^2 + delta sum_{i,j in v} (xi^T xi + xi xi^T)_ij + delta^2 |v|`.
///
/// The middle block sum equals `sum_k (sum_{i in v} xi_ki)^2 + (sum_{i in v} xi_ik)^2`,
/// which is accumulated in one pass over the nonzeros.
pub fn q_xi_core(xi: &InteractionMatrix, v: &SubsetState) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptySubset);
    }
    check_ambient(xi, v)?;
    let n = xi.n();
    let delta = xi.delta();
    let mut into_v = vec![0.0; n]; // sum_{i in v} xi_ki, indexed by k
    let mut from_v = vec![0.0; n]; // sum_{i in v} xi_ik, indexed by k
    let mut inner_sq = 0.0;
    for (r, c, val) in xi.triplets() {
        let (rin, cin) = (v.contains(r), v.contains(c));
        if cin {
            into_v[r] += val;
        }
        if rin {
            from_v[c] += val;
        }
        if rin && cin {
            inner_sq += val * val;
        }
    }
    let block: f64 = into_v.iter().chain(&from_v).map(|s| s * s).sum();
    Ok(inner_sq + delta * block + delta * delta * v.len() as f64)
}

/// `q_xi(v) = (delta |v| + 1) * q_xi_core(v)`.
pub fn q_xi(xi: &InteractionMatrix, v: &SubsetState) -> Result<f64> {
    let core = q_xi_core(xi, v)?;
    Ok((xi.delta() * v.len() as f64 + 1.0) * core)
}

fn check_ambient(xi: &InteractionMatrix, v: &SubsetState) -> Result<()> {
    if v.ambient() != xi.n() {
        return Err(Error::LengthMismatch { expected: xi.n(), got: v.ambient() });
    }
    Ok(())
}

/// `(sum_{i in v} (sum_{j in v} xi_ij)^2, sum_{i,j in v} xi_ij^2)`.
pub(crate) fn restricted_sums(xi: &InteractionMatrix, v: &SubsetState) -> (f64, f64) {
    let mut rows = 0.0;
    let mut sq = 0.0;
    for i in v.iter() {
        let mut s = 0.0;
        for (j, val) in xi.row(i) {
            if v.contains(j) {
                s += val;
                sq += val * val;
            }
        }
        rows += s * s;
    }
    (rows, sq)
}

/// `C(v) = M/sigma^2 sum_{i in v} (sum_{j in v} xi_ij)^2`.
pub fn c_of_v(xi: &InteractionMatrix, v: &SubsetState, c: &ModelConstants) -> Result<f64> {
    check_ambient(xi, v)?;
    check_sigma(c)?;
    let (rows, _) = restricted_sums(xi, v);
    Ok(c.m / (c.sigma * c.sigma) * rows)
}

/// `Chat(v) = sqrt(gamma M h3)/sigma^2 sum_{i in v} (sum_{j in v} xi_ij)^2
///           + M/sigma^2 sum_{i,j in v} xi_ij^2`.
pub fn chat_of_v(xi: &InteractionMatrix, v: &SubsetState, c: &ModelConstants, h3: f64) -> Result<f64> {
    check_ambient(xi, v)?;
    check_sigma(c)?;
    if !(h3 >= 0.0) {
        return Err(Error::InvalidParameter(format!("h3 must be nonnegative, got {h3}")));
    }
    let (rows, sq) = restricted_sums(xi, v);
    let s2 = c.sigma * c.sigma;
    Ok((c.gamma * c.m * h3).sqrt() / s2 * rows + c.m / s2 * sq)
}

fn check_sigma(c: &ModelConstants) -> Result<()> {
    if !(c.sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", c.sigma)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_mean_field, build_random_walk, Graph};

    fn consts() -> ModelConstants {
        ModelConstants { gamma: 1.0, m: 2.0, sigma: 1.5, eta: None, c0: 0.0, t: 1.0 }
    }

    #[test]
    fn p_xi_two_by_two_hand_expansion() {
        let (a, b) = (0.3, 0.7);
        let xi = InteractionMatrix::from_rows(&[vec![0.0, a], vec![b, 0.0]]).unwrap();
        let expect = a * a * (a + b) + b * b * (a + b) + 2.0 * (a * a + b * b) * (a * a + b * b);
        assert!((p_xi(&xi) - expect).abs() < 1e-15);
        assert_eq!(p_xi(&InteractionMatrix::zeros(4)), 0.0);
    }

    #[test]
    fn p_xi_regular_graph() {
        let (n, m) = (30, 4);
        let xi = build_random_walk(&Graph::random_regular(n, m, 3).unwrap());
        let expect = 6.0 * n as f64 / (m * m) as f64;
        assert!((p_xi(&xi) - expect).abs() < 1e-12);
        assert!((p_xi_symmetric(&xi) - expect).abs() < 1e-12);
    }

    #[test]
    fn q_xi_cycle_adjacent_pair() {
        let xi = build_random_walk(&Graph::cycle(4).unwrap());
        let v = SubsetState::from_indices(4, &[1, 2]).unwrap();
        assert!((q_xi(&xi, &v).unwrap() - 4.0).abs() < 1e-15);
        assert!((q_xi_core(&xi, &v).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(q_xi(&InteractionMatrix::zeros(4), &v).unwrap(), 0.0);
        assert_eq!(q_xi(&xi, &SubsetState::empty(4)), Err(Error::EmptySubset));
    }

    #[test]
    fn q_xi_block_matches_dense_products() {
        let xi = InteractionMatrix::from_rows(&[
            vec![0.0, 0.2, 0.5, 0.1],
            vec![0.3, 0.0, 0.0, 0.4],
            vec![0.0, 0.6, 0.0, 0.2],
            vec![0.25, 0.0, 0.5, 0.0],
        ])
        .unwrap();
        let v = SubsetState::from_indices(4, &[0, 3]).unwrap();
        let x = xi.to_matrix();
        let prod = x.transpose() * &x + &x * x.transpose();
        let mut block = 0.0;
        let mut sq = 0.0;
        for i in v.iter() {
            for j in v.iter() {
                block += prod[(i, j)];
                sq += x[(i, j)] * x[(i, j)];
            }
        }
        let d = xi.delta();
        let expect = (2.0 * d + 1.0) * (sq + d * block + d * d * 2.0);
        assert!((q_xi(&xi, &v).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn c_of_v_cases() {
        let c = consts();
        let xi = build_mean_field(7).unwrap();
        let single = SubsetState::from_indices(7, &[2]).unwrap();
        assert_eq!(c_of_v(&xi, &single, &c).unwrap(), 0.0);
        let v = SubsetState::from_indices(7, &[0, 3, 5, 6]).unwrap();
        let k = 4.0;
        let expect = c.m / (c.sigma * c.sigma) * k * (k - 1.0) * (k - 1.0) / 36.0;
        assert!((c_of_v(&xi, &v, &c).unwrap() - expect).abs() < 1e-14);
        let chat0 = chat_of_v(&xi, &v, &c, 0.0).unwrap();
        let sq = 12.0 / 36.0;
        assert!((chat0 - c.m / (c.sigma * c.sigma) * sq).abs() < 1e-14);
        let bad = ModelConstants { sigma: 0.0, ..c };
        assert!(c_of_v(&xi, &v, &bad).is_err());
    }
}
