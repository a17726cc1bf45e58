use crate::error::{Error, Result};
use crate::numeric::poisson_weights;

/// Second moment of a Yule process with per-individual birth rate `rate`
/// started from `k` individuals: `|Y_t|` is negative binomial with success
/// probability `p = e^{-rate t}`, so `E[Y_t^2] = k(1-p)/p^2 + k^2/p^2`.
pub fn yule_second_moment(k: usize, rate: f64, t: f64) -> f64 {
    let k = k as f64;
    let p = (-rate * t).exp();
    k * (1.0 - p) / (p * p) + k * k / (p * p)
}

/// Law of `|X_t|` for the mean-field matrix `xi_ij = 1/(n-1)`, started from
/// any set of size `k`. By exchangeability the cardinality is itself a pure
/// birth chain with rate `kappa j (n - j)/(n - 1)` at level `j`.
pub fn mean_field_cardinality_law(n: usize, k: usize, kappa: f64, t: f64) -> Result<Vec<f64>> {
    if n < 2 || k > n {
        return Err(Error::InvalidSize(format!("need 2 <= n and k <= n, got n = {n}, k = {k}")));
    }
    if !(kappa > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter("kappa must be positive and t nonnegative".into()));
    }
    let rate = |j: usize| kappa * (j * (n - j)) as f64 / (n - 1) as f64;
    let lambda = (0..=n).map(rate).fold(0.0, f64::max);
    let mut dist = vec![0.0; n + 1];
    dist[k] = 1.0;
    if t == 0.0 || lambda == 0.0 {
        return Ok(dist);
    }
    let w = poisson_weights(lambda * t, 1e-15);
    let mut out = vec![0.0; n + 1];
    for (step, &wk) in w.iter().enumerate() {
        if step > 0 {
            // One step of the uniformized kernel, highest level first.
            for j in (0..n).rev() {
                let move_p = rate(j) / lambda;
                let flow = dist[j] * move_p;
                dist[j + 1] += flow;
                dist[j] -= flow;
            }
        }
        for (o, d) in out.iter_mut().zip(&dist) {
            *o += wk * d;
        }
    }
    Ok(out)
}

/// `E|X_t|^p` for the mean-field chain.
pub fn mean_field_moment(n: usize, k: usize, kappa: f64, t: f64, p: i32) -> Result<f64> {
    let law = mean_field_cardinality_law(n, k, kappa, t)?;
    Ok(law.iter().enumerate().map(|(j, q)| q * (j as f64).powi(p)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_mean_field, SubsetState};
    use crate::percolation::{ExactEngine, PercolationModel, SubsetFunction};

    #[test]
    fn yule_examples() {
        assert!((yule_second_moment(3, 1.0, 0.0) - 9.0).abs() < 1e-15);
        assert!((yule_second_moment(2, 1.0, 2f64.ln()) - 20.0).abs() < 1e-12);
        for &(k, r, t) in &[(1, 0.5, 3.0), (5, 2.0, 0.1), (7, 1.0, 1.0)] {
            let p = (-r * t as f64).exp();
            assert!(yule_second_moment(k, r, t) <= 2.0 * (k * k) as f64 / (p * p));
        }
    }

    #[test]
    fn lumped_chain_matches_subset_engine() {
        let n = 9;
        let kappa = 0.8;
        let m = PercolationModel::new(build_mean_field(n).unwrap(), kappa).unwrap();
        let e = ExactEngine::new(&m).unwrap();
        let sq = SubsetFunction::cardinality_pow(n, 2).unwrap();
        for k in 1..4 {
            let v = SubsetState::from_indices(n, &(0..k).collect::<Vec<_>>()).unwrap();
            for &t in &[0.3, 1.0, 2.5] {
                let full = e.expectation(&sq, &v, t, 1e-14).unwrap();
                let lumped = mean_field_moment(n, k, kappa, t, 2).unwrap();
                assert!((full - lumped).abs() < 1e-10 * full, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn law_is_a_distribution() {
        let law = mean_field_cardinality_law(20, 3, 1.0, 4.0).unwrap();
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(law[..3].iter().all(|&q| q == 0.0));
    }
}
