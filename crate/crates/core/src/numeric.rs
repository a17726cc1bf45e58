//! Small numerical utilities shared by the engines: quadrature, stable sums,
//! Poisson weights and the entropy kernel `h(x) = x - log(1 + x)`.

/// Pairwise summation. The reduction tree depends only on the slice length,
/// so the result is bit-stable for a given input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error (sample standard deviation over sqrt(len)).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `h(x) = x - ln(1 + x)` for `x > -1`, with a series branch near zero to
/// avoid cancellation.
pub fn entropy_kernel(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // x^2/2 - x^3/3 + x^4/4 - ...
        let mut term = x * x;
        let mut acc = 0.0;
        for k in 2..16 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * term / k as f64;
            term *= x;
        }
        acc
    } else {
        x - x.ln_1p()
    }
}

/// Poisson probabilities `P(N = k)` for `N ~ Poisson(lambda)`, returned as
/// an iterator-friendly vector truncated once the remaining upper tail is
/// provably below `tail_tol`.
pub fn poisson_weights(lambda: f64, tail_tol: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return vec![1.0];
    }
    let mut weights = Vec::new();
    let mut log_w = -lambda;
    let mut k: usize = 0;
    loop {
        let w = log_w.exp();
        weights.push(w);
        // Ratio w_{k+1}/w_k = lambda/(k+1) is decreasing, so once it is below 1
        // the tail beyond k is bounded by a geometric series.
        let r = lambda / (k as f64 + 2.0);
        if (k as f64 + 1.0) > lambda && r < 1.0 {
            let next = w * lambda / (k as f64 + 1.0);
            if next / (1.0 - r) <= tail_tol {
                break;
            }
        }
        k += 1;
        log_w += lambda.ln() - (k as f64).ln();
        if k > 10_000_000 {
            break;
        }
    }
    weights
}

/// Adaptive Simpson quadrature of a scalar function.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let out = adaptive_simpson_vec(|x| vec![f(x)], a, b, rel_tol);
    out[0]
}

/// Adaptive Simpson quadrature of a vector-valued function; the error is
/// controlled in the max norm relative to the max norm of a coarse estimate
/// of the integral.
pub fn adaptive_simpson_vec<F: FnMut(f64) -> Vec<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Vec<f64> {
    if b <= a {
        let d = f(a).len();
        return vec![0.0; d];
    }
    // Coarse 8-panel pass for the scale and as starting intervals.
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut nodes: Vec<(f64, Vec<f64>)> = Vec::with_capacity(2 * panels + 1);
    for i in 0..=(2 * panels) {
        let x = a + h * i as f64 / 2.0;
        nodes.push((x, f(x)));
    }
    let d = nodes[0].1.len();
    let mut coarse = vec![0.0; d];
    for p in 0..panels {
        let (fa, fm, fb) = (&nodes[2 * p].1, &nodes[2 * p + 1].1, &nodes[2 * p + 2].1);
        for c in 0..d {
            coarse[c] += h / 6.0 * (fa[c] + 4.0 * fm[c] + fb[c]);
        }
    }
    let scale = coarse.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let abs_tol = (rel_tol * scale).max(1e-300);
    let mut total = vec![0.0; d];
    for p in 0..panels {
        let x0 = nodes[2 * p].0;
        let x2 = nodes[2 * p + 2].0;
        let whole = simpson(&nodes[2 * p].1, &nodes[2 * p + 1].1, &nodes[2 * p + 2].1, x2 - x0);
        let part = recurse(
            &mut f,
            x0,
            x2,
            &nodes[2 * p].1,
            &nodes[2 * p + 1].1,
            &nodes[2 * p + 2].1,
            &whole,
            abs_tol / panels as f64,
            40,
        );
        for c in 0..d {
            total[c] += part[c];
        }
    }
    total
}

fn simpson(fa: &[f64], fm: &[f64], fb: &[f64], width: f64) -> Vec<f64> {
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((a, m), b)| width / 6.0 * (a + 4.0 * m + b))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> Vec<f64>>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: &[f64],
    fm: &[f64],
    fb: &[f64],
    whole: &[f64],
    tol: f64,
    depth: u32,
) -> Vec<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, &flm, fm, m - a);
    let right = simpson(fm, &frm, fb, b - m);
    let err = left
        .iter()
        .zip(&right)
        .zip(whole)
        .fold(0.0f64, |e, ((l, r), w)| e.max((l + r - w).abs()));
    if depth == 0 || err <= 15.0 * tol {
        return left
            .iter()
            .zip(&right)
            .zip(whole)
            .map(|((l, r), w)| l + r + (l + r - w) / 15.0)
            .collect();
    }
    let mut out = recurse(f, a, m, fa, &flm, fm, &left, tol / 2.0, depth - 1);
    let rhs = recurse(f, m, b, fm, &frm, fb, &right, tol / 2.0, depth - 1);
    for (o, r) in out.iter_mut().zip(rhs) {
        *o += r;
    }
    out
}

/// Binomial coefficient as a float-exact integer for moderate arguments.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(|x| x.exp(), 0.0, 2.0, 1e-10);
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn kernel_series_matches_closed_form() {
        for &x in &[-0.009, -1e-4, 1e-6, 0.0099] {
            let direct = x - (1.0f64 + x).ln();
            assert!((entropy_kernel(x) - direct).abs() < 1e-12);
        }
        assert_eq!(entropy_kernel(0.0), 0.0);
        assert!((entropy_kernel(1.0) - (1.0 - 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn poisson_weights_sum_to_one() {
        for &lam in &[0.3, 5.0, 80.0, 900.0] {
            let w = poisson_weights(lam, 1e-14);
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-10, "lambda {lam}: {s}");
        }
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        let (m, s) = mean_stderr(&[2.0; 10]);
        assert_eq!(m, 2.0);
        assert_eq!(s, 0.0);
    }
}
