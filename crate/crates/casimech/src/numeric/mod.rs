pub mod expsum;
pub mod quad;
pub mod special;

/// Polynomial extrapolation of samples `(x_i, f_i)` to x = 0 (Neville).
pub fn extrapolate_to_zero(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len();
    let mut p: Vec<f64> = samples.iter().map(|s| s.1).collect();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (samples[i].0, samples[i + m].0);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_is_exact_for_quadratics() {
        let f = |x: f64| 3.0 - 2.0 * x + 0.5 * x * x;
        let s: Vec<_> = [1.0, 0.5, 0.25].iter().map(|&x| (x, f(x))).collect();
        assert!((extrapolate_to_zero(&s) - 3.0).abs() < 1e-14);
    }
}
