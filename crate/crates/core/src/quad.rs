//! Quadrature helpers.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Adaptive double-exponential quadrature on `[a, b]`; returns the integral
/// and the error estimate.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, target: f64) -> (f64, f64) {
    let out = quadrature::integrate(f, a, b, target);
    (out.integral, out.error_estimate)
}

/// Gauss–Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("nonzero"));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.as_node_weight_pairs().iter().map(|&(x, w)| (mid + half * x, half * w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let rule = gauss_legendre(6, 0.0, 2.0);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(11)).sum();
        assert!((s - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let (v, _) = adaptive(|x| x.exp(), 0.0, 1.0, 1e-12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
    }
}
