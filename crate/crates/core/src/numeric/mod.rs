//! Small numerical kernels used across the toolkit.
//!
//! These are deliberately hand-rolled: each is a few dozen lines, is exercised
//! by its own oracle tests, and keeping them local makes the load-bearing
//! numerics auditable in one place.

pub mod interp;
pub mod lu;
pub mod quad;
pub mod roots;
pub mod stats;

/// Geometric (log-spaced) grid with `n >= 2` nodes from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let llo = lo.ln();
    let step = (hi.ln() - llo) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (llo + step * i as f64).exp()).collect();
    // pin the endpoints so downstream equality checks see exact bounds
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Neumaier compensated sum; deterministic for a fixed iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_exact() {
        let g = log_grid(0.05, 20.0, 512);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[511], 20.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        // ratios constant on a log grid
        let r0 = g[1] / g[0];
        for w in g.windows(2) {
            assert!((w[1] / w[0] / r0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn compensated_sum_beats_naive() {
        // 1 + 1e-16 added 1e5 times loses the small part in naive order
        let mut vals = vec![1.0f64];
        vals.extend(std::iter::repeat(1e-16).take(100_000));
        let s = compensated_sum(vals.iter().copied());
        assert!((s - (1.0 + 1e-11)).abs() < 1e-24);
    }
}
