//! Streaming mean / standard-error accumulation (Welford update, Chan merge).
//!
//! Parallel reductions merge accumulators in a fixed batch order so results
//! are bit-identical regardless of worker count. Welford's form also keeps
//! the zero-variance case exact: identical inputs give SE exactly 0.

#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAcc {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAcc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Chan et al. pairwise merge; deterministic for a fixed merge order.
    pub fn merge(&mut self, other: &MeanAcc) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let delta = other.mean - self.mean;
        let n = n1 + n2;
        self.mean += delta * n2 / n;
        self.m2 += other.m2 + delta * delta * n1 * n2 / n;
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (n-1 denominator); 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n as f64 - 1.0)).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_formulas() {
        let vals = [1.0, 2.0, 4.0, 8.0, 16.5, -3.0];
        let mut acc = MeanAcc::new();
        for v in vals {
            acc.push(v);
        }
        let n = vals.len() as f64;
        let mean: f64 = vals.iter().sum::<f64>() / n;
        let var: f64 = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!((acc.mean() - mean).abs() < 1e-14);
        assert!((acc.variance() - var).abs() < 1e-13);
        assert!((acc.std_error() - (var / n).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn zero_variance_is_exact() {
        let mut acc = MeanAcc::new();
        for _ in 0..1000 {
            acc.push(2.718281828459045);
        }
        assert_eq!(acc.std_error(), 0.0);
        assert_eq!(acc.mean(), 2.718281828459045);
    }

    #[test]
    fn merge_equals_sequential() {
        let vals: Vec<f64> = (0..257).map(|i| ((i * 37) % 101) as f64 * 0.13 - 5.0).collect();
        let mut whole = MeanAcc::new();
        for &v in &vals {
            whole.push(v);
        }
        let mut a = MeanAcc::new();
        let mut b = MeanAcc::new();
        for &v in &vals[..100] {
            a.push(v);
        }
        for &v in &vals[100..] {
            b.push(v);
        }
        a.merge(&b);
        assert_eq!(a.count(), whole.count());
        assert!((a.mean() - whole.mean()).abs() < 1e-13);
        assert!((a.variance() - whole.variance()).abs() < 1e-12);
    }
}
