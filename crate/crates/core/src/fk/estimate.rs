use crate::model::ModelSpec;
use crate::numeric::stats::MeanAcc;
use crate::pdmp::{simulate_path, RngStream, SimError, StopReason, StoppingSpec};
use rayon::prelude::*;
use thiserror::Error;

/// Fixed batch width for parallel path generation. Batches are merged in
/// index order, which keeps results independent of the thread count.
pub(crate) const BATCH: u64 = 1024;

#[derive(Debug, Error)]
pub enum FkError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("all {0} paths were censored by the event cap")]
    AllCensored(u64),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// A Monte Carlo estimate with its sampling uncertainty and provenance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: u64,
    /// Fraction of paths that hit the event cap and were dropped from the
    /// average (time-horizon estimators), or that never resolved before the
    /// censoring horizon (hitting estimators, where they contribute zero).
    pub censored_fraction: f64,
    pub seed: u64,
}

impl MCEstimate {
    /// An estimate whose standard error exceeds half its magnitude carries
    /// no usable sign or scale information.
    pub fn is_unreliable(&self) -> bool {
        self.std_error > 0.5 * self.mean.abs()
    }
}

/// Test functions the estimators integrate against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// 1 on [lower, upper], 0 elsewhere.
    Indicator { lower: f64, upper: f64 },
    /// Piecewise-linear bump: 0 at the ends, 1 at the arithmetic midpoint.
    Tent { lower: f64, upper: f64 },
    /// f(x) = x.
    Identity,
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Indicator { lower, upper } => {
                if x >= lower && x <= upper {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Tent { lower, upper } => {
                if x <= lower || x >= upper {
                    0.0
                } else {
                    let mid = 0.5 * (lower + upper);
                    if x <= mid {
                        (x - lower) / (mid - lower)
                    } else {
                        (upper - x) / (upper - mid)
                    }
                }
            }
            TestFunction::Identity => x,
        }
    }

    pub fn validate(&self) -> Result<(), FkError> {
        match *self {
            TestFunction::Indicator { lower, upper } | TestFunction::Tent { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper && lower > 0.0) {
                    return Err(FkError::Invalid(format!(
                        "test function needs 0 < lower < upper, got [{lower}, {upper}]"
                    )));
                }
            }
            TestFunction::Identity => {}
        }
        Ok(())
    }
}

/// Estimate the semigroup applied to f at x0 and time t:
/// the average of x0 * W_t * f(X_t) / X_t over paths of the weighted
/// instrumental process, where W_t is the exponential path weight.
///
/// Paths censored by the event cap carry no usable endpoint and are dropped
/// (their fraction is reported); everything else enters the average.
pub fn estimate_semigroup(
    spec: &ModelSpec,
    x0: f64,
    f: &TestFunction,
    t: f64,
    n_paths: u64,
    streams: &RngStream,
) -> Result<MCEstimate, FkError> {
    f.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(FkError::Invalid(format!("horizon must be finite and >= 0, got {t}")));
    }
    if n_paths == 0 {
        return Err(FkError::Invalid("n_paths must be positive".into()));
    }
    if t == 0.0 {
        // the path is a point; the estimate is exact
        return Ok(MCEstimate {
            mean: f.eval(x0),
            std_error: 0.0,
            n_paths: 0,
            censored_fraction: 0.0,
            seed: streams.master_seed,
        });
    }
    let stopping = StoppingSpec::horizon(t);
    let batch_results: Vec<Result<(MeanAcc, u64), SimError>> = (0..n_paths)
        .step_by(BATCH as usize)
        .collect::<Vec<u64>>()
        .into_par_iter()
        .map(|lo| {
            let hi = (lo + BATCH).min(n_paths);
            let mut acc = MeanAcc::new();
            let mut censored = 0u64;
            for i in lo..hi {
                let p = simulate_path(spec, x0, &stopping, &mut streams.path_rng(i))?;
                if p.stop_reason == StopReason::MaxEvents {
                    censored += 1;
                    continue;
                }
                acc.push(x0 * p.log_weight.exp() * f.eval(p.final_position) / p.final_position);
            }
            Ok((acc, censored))
        })
        .collect();

    let mut total = MeanAcc::new();
    let mut censored = 0u64;
    for r in batch_results {
        let (acc, c) = r?;
        total.merge(&acc);
        censored += c;
    }
    if total.count() == 0 {
        return Err(FkError::AllCensored(n_paths));
    }
    Ok(MCEstimate {
        mean: total.mean(),
        std_error: total.std_error(),
        n_paths: total.count(),
        censored_fraction: censored as f64 / n_paths as f64,
        seed: streams.master_seed,
    })
}

/// The exponentially discounted variant: exp(-q t) times the semigroup
/// estimate, with the discount applied per path so the standard error is
/// discounted too. With q = 0 this reproduces `estimate_semigroup` exactly
/// (same streams, same paths, same arithmetic up to the multiplication by 1).
pub fn tilted_expectation(
    spec: &ModelSpec,
    x0: f64,
    f: &TestFunction,
    t: f64,
    q: f64,
    n_paths: u64,
    streams: &RngStream,
) -> Result<MCEstimate, FkError> {
    if !q.is_finite() {
        return Err(FkError::Invalid(format!("decay parameter must be finite, got {q}")));
    }
    let base = estimate_semigroup(spec, x0, f, t, n_paths, streams)?;
    let d = (-q * t).exp();
    Ok(MCEstimate {
        mean: base.mean * d,
        std_error: base.std_error * d,
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn zero_horizon_is_exact() {
        let spec = ModelSpec::hump();
        let streams = RngStream::new(1);
        let f = TestFunction::Tent { lower: 0.5, upper: 2.0 };
        let e = estimate_semigroup(&spec, 1.25, &f, 0.0, 1000, &streams).unwrap();
        assert_eq!(e.mean, f.eval(1.25));
        assert_eq!(e.std_error, 0.0);
        assert!(!e.is_unreliable());
    }

    #[test]
    fn identity_under_linear_growth_has_vanishing_variance() {
        // with c(x) = a x the path weight is exp(a t) whatever the jumps do,
        // so every contribution equals x0 exp(a t) up to roundoff
        let spec = ModelSpec::linear_calibration();
        let streams = RngStream::new(12);
        let t = 2.0;
        let e = estimate_semigroup(&spec, 1.0, &TestFunction::Identity, t, 400, &streams).unwrap();
        let truth = (0.5f64 * t).exp();
        assert!((e.mean - truth).abs() < 1e-12 * truth);
        assert!(e.std_error < 1e-12 * e.mean.abs());
    }

    #[test]
    fn thread_count_does_not_change_the_estimate() {
        let spec = ModelSpec::hump();
        let streams = RngStream::new(3);
        let f = TestFunction::Indicator { lower: 0.7, upper: 1.5 };
        let a = estimate_semigroup(&spec, 1.0, &f, 3.0, 4000, &streams).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| estimate_semigroup(&spec, 1.0, &f, 3.0, 4000, &streams))
            .unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn tilt_with_zero_decay_matches_semigroup() {
        let spec = ModelSpec::hump();
        let streams = RngStream::new(9);
        let f = TestFunction::Indicator { lower: 0.9, upper: 1.1 };
        let a = estimate_semigroup(&spec, 1.0, &f, 2.0, 2000, &streams).unwrap();
        let b = tilted_expectation(&spec, 1.0, &f, 2.0, 0.0, 2000, &streams).unwrap();
        assert!((a.mean - b.mean).abs() <= 1e-12 * a.mean.abs());
        assert!((a.std_error - b.std_error).abs() <= 1e-12 * a.std_error.abs());
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let spec = ModelSpec::hump();
        let streams = RngStream::new(1);
        let f = TestFunction::Indicator { lower: 2.0, upper: 1.0 };
        assert!(estimate_semigroup(&spec, 1.0, &f, 1.0, 10, &streams).is_err());
        let id = TestFunction::Identity;
        assert!(estimate_semigroup(&spec, 1.0, &id, f64::NAN, 10, &streams).is_err());
        assert!(estimate_semigroup(&spec, 1.0, &id, 1.0, 0, &streams).is_err());
    }
}
