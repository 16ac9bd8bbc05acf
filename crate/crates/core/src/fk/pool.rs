use super::estimate::{FkError, MCEstimate, BATCH};
use crate::model::ModelSpec;
use crate::numeric::stats::MeanAcc;
use crate::pdmp::{hitting_functional, RngStream, SimError, StopReason, StoppingSpec};
use rayon::prelude::*;

/// Outcome of one excursion toward the target level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionRecord {
    /// The path reached the target before any censor fired.
    pub hit: bool,
    /// Hitting time if hit; otherwise the time the censor fired.
    pub h: f64,
    /// Log path weight accumulated up to that time.
    pub log_weight: f64,
    /// The event cap fired before the path resolved.
    pub capped: bool,
}

/// A reusable batch of excursions from a fixed start toward a fixed target.
///
/// Each record stores (hit, H, ln W), which is enough to evaluate the
/// discounted hitting functional E[W exp(-q H); hit] and its q-derivative at
/// any q by reweighting, without touching the paths again. Non-hit records
/// contribute zero: the estimator is biased low by the mass beyond the
/// censoring horizon, which is why the horizon escalation and the tail
/// diagnostics below exist.
///
/// Paths are addressed by (master seed, path index). `extend` quadruples the
/// pool, simulating only the new indices; `escalate_horizon` doubles the
/// censoring horizon and re-simulates every index, and because each index
/// replays its own random stream, paths that had already resolved come back
/// bit-identical.
#[derive(Debug, Clone)]
pub struct ExcursionPool {
    spec: ModelSpec,
    start: f64,
    target: f64,
    censors: StoppingSpec,
    streams: RngStream,
    records: Vec<ExcursionRecord>,
}

fn simulate_records(
    spec: &ModelSpec,
    start: f64,
    target: f64,
    censors: &StoppingSpec,
    lo: u64,
    hi: u64,
    streams: &RngStream,
) -> Result<Vec<ExcursionRecord>, SimError> {
    let chunk_results: Vec<Result<Vec<ExcursionRecord>, SimError>> = (lo..hi)
        .step_by(BATCH as usize)
        .collect::<Vec<u64>>()
        .into_par_iter()
        .map(|b| {
            let e = (b + BATCH).min(hi);
            (b..e)
                .map(|i| {
                    let out =
                        hitting_functional(spec, start, target, censors, &mut streams.path_rng(i))?;
                    Ok(ExcursionRecord {
                        hit: out.hit,
                        h: out.h,
                        log_weight: out.log_weight_at_h,
                        capped: out.stop_reason == StopReason::MaxEvents,
                    })
                })
                .collect()
        })
        .collect();
    let mut records = Vec::with_capacity((hi - lo) as usize);
    for c in chunk_results {
        records.extend(c?);
    }
    Ok(records)
}

impl ExcursionPool {
    /// Simulate n excursions from `start` toward `target`. `censors` must
    /// carry a finite horizon; optional barriers kill the excursion early
    /// (such paths count as censored, not as hits).
    pub fn generate(
        spec: &ModelSpec,
        start: f64,
        target: f64,
        censors: &StoppingSpec,
        n: u64,
        streams: RngStream,
    ) -> Result<Self, FkError> {
        let t_max = censors
            .horizon
            .ok_or_else(|| FkError::Invalid("excursion pool needs a censoring horizon".into()))?;
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(FkError::Invalid(format!("censoring horizon must be positive, got {t_max}")));
        }
        if n == 0 {
            return Err(FkError::Invalid("pool size must be positive".into()));
        }
        let records = simulate_records(spec, start, target, censors, 0, n, &streams)?;
        Ok(ExcursionPool {
            spec: spec.clone(),
            start,
            target,
            censors: *censors,
            streams,
            records,
        })
    }

    /// Quadruple the pool. Existing records are untouched.
    pub fn extend(&mut self) -> Result<(), FkError> {
        let n = self.records.len() as u64;
        let more = simulate_records(
            &self.spec,
            self.start,
            self.target,
            &self.censors,
            n,
            4 * n,
            &self.streams,
        )?;
        self.records.extend(more);
        Ok(())
    }

    /// Double the censoring horizon and re-simulate every index. Records
    /// that had already resolved replay bit-identically; censored ones get
    /// another chance to resolve.
    pub fn escalate_horizon(&mut self) -> Result<(), FkError> {
        self.censors.horizon = Some(self.t_max() * 2.0);
        self.records = simulate_records(
            &self.spec,
            self.start,
            self.target,
            &self.censors,
            0,
            self.records.len() as u64,
            &self.streams,
        )?;
        Ok(())
    }

    fn reweighted(&self, q: f64, weight: impl Fn(&ExcursionRecord) -> f64) -> MCEstimate {
        let mut acc = MeanAcc::new();
        let mut censored = 0u64;
        for r in &self.records {
            if r.hit {
                acc.push(weight(r) * (r.log_weight - q * r.h).exp());
            } else {
                censored += 1;
                acc.push(0.0);
            }
        }
        MCEstimate {
            mean: acc.mean(),
            std_error: acc.std_error(),
            n_paths: acc.count(),
            censored_fraction: censored as f64 / self.records.len() as f64,
            seed: self.streams.master_seed,
        }
    }

    /// E[W exp(-q H); target hit before the censors].
    pub fn laplace(&self, q: f64) -> MCEstimate {
        self.reweighted(q, |_| 1.0)
    }

    /// d/dq of the above: E[-H W exp(-q H); hit].
    pub fn laplace_derivative(&self, q: f64) -> MCEstimate {
        self.reweighted(q, |r| -r.h)
    }

    /// Same functional with hits after `t_cut` zeroed out. With
    /// t_cut = horizon this is exactly `laplace`; with t_cut = horizon / 2 it
    /// reproduces what a half-horizon pool would have estimated.
    pub fn laplace_truncated(&self, q: f64, t_cut: f64) -> MCEstimate {
        self.reweighted(q, |r| if r.h <= t_cut { 1.0 } else { 0.0 })
    }

    /// Truncated counterpart of `laplace_derivative`.
    pub fn laplace_derivative_truncated(&self, q: f64, t_cut: f64) -> MCEstimate {
        self.reweighted(q, |r| if r.h <= t_cut { -r.h } else { 0.0 })
    }

    /// Mean contribution from hits in the last decade of the horizon,
    /// (t_max / 10, t_max]. Small against the standard error of `laplace`
    /// means the horizon truncation bias is already below noise.
    pub fn last_decade_contribution(&self, q: f64) -> f64 {
        let t_lo = self.t_max() / 10.0;
        self.reweighted(q, |r| if r.h > t_lo { 1.0 } else { 0.0 }).mean
    }

    pub fn hit_fraction(&self) -> f64 {
        self.records.iter().filter(|r| r.hit).count() as f64 / self.records.len() as f64
    }

    /// Fraction of paths stopped by the event cap (ambiguous outcomes).
    pub fn capped_fraction(&self) -> f64 {
        self.records.iter().filter(|r| r.capped).count() as f64 / self.records.len() as f64
    }

    pub fn median_hit_time(&self) -> Option<f64> {
        let mut times: Vec<f64> = self.records.iter().filter(|r| r.hit).map(|r| r.h).collect();
        if times.is_empty() {
            return None;
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some(times[times.len() / 2])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.censors.horizon.expect("pool always has a horizon")
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn seed(&self) -> u64 {
        self.streams.master_seed
    }

    pub fn records(&self) -> &[ExcursionRecord] {
        &self.records
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FragmentDensity, FragmentationKernel, GrowthRate, ModelSpec, TotalRate};

    fn pool(n: u64, t_max: f64) -> ExcursionPool {
        let spec = ModelSpec::hump();
        ExcursionPool::generate(
            &spec,
            1.0,
            1.5,
            &StoppingSpec::horizon(t_max),
            n,
            RngStream::new(7),
        )
        .unwrap()
    }

    #[test]
    fn extend_keeps_existing_records() {
        let mut p = pool(256, 5.0);
        let before = p.records().to_vec();
        p.extend().unwrap();
        assert_eq!(p.len(), 1024);
        assert_eq!(&p.records()[..256], &before[..]);
    }

    #[test]
    fn horizon_escalation_replays_resolved_paths() {
        let mut p = pool(512, 1.0);
        let before = p.records().to_vec();
        let hits_before = p.hit_fraction();
        p.escalate_horizon().unwrap();
        assert_eq!(p.t_max(), 2.0);
        assert!(p.hit_fraction() >= hits_before);
        for (a, b) in before.iter().zip(p.records()) {
            if a.hit {
                assert_eq!(a, b, "resolved excursions must replay bit-identically");
            }
        }
        // the longer horizon resolved at least one previously censored path
        assert!(
            p.records().iter().zip(&before).any(|(b, a)| b.hit && !a.hit),
            "escalation changed nothing; pick a tighter initial horizon"
        );
    }

    #[test]
    fn laplace_is_monotone_and_consistent_with_truncation() {
        let p = pool(2000, 8.0);
        let qs = [-0.2, 0.0, 0.3, 0.7, 1.2];
        let vals: Vec<f64> = qs.iter().map(|&q| p.laplace(q).mean).collect();
        for w in vals.windows(2) {
            assert!(w[0] >= w[1] - 1e-15, "discounted functional must not increase in q");
        }
        let full = p.laplace(0.3);
        let trunc = p.laplace_truncated(0.3, p.t_max());
        assert_eq!(full.mean.to_bits(), trunc.mean.to_bits());
        assert!(p.laplace_truncated(0.3, p.t_max() / 2.0).mean <= full.mean);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let p = pool(2000, 8.0);
        let q = 0.3;
        let h = 1e-3;
        let fd = (p.laplace(q + h).mean - p.laplace(q - h).mean) / (2.0 * h);
        let an = p.laplace_derivative(q).mean;
        assert!((fd - an).abs() < 1e-4 * an.abs().max(1.0), "fd {fd} vs {an}");
    }

    #[test]
    fn pure_flow_excursion_is_deterministic() {
        let spec = ModelSpec::new(
            GrowthRate::Linear { a: 0.5 },
            FragmentationKernel::self_similar(
                TotalRate::Constant { value: 0.0 },
                FragmentDensity::PowerLaw { exponent: 0.0 },
            ),
            0.05,
            20.0,
        )
        .unwrap();
        let p = ExcursionPool::generate(
            &spec,
            1.0,
            2.0,
            &StoppingSpec::horizon(10.0),
            64,
            RngStream::new(1),
        )
        .unwrap();
        assert_eq!(p.hit_fraction(), 1.0);
        let tau = (2.0f64).ln() / 0.5;
        let q = 0.4;
        let expect = 2.0 * (-q * tau).exp();
        let est = p.laplace(q);
        assert!((est.mean - expect).abs() < 1e-12);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(p.median_hit_time().unwrap(), tau);
    }

    #[test]
    fn barriers_censor_excursions() {
        let spec = ModelSpec::hump();
        let censors = StoppingSpec {
            lower_barrier: Some(0.8),
            ..StoppingSpec::horizon(20.0)
        };
        let with_barrier =
            ExcursionPool::generate(&spec, 1.0, 2.0, &censors, 2000, RngStream::new(5)).unwrap();
        let without = ExcursionPool::generate(
            &spec,
            1.0,
            2.0,
            &StoppingSpec::horizon(20.0),
            2000,
            RngStream::new(5),
        )
        .unwrap();
        assert!(with_barrier.hit_fraction() < without.hit_fraction());
        assert!(with_barrier.laplace(0.3).mean < without.laplace(0.3).mean);
    }

    #[test]
    fn pool_rejects_missing_horizon() {
        let spec = ModelSpec::hump();
        let censors = StoppingSpec { hit_target: Some(2.0), ..StoppingSpec::default() };
        assert!(
            ExcursionPool::generate(&spec, 1.0, 2.0, &censors, 16, RngStream::new(1)).is_err()
        );
    }
}
