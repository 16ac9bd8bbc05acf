use crate::fk::{ExcursionPool, FkError, MCEstimate};
use crate::model::ModelSpec;
use crate::pdmp::{RngStream, StoppingSpec};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Error)]
pub enum MalthusError {
    #[error(transparent)]
    Fk(#[from] FkError),
    #[error(
        "no certified sign change of L - 1 on [{q_lo:.4}, {q_hi:.4}] \
         (scanned {} points; largest estimate {:.3e}, smallest {:.3e})",
        curve.len(),
        curve.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    )]
    BracketFailure {
        q_lo: f64,
        q_hi: f64,
        /// (q, estimate, standard error) for every scanned point.
        curve: Vec<(f64, f64, f64)>,
    },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Knobs of the stochastic bisection. The defaults match the bundled
/// experiment budgets: up to 1e5 excursions, interval width 0.01.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverConfig {
    /// Pool size for the first scan.
    pub base_paths: u64,
    /// Hard cap; the pool quadruples until it reaches this.
    pub max_paths: u64,
    /// Bisection stops when the bracket is narrower than this.
    pub bisect_width: f64,
    /// Points in the initial scan over [-(q_c - 1), q_c].
    pub scan_points: usize,
    /// Censoring-horizon doublings allowed after the pilot sizing.
    pub horizon_doublings: u32,
    /// Paths in the pilot run that sizes the censoring horizon.
    pub pilot_paths: u64,
    /// Censoring horizon of the pilot run.
    pub pilot_horizon: f64,
    /// Kill the excursion below this level (restricted variants).
    pub lower_barrier: Option<f64>,
    /// Kill the excursion when this level is reached (restricted variants).
    pub upper_exit: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            base_paths: 25_000,
            max_paths: 100_000,
            bisect_width: 0.01,
            scan_points: 17,
            horizon_doublings: 3,
            pilot_paths: 1000,
            pilot_horizon: 200.0,
            lower_barrier: None,
            upper_exit: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), MalthusError> {
        if self.base_paths < 100 || self.max_paths < self.base_paths {
            return Err(MalthusError::Invalid(
                "need base_paths >= 100 and max_paths >= base_paths".into(),
            ));
        }
        if !(self.bisect_width > 0.0) || self.scan_points < 3 {
            return Err(MalthusError::Invalid(
                "need positive bisect_width and at least 3 scan points".into(),
            ));
        }
        if self.pilot_paths == 0 || !(self.pilot_horizon > 0.0) {
            return Err(MalthusError::Invalid("pilot needs paths and a positive horizon".into()));
        }
        Ok(())
    }
}

/// Root estimate with its certificate and the diagnostics needed to judge it.
#[derive(Debug, Clone, Serialize)]
pub struct MalthusResult {
    pub lambda_hat: f64,
    /// SE(L at lambda) / |L' at lambda|: the noise of the root location.
    pub std_error: f64,
    /// Certified interval: L - 1 is significantly positive at the left end
    /// and significantly negative at the right end.
    pub bracket: (f64, f64),
    pub l_at_lambda: MCEstimate,
    pub l_prime_at_lambda: MCEstimate,
    /// Pass: L(lambda) compatible with 1 and the derivative estimate is
    /// reliable and stable under horizon truncation. Inconclusive: the
    /// derivative keeps drifting as the horizon grows (slowly divergent or
    /// slowly convergent; the data cannot tell). Fail: L(lambda)
    /// incompatible with 1.
    pub cond_bw: TriState,
    pub anchor_x: f64,
    pub n_paths: u64,
    pub t_max: f64,
    pub hit_fraction: f64,
    /// Contributions from the last decade of the horizon are below a tenth
    /// of the standard error, so truncation bias is within noise.
    pub t_rule_satisfied: bool,
}

struct Engine<'a> {
    pool: ExcursionPool,
    cfg: &'a SolverConfig,
    doublings_used: u32,
}

impl<'a> Engine<'a> {
    /// Decide the sign of L(q) - 1 at 3-SE significance. A sign is only
    /// certified once the truncation bias at q is under control (last-decade
    /// rule), because a censored estimate is biased low and could otherwise
    /// certify a wrong crossing; the horizon budget is spent on that first,
    /// then paths are spent on significance. None means the budget could
    /// not separate L(q) from 1.
    fn decide(&mut self, q: f64) -> Result<Option<bool>, MalthusError> {
        loop {
            let est = self.pool.laplace(q);
            if self.doublings_used < self.cfg.horizon_doublings
                && self.pool.last_decade_contribution(q) > 0.1 * est.std_error
            {
                self.pool.escalate_horizon()?;
                self.doublings_used += 1;
                continue;
            }
            if est.mean - 1.0 > 3.0 * est.std_error {
                return Ok(Some(true));
            }
            if 1.0 - est.mean > 3.0 * est.std_error {
                return Ok(Some(false));
            }
            if (self.pool.len() as u64) * 4 <= self.cfg.max_paths {
                self.pool.extend()?;
                continue;
            }
            return Ok(None);
        }
    }

    /// Grow the horizon until the last-decade rule holds at q or the budget
    /// runs out; report whether it holds.
    fn settle_tail(&mut self, q: f64) -> Result<bool, MalthusError> {
        loop {
            let est = self.pool.laplace(q);
            if self.pool.last_decade_contribution(q) <= 0.1 * est.std_error {
                return Ok(true);
            }
            if self.doublings_used >= self.cfg.horizon_doublings {
                return Ok(false);
            }
            self.pool.escalate_horizon()?;
            self.doublings_used += 1;
        }
    }
}

fn make_pool(
    spec: &ModelSpec,
    anchor: f64,
    cfg: &SolverConfig,
    streams: &RngStream,
) -> Result<ExcursionPool, MalthusError> {
    let dom = spec.working_domain();
    if !(anchor > dom.0 && anchor < dom.1) {
        return Err(MalthusError::Invalid(format!(
            "anchor {anchor} outside the working domain ({}, {})",
            dom.0, dom.1
        )));
    }
    if let Some(a) = cfg.lower_barrier {
        if !(a > 0.0 && a < anchor) {
            return Err(MalthusError::Invalid(format!(
                "lower barrier {a} must sit in (0, anchor)"
            )));
        }
    }
    if let Some(b) = cfg.upper_exit {
        if !(b > anchor) {
            return Err(MalthusError::Invalid(format!(
                "upper exit {b} must sit above the anchor"
            )));
        }
    }
    let base_censors = StoppingSpec {
        horizon: Some(cfg.pilot_horizon),
        lower_barrier: cfg.lower_barrier,
        upper_exit: cfg.upper_exit,
        ..StoppingSpec::default()
    };
    // pilot: size the censoring horizon from observed return times
    let pilot = ExcursionPool::generate(
        spec,
        anchor,
        anchor,
        &base_censors,
        cfg.pilot_paths,
        RngStream::new(streams.master_seed.wrapping_add(0x9E37_79B9)),
    )?;
    let t0 = match pilot.median_hit_time() {
        Some(med) => (10.0 * med).min(cfg.pilot_horizon),
        // no returns seen at all: run at the pilot horizon and let the scan
        // report the (lack of a) bracket honestly
        None => cfg.pilot_horizon,
    };
    let censors = StoppingSpec { horizon: Some(t0), ..base_censors };
    Ok(ExcursionPool::generate(spec, anchor, anchor, &censors, cfg.base_paths, *streams)?)
}

/// Estimate the root of L - 1 for excursions from `anchor` back to itself.
pub fn solve_malthus(
    spec: &ModelSpec,
    anchor: f64,
    cfg: &SolverConfig,
    streams: &RngStream,
) -> Result<MalthusResult, MalthusError> {
    cfg.validate()?;
    let q_hi_limit = spec.q_c();
    let q_lo_limit = -(q_hi_limit - 1.0);
    let mut engine = Engine {
        pool: make_pool(spec, anchor, cfg, streams)?,
        cfg,
        doublings_used: 0,
    };

    // scan for a certified bracket, widening the pool if the first try fails
    let scan_q: Vec<f64> = (0..cfg.scan_points)
        .map(|i| q_lo_limit + (q_hi_limit - q_lo_limit) * i as f64 / (cfg.scan_points - 1) as f64)
        .collect();
    let (mut q_lo, mut q_hi);
    loop {
        let curve: Vec<(f64, f64, f64)> = scan_q
            .iter()
            .map(|&q| {
                let e = engine.pool.laplace(q);
                (q, e.mean, e.std_error)
            })
            .collect();
        // L is nonincreasing in q sample-wise, so the last significant
        // point above 1 sits left of the first significant point below 1
        q_lo = curve
            .iter()
            .filter(|(_, m, s)| m - 1.0 > 3.0 * s)
            .map(|&(q, _, _)| q)
            .next_back();
        q_hi = curve.iter().find(|(_, m, s)| 1.0 - m > 3.0 * s).map(|&(q, _, _)| q);
        if q_lo.is_some() && q_hi.is_some() {
            break;
        }
        if (engine.pool.len() as u64) * 4 <= cfg.max_paths {
            engine.pool.extend()?;
            continue;
        }
        return Err(MalthusError::BracketFailure {
            q_lo: q_lo_limit,
            q_hi: q_hi_limit,
            curve,
        });
    }
    let (mut q_lo, mut q_hi) = (q_lo.unwrap(), q_hi.unwrap());

    // bisection; endpoints move only on certified signs
    while q_hi - q_lo > cfg.bisect_width {
        let mid = 0.5 * (q_lo + q_hi);
        match engine.decide(mid)? {
            Some(true) => q_lo = mid,
            Some(false) => q_hi = mid,
            None => break,
        }
    }

    let lambda_hat = 0.5 * (q_lo + q_hi);
    let t_rule_satisfied = engine.settle_tail(lambda_hat)?;
    let pool = &engine.pool;
    let l = pool.laplace(lambda_hat);
    let lp = pool.laplace_derivative(lambda_hat);
    let std_error = if lp.mean != 0.0 {
        l.std_error / lp.mean.abs()
    } else {
        f64::INFINITY
    };

    // truncation stability of the derivative: compare against what the
    // half-horizon pool would have reported
    let half = pool.laplace_derivative_truncated(lambda_hat, pool.t_max() / 2.0);
    let drift = (lp.mean - half.mean).abs();
    let joint_se = (lp.std_error.powi(2) + half.std_error.powi(2)).sqrt();
    let stable = drift <= (3.0 * joint_se).max(0.02 * lp.mean.abs());

    // L(lambda) should be 1, but lambda itself is only located to half the
    // bracket width, so allow |L'| times that on top of the noise
    let consistent =
        (l.mean - 1.0).abs() <= 3.0 * l.std_error + lp.mean.abs() * 0.5 * (q_hi - q_lo);
    let cond_bw = if !consistent {
        TriState::Fail
    } else if !lp.is_unreliable() && stable {
        TriState::Pass
    } else {
        TriState::Inconclusive
    };

    Ok(MalthusResult {
        lambda_hat,
        std_error,
        bracket: (q_lo, q_hi),
        l_at_lambda: l,
        l_prime_at_lambda: lp,
        cond_bw,
        anchor_x: anchor,
        n_paths: pool.len() as u64,
        t_max: pool.t_max(),
        hit_fraction: pool.hit_fraction(),
        t_rule_satisfied,
    })
}

/// Window-restricted exponents: the same root-find on excursions killed at
/// a barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RestrictionMode {
    /// Excursions from `anchor` back to itself, killed on passage below
    /// `barrier`. The root is the lower-window exponent.
    LowerBarrier { barrier: f64, anchor: f64 },
    /// Excursions from `anchor` back to itself, killed on reaching
    /// `ceiling`. The root is the upper-window exponent.
    UpperExit { anchor: f64, ceiling: f64 },
}

pub fn restricted_exponent(
    spec: &ModelSpec,
    mode: RestrictionMode,
    cfg: &SolverConfig,
    streams: &RngStream,
) -> Result<MalthusResult, MalthusError> {
    let mut cfg = *cfg;
    let anchor = match mode {
        RestrictionMode::LowerBarrier { barrier, anchor } => {
            if !(barrier < anchor) {
                return Err(MalthusError::Invalid(format!(
                    "need barrier < anchor, got {barrier} and {anchor}"
                )));
            }
            cfg.lower_barrier = Some(barrier);
            anchor
        }
        RestrictionMode::UpperExit { anchor, ceiling } => {
            if !(anchor < ceiling) {
                return Err(MalthusError::Invalid(format!(
                    "need anchor < ceiling, got {anchor} and {ceiling}"
                )));
            }
            cfg.upper_exit = Some(ceiling);
            anchor
        }
    };
    solve_malthus(spec, anchor, &cfg, streams)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaVerdict {
    /// Estimate stable under horizon doubling: the functional is finite here.
    Stable,
    /// Estimate keeps growing as the horizon doubles.
    Divergent,
    /// Too noisy to classify.
    Unresolved,
}

#[derive(Debug, Clone, Serialize)]
pub struct CondBw2Result {
    pub verdict: TriState,
    /// (delta, estimate at lambda - delta, verdict) down the ladder.
    pub ladder: Vec<(f64, f64, DeltaVerdict)>,
    pub t_max: f64,
    pub seed: u64,
}

/// Check that the return functional stays finite strictly below the root:
/// evaluates L(lambda - delta) down a ladder of deltas and classifies each
/// estimate by its stability under censoring-horizon doubling. Pass needs
/// one stable level; Fail means every level diverges.
pub fn check_cond_bw2(
    spec: &ModelSpec,
    anchor: f64,
    lambda_hat: f64,
    cfg: &SolverConfig,
    streams: &RngStream,
) -> Result<CondBw2Result, MalthusError> {
    cfg.validate()?;
    const LADDER: [f64; 4] = [0.2, 0.1, 0.05, 0.02];
    let mut engine = Engine {
        pool: make_pool(spec, anchor, cfg, streams)?,
        cfg,
        doublings_used: 0,
    };
    let mut ladder = Vec::with_capacity(LADDER.len());
    for &delta in &LADDER {
        let q = lambda_hat - delta;
        let verdict = loop {
            let est = engine.pool.laplace(q);
            if est.is_unreliable() {
                break DeltaVerdict::Unresolved;
            }
            let half = engine.pool.laplace_truncated(q, engine.pool.t_max() / 2.0);
            let drift = (est.mean - half.mean).abs();
            let joint_se = (est.std_error.powi(2) + half.std_error.powi(2)).sqrt();
            if drift <= (3.0 * joint_se).max(0.02 * est.mean.abs()) {
                break DeltaVerdict::Stable;
            }
            if engine.doublings_used >= cfg.horizon_doublings {
                break DeltaVerdict::Divergent;
            }
            engine.pool.escalate_horizon()?;
            engine.doublings_used += 1;
        };
        ladder.push((delta, engine.pool.laplace(q).mean, verdict));
    }
    let verdict = if ladder.iter().any(|&(_, _, v)| v == DeltaVerdict::Stable) {
        TriState::Pass
    } else if ladder.iter().all(|&(_, _, v)| v == DeltaVerdict::Divergent) {
        TriState::Fail
    } else {
        TriState::Inconclusive
    };
    Ok(CondBw2Result {
        verdict,
        ladder,
        t_max: engine.pool.t_max(),
        seed: streams.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let spec = ModelSpec::hump();
        let streams = RngStream::new(1);
        let bad = SolverConfig { base_paths: 10, ..SolverConfig::default() };
        assert!(solve_malthus(&spec, 1.0, &bad, &streams).is_err());
        let cfg = SolverConfig::default();
        assert!(solve_malthus(&spec, 1e9, &cfg, &streams).is_err(), "anchor outside domain");
    }

    #[test]
    fn restriction_modes_validate_windows() {
        let spec = ModelSpec::hump();
        let streams = RngStream::new(1);
        let cfg = SolverConfig::default();
        let bad = RestrictionMode::LowerBarrier { barrier: 2.0, anchor: 1.0 };
        assert!(restricted_exponent(&spec, bad, &cfg, &streams).is_err());
        let bad2 = RestrictionMode::UpperExit { anchor: 3.0, ceiling: 2.0 };
        assert!(restricted_exponent(&spec, bad2, &cfg, &streams).is_err());
    }
}
