//! The path simulation engine.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::model::ModelSpec;

/// When to stop a path. At least one of the four clauses must be set;
/// `max_events` bounds the thinning work (proposals, accepted or not) and is
/// always active, with a large default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingSpec {
    pub horizon: Option<f64>,
    pub hit_target: Option<f64>,
    pub lower_barrier: Option<f64>,
    pub upper_exit: Option<f64>,
    pub max_events: u64,
}

pub const DEFAULT_MAX_EVENTS: u64 = 10_000_000;

impl Default for StoppingSpec {
    fn default() -> Self {
        StoppingSpec {
            horizon: None,
            hit_target: None,
            lower_barrier: None,
            upper_exit: None,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }
}

impl StoppingSpec {
    pub fn horizon(t: f64) -> Self {
        StoppingSpec { horizon: Some(t), ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon.is_none()
            && self.hit_target.is_none()
            && self.lower_barrier.is_none()
            && self.upper_exit.is_none()
        {
            return Err(SimError::NoStoppingClause);
        }
        if let Some(t) = self.horizon {
            if !(t >= 0.0) {
                return Err(SimError::BadStopping("horizon must be >= 0".into()));
            }
        }
        for (name, v) in [
            ("hit_target", self.hit_target),
            ("lower_barrier", self.lower_barrier),
            ("upper_exit", self.upper_exit),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(SimError::BadStopping(format!("{name} must be > 0")));
                }
            }
        }
        if self.max_events == 0 {
            return Err(SimError::BadStopping("max_events must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    HitTarget,
    ExitedInterval,
    MaxEvents,
}

/// One accepted fragmentation jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub segment_end_time: f64,
    pub pre_jump_position: f64,
    pub post_jump_position: f64,
}

/// A simulated path: the jump skeleton plus the flow in between determines
/// the trajectory exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub start: f64,
    pub events: Vec<JumpEvent>,
    pub final_time: f64,
    pub final_position: f64,
    /// ln of the exponential weight, exact telescoping of flow ratios.
    pub log_weight: f64,
    pub stop_reason: StopReason,
}

impl Path {
    /// Position at time t, reconstructed from the jump skeleton.
    pub fn position_at(&self, spec: &ModelSpec, t: f64) -> f64 {
        assert!(t >= 0.0 && t <= self.final_time);
        let mut seg_start_t = 0.0;
        let mut seg_start_x = self.start;
        for e in &self.events {
            if t < e.segment_end_time {
                return spec.flow_map_unclamped(seg_start_x, t - seg_start_t);
            }
            seg_start_t = e.segment_end_time;
            seg_start_x = e.post_jump_position;
        }
        if t >= self.final_time {
            self.final_position
        } else {
            spec.flow_map_unclamped(seg_start_x, t - seg_start_t)
        }
    }

    /// ln weight accumulated on [0, t], telescoped the same way the engine
    /// does it.
    pub fn log_weight_up_to(&self, spec: &ModelSpec, t: f64) -> f64 {
        assert!(t >= 0.0 && t <= self.final_time);
        let mut lw = 0.0;
        let mut seg_start_t = 0.0;
        let mut seg_start_x = self.start;
        for e in &self.events {
            if t < e.segment_end_time {
                let x = spec.flow_map_unclamped(seg_start_x, t - seg_start_t);
                return lw + (x / seg_start_x).ln();
            }
            lw += (e.pre_jump_position / seg_start_x).ln();
            seg_start_t = e.segment_end_time;
            seg_start_x = e.post_jump_position;
        }
        let x = if t >= self.final_time {
            self.final_position
        } else {
            spec.flow_map_unclamped(seg_start_x, t - seg_start_t)
        };
        lw + (x / seg_start_x).ln()
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("stopping specification needs at least one clause")]
    NoStoppingClause,
    #[error("invalid stopping specification: {0}")]
    BadStopping(String),
    #[error("invalid start position {0}; must be positive and finite")]
    BadStart(f64),
    #[error(
        "jump rate {rate:.6e} at x = {x:.6e} exceeds the thinning bound {bound:.6e}; \
         the rate bound scan missed a maximum"
    )]
    RateBoundExceeded { x: f64, rate: f64, bound: f64 },
}

/// Exact-in-law simulation of one path.
///
/// Thinning: candidate jump times arrive at the constant rate `K_bound`; a
/// candidate at position x is accepted with probability K(x)/K_bound. The
/// flow between candidates is deterministic, so level crossings (target,
/// exit) are detected exactly from travel times rather than from discrete
/// sampling of the trajectory.
pub fn simulate_path(
    spec: &ModelSpec,
    x0: f64,
    stopping: &StoppingSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Path, SimError> {
    stopping.validate()?;
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(SimError::BadStart(x0));
    }

    let k_bound = spec.rate_bound(reachable_upper(spec, x0, stopping));

    let mut t = 0.0f64;
    let mut pos = x0;
    let mut lw = 0.0f64;
    let mut events: Vec<JumpEvent> = Vec::new();
    let mut proposals = 0u64;

    let finish = |reason: StopReason, t: f64, pos: f64, lw: f64, events: Vec<JumpEvent>| Path {
        start: x0,
        events,
        final_time: t,
        final_position: pos,
        log_weight: lw,
        stop_reason: reason,
    };

    // degenerate start states: already outside the censoring interval
    if let Some(a) = stopping.lower_barrier {
        if pos < a {
            return Ok(finish(StopReason::ExitedInterval, 0.0, pos, 0.0, events));
        }
    }
    if let Some(b) = stopping.upper_exit {
        if pos > b {
            return Ok(finish(StopReason::ExitedInterval, 0.0, pos, 0.0, events));
        }
    }
    if stopping.horizon == Some(0.0) {
        return Ok(finish(StopReason::Horizon, 0.0, pos, 0.0, events));
    }

    loop {
        // earliest deterministic stop along the current flow segment;
        // a hit must be strictly earlier than every censoring clause, so
        // censors win ties (and the hit candidate requires pos strictly
        // below the target: starting exactly on the target is not a hit)
        let t_hit = match stopping.hit_target {
            Some(y) if pos < y => Some(spec.travel_time_unchecked(pos, y)),
            _ => None,
        };
        let t_exit = match stopping.upper_exit {
            Some(b) if pos <= b => Some(spec.travel_time_unchecked(pos, b)),
            _ => None,
        };
        let t_hor = stopping.horizon.map(|h| h - t);

        let mut stop_dt = f64::INFINITY;
        let mut stop_kind = StopReason::Horizon;
        // priority on exact ties: censors (horizon, exit) beat the hit
        if let Some(dt) = t_hor {
            if dt < stop_dt {
                stop_dt = dt;
                stop_kind = StopReason::Horizon;
            }
        }
        if let Some(dt) = t_exit {
            if dt < stop_dt {
                stop_dt = dt;
                stop_kind = StopReason::ExitedInterval;
            }
        }
        if let Some(dt) = t_hit {
            if dt < stop_dt {
                stop_dt = dt;
                stop_kind = StopReason::HitTarget;
            }
        }

        // next thinning candidate
        let dt_jump = if k_bound > 0.0 {
            let u: f64 = rng.gen(); // [0, 1)
            -(1.0 - u).ln() / k_bound
        } else {
            f64::INFINITY
        };

        if stop_dt <= dt_jump {
            // deterministic stop first
            if !stop_dt.is_finite() {
                // no finite stop and no jumps possible: only reachable with
                // k_bound == 0 and no horizon; treat as a stopping error
                return Err(SimError::BadStopping(
                    "path cannot stop: no horizon, unreachable levels, no jumps".into(),
                ));
            }
            let end_pos = match stop_kind {
                StopReason::HitTarget => stopping.hit_target.unwrap(),
                StopReason::ExitedInterval => stopping.upper_exit.unwrap(),
                _ => spec.flow_map_unclamped(pos, stop_dt),
            };
            lw += (end_pos / pos).ln();
            return Ok(finish(stop_kind, t + stop_dt, end_pos, lw, events));
        }

        // flow to the candidate time (cannot cross any stop level: the
        // candidate is strictly earlier than all of them)
        t += dt_jump;
        let pre = spec.flow_map_unclamped(pos, dt_jump);
        lw += (pre / pos).ln();
        pos = pre;

        let rate_here = spec.total_rate(pre);
        if rate_here > k_bound * (1.0 + 1e-9) {
            return Err(SimError::RateBoundExceeded { x: pre, rate: rate_here, bound: k_bound });
        }
        let accept: f64 = rng.gen();
        if accept * k_bound < rate_here {
            let post = spec.sample_jump(pre, rng);
            events.push(JumpEvent {
                segment_end_time: t,
                pre_jump_position: pre,
                post_jump_position: post,
            });
            pos = post;
            // jump landings can satisfy stopping clauses immediately
            if stopping.hit_target == Some(post) {
                return Ok(finish(StopReason::HitTarget, t, post, lw, events));
            }
            if let Some(a) = stopping.lower_barrier {
                if post < a {
                    return Ok(finish(StopReason::ExitedInterval, t, post, lw, events));
                }
            }
        }

        proposals += 1;
        if proposals >= stopping.max_events {
            return Ok(finish(StopReason::MaxEvents, t, pos, lw, events));
        }
    }
}

/// Upper bound on positions the path can reach, for the thinning rate scan.
/// Flow only moves up and jumps only move down, so a horizon bounds the
/// reachable set by flowing from the start for the whole horizon; an upper
/// exit bounds it by the exit level. With neither (hit-only stopping from
/// above the target) fall back to a wide multiple of the start.
fn reachable_upper(spec: &ModelSpec, x0: f64, stopping: &StoppingSpec) -> f64 {
    if let Some(h) = stopping.horizon {
        return spec.flow_map_unclamped(x0, h);
    }
    if let Some(b) = stopping.upper_exit {
        return x0.max(b);
    }
    if let Some(y) = stopping.hit_target {
        if x0 <= y {
            return y;
        }
    }
    x0 * (20.0f64).exp()
}

/// First-passage functional of one path: did it hit `y` strictly before every
/// censoring clause, and with what hitting time and weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitOutcome {
    pub hit: bool,
    pub h: f64,
    pub log_weight_at_h: f64,
    pub stop_reason: StopReason,
}

/// Simulate from x with target y under the given censors (horizon and
/// optional barriers from `censors`; its `hit_target` field is overridden).
pub fn hitting_functional(
    spec: &ModelSpec,
    x: f64,
    y: f64,
    censors: &StoppingSpec,
    rng: &mut ChaCha8Rng,
) -> Result<HitOutcome, SimError> {
    let stopping = StoppingSpec { hit_target: Some(y), ..*censors };
    let path = simulate_path(spec, x, &stopping, rng)?;
    Ok(HitOutcome {
        hit: path.stop_reason == StopReason::HitTarget,
        h: path.final_time,
        log_weight_at_h: path.log_weight,
        stop_reason: path.stop_reason,
    })
}
