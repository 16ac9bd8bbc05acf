use super::solve::MalthusError;
use crate::fk::{estimate_semigroup, ExcursionPool, MCEstimate, TestFunction};
use crate::model::ModelSpec;
use crate::pdmp::{RngStream, StoppingSpec};
use serde::Serialize;

/// Budgets for the profile tables.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileConfig {
    pub paths_per_node: u64,
    pub horizon: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { paths_per_node: 100_000, horizon: 200.0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    pub y: f64,
    /// y times the discounted weight of reaching the reference point x0.
    pub h: f64,
    pub h_std_error: f64,
    /// Stationary profile density 1 / (h(y) c(y) |dL_self/dq|) at y.
    pub nu_density: f64,
    /// Either estimate at this node was too noisy; the node is kept in the
    /// table but excluded from the normalization integral.
    pub unreliable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileResult {
    pub x0: f64,
    pub lambda: f64,
    pub points: Vec<ProfilePoint>,
    /// Trapezoidal integral of h * nu_density over the reliable part of the
    /// grid. The scaling of the density is such that this should be close
    /// to 1; the shortfall measures grid truncation plus Monte Carlo noise.
    pub normalization: f64,
    pub seed: u64,
}

/// Tabulate the scale function h and the profile density on `y_grid`.
///
/// h(y) = y * L(y -> x0 at lambda); the density at y is
/// 1 / (h(y) c(y) |L_self'(lambda)|) with L_self the return functional at y.
/// Nodes where either estimate is unreliable are flagged and left out of the
/// normalization integral.
pub fn compute_profile(
    spec: &ModelSpec,
    lambda_hat: f64,
    x0: f64,
    y_grid: &[f64],
    cfg: &ProfileConfig,
    streams: &RngStream,
) -> Result<ProfileResult, MalthusError> {
    let dom = spec.working_domain();
    if !(x0 > dom.0 && x0 < dom.1) {
        return Err(MalthusError::Invalid(format!(
            "reference point {x0} outside the working domain"
        )));
    }
    if y_grid.len() < 2 || y_grid.windows(2).any(|w| w[0] >= w[1]) || y_grid[0] <= 0.0 {
        return Err(MalthusError::Invalid(
            "y_grid must be at least 2 strictly increasing positive points".into(),
        ));
    }
    if cfg.paths_per_node == 0 || !(cfg.horizon > 0.0) {
        return Err(MalthusError::Invalid("profile needs paths and a positive horizon".into()));
    }
    let censors = StoppingSpec::horizon(cfg.horizon);
    let mut points = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let reach = ExcursionPool::generate(spec, y, x0, &censors, cfg.paths_per_node, *streams)?;
        let l_reach = reach.laplace(lambda_hat);
        let ret = ExcursionPool::generate(
            spec,
            y,
            y,
            &censors,
            cfg.paths_per_node,
            RngStream::new(streams.master_seed.wrapping_add(0x51F1_5EED)),
        )?;
        let lp = ret.laplace_derivative(lambda_hat);
        let h = y * l_reach.mean;
        let unreliable = l_reach.is_unreliable() || lp.is_unreliable() || lp.mean == 0.0 || h <= 0.0;
        let nu_density = if unreliable {
            0.0
        } else {
            1.0 / (h * spec.growth_rate(y) * lp.mean.abs())
        };
        points.push(ProfilePoint {
            y,
            h,
            h_std_error: y * l_reach.std_error,
            nu_density,
            unreliable,
        });
    }
    // trapezoid of h * density over segments whose two ends are reliable
    let mut normalization = 0.0;
    for w in points.windows(2) {
        if w[0].unreliable || w[1].unreliable {
            continue;
        }
        let g0 = w[0].h * w[0].nu_density;
        let g1 = w[1].h * w[1].nu_density;
        normalization += 0.5 * (g0 + g1) * (w[1].y - w[0].y);
    }
    Ok(ProfileResult {
        x0,
        lambda: lambda_hat,
        points,
        normalization,
        seed: streams.master_seed,
    })
}

/// Least-squares growth rate of t -> ln(semigroup estimate at t).
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub rho_hat: f64,
    pub r_squared: f64,
    /// The fit window: the upper half of the time grid.
    pub window: (f64, f64),
    /// One semigroup estimate per grid time, for inspection.
    pub estimates: Vec<(f64, MCEstimate)>,
}

/// Estimate the semigroup at every time on the grid (common random numbers
/// across times) and fit the log of the upper half against time.
pub fn fit_growth_rate(
    spec: &ModelSpec,
    x: f64,
    f: &TestFunction,
    t_grid: &[f64],
    n_paths: u64,
    streams: &RngStream,
) -> Result<GrowthFit, MalthusError> {
    if t_grid.len() < 4 || t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid[0] < 0.0 {
        return Err(MalthusError::Invalid(
            "t_grid must be at least 4 strictly increasing nonnegative times".into(),
        ));
    }
    let estimates: Vec<(f64, MCEstimate)> = t_grid
        .iter()
        .map(|&t| Ok((t, estimate_semigroup(spec, x, f, t, n_paths, streams)?)))
        .collect::<Result<_, MalthusError>>()?;
    let fit = &estimates[t_grid.len() / 2..];
    for (t, e) in fit {
        if e.mean <= 0.0 {
            return Err(MalthusError::Invalid(format!(
                "semigroup estimate at t = {t} is not positive ({}); \
                 widen the test function, shorten the grid, or add paths",
                e.mean
            )));
        }
    }
    let n = fit.len() as f64;
    let mean_t = fit.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_v = fit.iter().map(|(_, e)| e.mean.ln()).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (t, e) in fit {
        let dt = t - mean_t;
        let dv = e.mean.ln() - mean_v;
        sxx += dt * dt;
        sxy += dt * dv;
        syy += dv * dv;
    }
    let rho_hat = sxy / sxx;
    let ss_res = syy - sxy * sxy / sxx;
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(GrowthFit {
        rho_hat,
        r_squared,
        window: (fit[0].0, fit[fit.len() - 1].0),
        estimates,
    })
}
