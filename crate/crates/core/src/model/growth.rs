//! Growth (transport) rates c(x) and their integrated flows.

use crate::numeric::interp::Pchip;
use crate::numeric::quad;
use crate::numeric::roots;

/// Mass-growth rate c(x), defined for all x > 0. Tabulated rates freeze the
/// relative rate c(x)/x beyond the table so extrapolation stays linear.
#[derive(Debug, Clone)]
pub enum GrowthRate {
    /// c(x) = a x
    Linear { a: f64 },
    /// c(x) = scale * x^power * num(x) / den(x), polynomial coefficients in
    /// ascending order of degree.
    PowerRational {
        scale: f64,
        power: f64,
        num: Vec<f64>,
        den: Vec<f64>,
    },
    /// Monotone-cubic interpolation of samples; c(x)/x frozen outside.
    Tabulated {
        table: Pchip,
        x_lo: f64,
        x_hi: f64,
        rel_lo: f64,
        rel_hi: f64,
    },
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    let mut v = 0.0;
    for &c in coeffs.iter().rev() {
        v = v * x + c;
    }
    v
}

impl GrowthRate {
    pub fn tabulated(x: Vec<f64>, c: Vec<f64>) -> Result<Self, &'static str> {
        let x_lo = *x.first().ok_or("empty growth table")?;
        let x_hi = *x.last().ok_or("empty growth table")?;
        if x_lo <= 0.0 {
            return Err("growth table abscissae must be positive");
        }
        let c_lo = *c.first().unwrap();
        let c_hi = *c.last().unwrap();
        let table = Pchip::new(x, c)?;
        Ok(GrowthRate::Tabulated {
            table,
            x_lo,
            x_hi,
            rel_lo: c_lo / x_lo,
            rel_hi: c_hi / x_hi,
        })
    }

    /// c(x); positive for valid models (validation enforces this).
    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            GrowthRate::Linear { a } => a * x,
            GrowthRate::PowerRational { scale, power, num, den } => {
                scale * x.powf(*power) * poly(num, x) / poly(den, x)
            }
            GrowthRate::Tabulated { table, x_lo, x_hi, rel_lo, rel_hi } => {
                if x < *x_lo {
                    rel_lo * x
                } else if x > *x_hi {
                    rel_hi * x
                } else {
                    table.eval(x)
                }
            }
        }
    }

    /// c(x)/x, the per-mass growth rate.
    pub fn relative_rate(&self, x: f64) -> f64 {
        match self {
            GrowthRate::Linear { a } => *a,
            GrowthRate::Tabulated { x_lo, rel_lo, .. } if x < *x_lo => *rel_lo,
            GrowthRate::Tabulated { x_hi, rel_hi, .. } if x > *x_hi => *rel_hi,
            _ => self.evaluate(x) / x,
        }
    }
}

/// Integrated flow of dx/dt = c(x): travel times and the flow map, built once
/// per model. Closed forms are used when the rate family admits them; the
/// fallback is a dense travel-time table with per-interval quadrature.
#[derive(Debug, Clone)]
pub enum Flow {
    /// Linear growth: flow is exponential, travel times are log ratios.
    LinearExp { a: f64 },
    /// Antiderivative of 1/c available in closed form:
    /// tau(x) = sum coef * x^expo + log_coef * ln x, strictly increasing.
    PowerSeries {
        terms: Vec<(f64, f64)>, // (coef, expo)
        log_coef: f64,
    },
    /// Numeric travel-time table over an extended log grid; relative rate
    /// frozen beyond the table so the extreme tails integrate in closed form.
    Table(Box<FlowTable>),
}

impl Flow {
    /// Build the flow for a growth rate over a working domain [x_min, x_max].
    pub fn build(growth: &GrowthRate, x_min: f64, x_max: f64) -> Flow {
        match growth {
            GrowthRate::Linear { a } => Flow::LinearExp { a: *a },
            GrowthRate::PowerRational { scale, power, num, den } if num.len() == 1 => {
                // 1/c = sum_j den[j] x^(j - power) / (scale * num[0])
                let inv = 1.0 / (scale * num[0]);
                let mut terms = Vec::new();
                let mut log_coef = 0.0;
                for (j, &dj) in den.iter().enumerate() {
                    if dj == 0.0 {
                        continue;
                    }
                    let beta = j as f64 - power;
                    if (beta + 1.0).abs() < 1e-12 {
                        log_coef += dj * inv;
                    } else {
                        terms.push((dj * inv / (beta + 1.0), beta + 1.0));
                    }
                }
                Flow::PowerSeries { terms, log_coef }
            }
            _ => Flow::Table(Box::new(FlowTable::build(growth, x_min, x_max))),
        }
    }

    /// tau(x): travel time from an arbitrary fixed reference to x.
    fn tau(&self, x: f64) -> f64 {
        match self {
            Flow::LinearExp { a } => x.ln() / a,
            Flow::PowerSeries { terms, log_coef } => {
                let mut v = if *log_coef != 0.0 { log_coef * x.ln() } else { 0.0 };
                for &(coef, expo) in terms {
                    v += coef * x.powf(expo);
                }
                v
            }
            Flow::Table(t) => t.tau(x),
        }
    }

    fn rate(&self, y: f64) -> f64 {
        match self {
            Flow::LinearExp { a } => a * y,
            Flow::PowerSeries { terms, log_coef } => {
                let mut dtau = log_coef / y;
                for &(coef, expo) in terms {
                    dtau += coef * expo * y.powf(expo - 1.0);
                }
                1.0 / dtau
            }
            Flow::Table(t) => t.growth.evaluate(y),
        }
    }

    /// Travel time from x up to y; requires 0 < x <= y.
    pub fn travel_time(&self, x: f64, y: f64) -> f64 {
        debug_assert!(x > 0.0 && y >= x);
        match self {
            Flow::LinearExp { a } => (y / x).ln() / a,
            _ => self.tau(y) - self.tau(x),
        }
    }

    /// Position after flowing for time t >= 0 from x (t < 0 flows backward).
    pub fn advance(&self, x: f64, t: f64) -> f64 {
        if t == 0.0 {
            return x;
        }
        match self {
            Flow::LinearExp { a } => x * (a * t).exp(),
            Flow::PowerSeries { .. } => {
                let target = self.tau(x) + t;
                // bracket the inverse by doubling away from x
                let (mut lo, mut hi) = (x, x);
                if t > 0.0 {
                    hi *= 2.0;
                    while self.tau(hi) < target {
                        hi *= 2.0;
                        if hi > 1e300 {
                            return f64::INFINITY;
                        }
                    }
                } else {
                    lo *= 0.5;
                    while self.tau(lo) > target {
                        lo *= 0.5;
                        if lo < 1e-300 {
                            return 0.0;
                        }
                    }
                }
                roots::newton_bracketed(
                    &|y: f64| (self.tau(y) - target, 1.0 / self.rate(y)),
                    lo,
                    hi,
                    0.5 * (lo + hi),
                    1e-14,
                )
            }
            Flow::Table(tb) => tb.advance(x, t),
        }
    }
}

/// Travel-time table: prefix sums of integral(1/c) over a dense log grid, with
/// partial segments integrated against the actual rate so that prefix+partial
/// telescoping keeps travel-time additivity at roundoff level.
#[derive(Debug, Clone)]
pub struct FlowTable {
    growth: GrowthRate,
    nodes: Vec<f64>,
    tau: Vec<f64>,
    rel_lo: f64,
    rel_hi: f64,
}

impl FlowTable {
    fn build(growth: &GrowthRate, x_min: f64, x_max: f64) -> FlowTable {
        // extend far beyond the working domain; relative rate is frozen past
        // the ends so the extreme tails integrate analytically
        let lo = x_min * (-15.0f64).exp();
        let hi = x_max * (15.0f64).exp();
        let n = 4097;
        let nodes = crate::numeric::log_grid(lo, hi, n);
        let mut tau = vec![0.0; n];
        let mut acc = 0.0;
        for i in 0..n - 1 {
            let (v, _) = quad::kronrod15(&|z: f64| 1.0 / growth.evaluate(z), nodes[i], nodes[i + 1]);
            acc += v;
            tau[i + 1] = acc;
        }
        FlowTable {
            growth: growth.clone(),
            nodes,
            tau,
            rel_lo: growth.relative_rate(lo * 0.5),
            rel_hi: growth.relative_rate(hi * 2.0),
        }
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return 0;
        }
        if x >= self.nodes[n - 2] {
            return n - 2;
        }
        self.nodes.partition_point(|&v| v <= x) - 1
    }

    fn tau(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x < self.nodes[0] {
            return self.tau[0] - (self.nodes[0] / x).ln() / self.rel_lo;
        }
        if x > self.nodes[n - 1] {
            return self.tau[n - 1] + (x / self.nodes[n - 1]).ln() / self.rel_hi;
        }
        let i = self.segment(x);
        // partial segment against the actual rate: evaluating at a grid node
        // reproduces the prefix entry bit-for-bit (same panel computation)
        let (v, _) = quad::kronrod15(&|z: f64| 1.0 / self.growth.evaluate(z), self.nodes[i], x);
        self.tau[i] + v
    }

    fn advance(&self, x: f64, t: f64) -> f64 {
        let target = self.tau(x) + t;
        let n = self.nodes.len();
        if target <= self.tau[0] {
            return self.nodes[0] * ((target - self.tau[0]) * self.rel_lo).exp();
        }
        if target >= self.tau[n - 1] {
            return self.nodes[n - 1] * ((target - self.tau[n - 1]) * self.rel_hi).exp();
        }
        let i = (self.tau.partition_point(|&v| v <= target) - 1).min(n - 2);
        roots::newton_bracketed(
            &|y: f64| (self.tau(y) - target, 1.0 / self.growth.evaluate(y)),
            self.nodes[i],
            self.nodes[i + 1],
            0.5 * (self.nodes[i] + self.nodes[i + 1]),
            1e-14,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_flow_is_exponential() {
        let g = GrowthRate::Linear { a: 0.5 };
        let f = Flow::build(&g, 0.05, 20.0);
        assert!((f.advance(1.0, 2.0) - std::f64::consts::E).abs() < 1e-14);
        assert!((f.travel_time(1.0, std::f64::consts::E) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hump_travel_time_closed_form() {
        // c(x) = x^2/(1+x^2): antiderivative of 1/c is x - 1/x
        let g = GrowthRate::PowerRational {
            scale: 1.0,
            power: 2.0,
            num: vec![1.0],
            den: vec![1.0, 0.0, 1.0],
        };
        let f = Flow::build(&g, 0.05, 20.0);
        for (x, y) in [(0.1, 0.4), (0.5, 2.0), (1.0, 19.0)] {
            let truth = (y - 1.0 / y) - (x - 1.0 / x);
            assert!(
                (f.travel_time(x, y) - truth).abs() < 1e-12 * (1.0 + truth.abs()),
                "travel {x}->{y}"
            );
        }
    }

    #[test]
    fn hump_flow_roundtrip_and_stability() {
        let g = GrowthRate::PowerRational {
            scale: 1.0,
            power: 2.0,
            num: vec![1.0],
            den: vec![1.0, 0.0, 1.0],
        };
        let f = Flow::build(&g, 0.05, 20.0);
        // far below the domain the inverse must stay positive and finite
        let y = f.advance(1e-9, 0.5);
        assert!(y > 1e-9 && y.is_finite());
        for x in [1e-6, 0.05, 0.3, 1.0, 7.0] {
            for t in [1e-3, 0.7, 5.0] {
                let z = f.advance(x, t);
                let back = f.travel_time(x, z);
                assert!((back - t).abs() < 1e-10 * (1.0 + t), "x={x} t={t} got {back}");
            }
        }
    }

    #[test]
    fn tabulated_flow_matches_linear_reference() {
        // tabulate c(x) = 0.7 x and compare against the closed form
        let xs: Vec<f64> = crate::numeric::log_grid(0.01, 100.0, 64);
        let cs: Vec<f64> = xs.iter().map(|v| 0.7 * v).collect();
        let g = GrowthRate::tabulated(xs, cs).unwrap();
        let f = Flow::build(&g, 0.05, 20.0);
        for (x, t) in [(0.1, 1.0), (1.0, 3.0), (5.0, 0.25)] {
            let truth = x * (0.7f64 * t).exp();
            let got = f.advance(x, t);
            assert!(
                ((got - truth) / truth).abs() < 1e-9,
                "x={x} t={t} got={got} want={truth}"
            );
            let back = f.travel_time(x, got);
            assert!((back - t).abs() < 1e-9 * (1.0 + t));
        }
    }

    #[test]
    fn travel_additivity_table_flow() {
        // genuinely non-closed-form rate: c = x (2 + sin(ln x)) via table
        let xs: Vec<f64> = crate::numeric::log_grid(1e-3, 1e3, 400);
        let cs: Vec<f64> = xs.iter().map(|v| v * (2.0 + (v.ln()).sin())).collect();
        let g = GrowthRate::tabulated(xs, cs).unwrap();
        let f = Flow::build(&g, 0.05, 20.0);
        let (x, y, z) = (0.2, 1.7, 14.0);
        let lhs = f.travel_time(x, y) + f.travel_time(y, z);
        let rhs = f.travel_time(x, z);
        assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()), "lhs={lhs} rhs={rhs}");
    }

    #[test]
    fn advance_zero_time_is_identity() {
        let g = GrowthRate::PowerRational {
            scale: 1.0,
            power: 2.0,
            num: vec![1.0],
            den: vec![1.0, 0.0, 1.0],
        };
        let f = Flow::build(&g, 0.05, 20.0);
        assert_eq!(f.advance(1.2345, 0.0), 1.2345);
    }
}
