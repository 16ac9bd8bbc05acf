//! Fragmentation kernels k(x, y): total rates, mass-weighted forms, and
//! sampling of the jump target density.

use std::sync::Arc;

use rand::Rng;

use crate::numeric::interp::Pchip;
use crate::numeric::quad;

/// Total fragmentation rate K(x); values frozen beyond tabulated ranges.
#[derive(Debug, Clone)]
pub enum TotalRate {
    Constant { value: f64 },
    PowerRational {
        scale: f64,
        power: f64,
        num: Vec<f64>,
        den: Vec<f64>,
    },
    Tabulated {
        table: Pchip,
        x_lo: f64,
        x_hi: f64,
        k_lo: f64,
        k_hi: f64,
    },
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    let mut v = 0.0;
    for &c in coeffs.iter().rev() {
        v = v * x + c;
    }
    v
}

impl TotalRate {
    pub fn tabulated(x: Vec<f64>, k: Vec<f64>) -> Result<Self, &'static str> {
        let x_lo = *x.first().ok_or("empty rate table")?;
        let x_hi = *x.last().ok_or("empty rate table")?;
        let k_lo = *k.first().unwrap();
        let k_hi = *k.last().unwrap();
        let table = Pchip::new(x, k)?;
        Ok(TotalRate::Tabulated { table, x_lo, x_hi, k_lo, k_hi })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            TotalRate::Constant { value } => *value,
            TotalRate::PowerRational { scale, power, num, den } => {
                scale * x.powf(*power) * poly(num, x) / poly(den, x)
            }
            TotalRate::Tabulated { table, x_lo, x_hi, k_lo, k_hi } => {
                if x < *x_lo {
                    *k_lo
                } else if x > *x_hi {
                    *k_hi
                } else {
                    table.eval(x)
                }
            }
        }
    }
}

/// Fragment-size density p(u) on (0, 1] for self-similar kernels; the
/// mass-conservation normalization is integral(u p(u) du) = 1.
#[derive(Debug, Clone)]
pub enum FragmentDensity {
    /// p(u) = (exponent + 2) u^exponent, normalized by construction.
    PowerLaw { exponent: f64 },
    /// p(u) = sum coeffs[j] u^j.
    Polynomial { coeffs: Vec<f64> },
    /// Monotone-cubic interpolation of samples on (0, 1].
    Tabulated { table: Pchip },
}

impl FragmentDensity {
    pub fn eval(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            FragmentDensity::PowerLaw { exponent } => (exponent + 2.0) * u.powf(*exponent),
            FragmentDensity::Polynomial { coeffs } => poly(coeffs, u).max(0.0),
            FragmentDensity::Tabulated { table } => {
                // outside the tabulated support the density is zero, not an
                // extrapolation of the boundary cubic
                if u < table.x_min() || u > table.x_max() {
                    0.0
                } else {
                    table.eval(u).max(0.0)
                }
            }
        }
    }

    /// integral of u p(u) over (0, 1]; 1 for valid densities.
    pub fn mass_integral(&self) -> f64 {
        match self {
            FragmentDensity::PowerLaw { .. } => 1.0,
            FragmentDensity::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(j, a)| a / (j as f64 + 2.0))
                .sum(),
            FragmentDensity::Tabulated { .. } => {
                quad::integrate(&|u| u * self.eval(u), 0.0, 1.0, 1e-12, 1e-10).value
            }
        }
    }

    /// Upper envelope for u p(u) on (0, 1] (rejection sampling bound).
    fn envelope(&self) -> f64 {
        match self {
            FragmentDensity::PowerLaw { exponent } => {
                // u p(u) = (g+2) u^(g+1): monotone for g > -1, sup at u=1
                if *exponent >= -1.0 {
                    exponent + 2.0
                } else {
                    f64::INFINITY
                }
            }
            _ => {
                let mut m = 0.0f64;
                for i in 0..=4096 {
                    let u = i as f64 / 4096.0;
                    m = m.max(u * self.eval(u));
                }
                m * 1.05
            }
        }
    }

    /// Sample from the normalized density u p(u) du on (0, 1].
    fn sample<R: Rng>(&self, envelope: f64, rng: &mut R) -> f64 {
        match self {
            FragmentDensity::PowerLaw { exponent } => {
                // inverse CDF of u^(exponent+2)
                let u01: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
                u01.powf(1.0 / (exponent + 2.0))
            }
            _ => loop {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let v: f64 = rng.gen::<f64>() * envelope;
                let g = u * self.eval(u);
                debug_assert!(g <= envelope * (1.0 + 1e-12), "rejection envelope violated");
                if v <= g {
                    return u;
                }
            },
        }
    }
}

/// General (non-self-similar) kernel forms, k(x, y) for 0 < y <= x.
#[derive(Clone)]
pub enum GeneralKernel {
    /// k(x, y) = coef / x: every mass fraction equally likely per unit mass.
    UniformMassFraction { coef: f64 },
    /// Arbitrary code-defined kernel; `name` feeds the model hash.
    Custom {
        name: String,
        f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for GeneralKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneralKernel::UniformMassFraction { coef } => {
                write!(f, "UniformMassFraction {{ coef: {coef} }}")
            }
            GeneralKernel::Custom { name, .. } => write!(f, "Custom {{ name: {name} }}"),
        }
    }
}

impl GeneralKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        if y <= 0.0 || y > x {
            return 0.0;
        }
        match self {
            GeneralKernel::UniformMassFraction { coef } => coef / x,
            GeneralKernel::Custom { f, .. } => f(x, y),
        }
    }
}

/// Fragmentation kernel of a model.
#[derive(Debug, Clone)]
pub enum FragmentationKernel {
    /// k(x, y) = K(x) p(y/x) / x.
    SelfSimilar {
        total: TotalRate,
        density: FragmentDensity,
        envelope: f64,
    },
    General {
        kernel: GeneralKernel,
        total: TotalRate,
        /// true when `total` was derived by quadrature rather than supplied
        derived: bool,
    },
}

impl FragmentationKernel {
    pub fn self_similar(total: TotalRate, density: FragmentDensity) -> Self {
        let envelope = density.envelope();
        FragmentationKernel::SelfSimilar { total, density, envelope }
    }

    /// General kernel with the total rate computed by quadrature on a 512-node
    /// log grid spanning the working domain (extended one decade each way).
    pub fn general_derived(kernel: GeneralKernel, x_min: f64, x_max: f64) -> Self {
        let nodes = crate::numeric::log_grid(x_min * 0.1, x_max * 10.0, 512);
        let ks: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                quad::integrate(&|u: f64| x * u * kernel.eval(x, x * u), 0.0, 1.0, 1e-12, 1e-10)
                    .value
            })
            .collect();
        let k_lo = ks[0];
        let k_hi = *ks.last().unwrap();
        let table = Pchip::new(nodes.clone(), ks).expect("log grid is strictly increasing");
        FragmentationKernel::General {
            kernel,
            total: TotalRate::Tabulated {
                table,
                x_lo: nodes[0],
                x_hi: *nodes.last().unwrap(),
                k_lo,
                k_hi,
            },
            derived: true,
        }
    }

    pub fn general_supplied(kernel: GeneralKernel, total: TotalRate) -> Self {
        FragmentationKernel::General { kernel, total, derived: false }
    }

    /// K(x): total fragmentation rate at x.
    pub fn total_rate(&self, x: f64) -> f64 {
        match self {
            FragmentationKernel::SelfSimilar { total, .. } => total.evaluate(x),
            FragmentationKernel::General { total, .. } => total.evaluate(x),
        }
    }

    /// k(x, y) for 0 < y <= x; zero outside.
    pub fn kernel_value(&self, x: f64, y: f64) -> f64 {
        if y <= 0.0 || y > x || x <= 0.0 {
            return 0.0;
        }
        match self {
            FragmentationKernel::SelfSimilar { total, density, .. } => {
                total.evaluate(x) * density.eval(y / x) / x
            }
            FragmentationKernel::General { kernel, .. } => kernel.eval(x, y),
        }
    }

    /// Mass-weighted kernel (y/x) k(x, y): the jump rate density of the
    /// instrumental process.
    pub fn mass_weighted(&self, x: f64, y: f64) -> f64 {
        (y / x) * self.kernel_value(x, y)
    }

    /// Normalized jump target density at y given a jump from x
    /// (mass-weighted kernel over total rate).
    pub fn target_density(&self, x: f64, y: f64) -> f64 {
        let k = self.total_rate(x);
        if k <= 0.0 {
            return 0.0;
        }
        self.mass_weighted(x, y) / k
    }

    /// Draw the post-jump position given a jump at x.
    pub fn sample_jump<R: Rng>(&self, x: f64, rng: &mut R) -> f64 {
        match self {
            FragmentationKernel::SelfSimilar { density, envelope, .. } => {
                x * density.sample(*envelope, rng)
            }
            FragmentationKernel::General { .. } => {
                // generic rejection in u = y/x against a scanned envelope of
                // g(u) = x u k(x, xu) (slow path; self-similar kernels take
                // the closed form above)
                let g = |u: f64| x * u * self.kernel_value(x, x * u);
                let mut m = 0.0f64;
                for i in 0..=128 {
                    m = m.max(g(i as f64 / 128.0));
                }
                let m = m * 1.1;
                loop {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    let v: f64 = rng.gen::<f64>() * m;
                    let gv = g(u);
                    debug_assert!(gv <= m * (1.0 + 1e-9), "rejection envelope violated");
                    if v <= gv {
                        return x * u;
                    }
                }
            }
        }
    }

    /// Thinning bound: sup of K over all positions reachable below `x_hi`.
    /// Exact for constant rates; scanned with a small safety factor otherwise.
    pub fn rate_bound(&self, x_hi: f64) -> f64 {
        let total = match self {
            FragmentationKernel::SelfSimilar { total, .. } => total,
            FragmentationKernel::General { total, .. } => total,
        };
        match total {
            TotalRate::Constant { value } => *value,
            _ => {
                let grid = crate::numeric::log_grid(x_hi * (-40.0f64).exp(), x_hi, 2048);
                let m = grid
                    .iter()
                    .map(|&x| total.evaluate(x))
                    .fold(0.0f64, f64::max);
                m * 1.001
            }
        }
    }

    pub fn is_derived_total(&self) -> bool {
        matches!(self, FragmentationKernel::General { derived: true, .. })
    }
}
