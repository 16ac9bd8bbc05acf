//! Structural validation of a built model.

use serde::Serialize;

use super::{FragmentationKernel, ModelSpec};
use crate::numeric::{log_grid, quad};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Failing makes the model unusable.
    Error,
    /// Recorded and reported, but does not invalidate the model.
    Advisory,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationItem {
    pub name: String,
    pub severity: Severity,
    pub passed: bool,
    /// The number the check turned on (residual, infimum, ...).
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub items: Vec<ValidationItem>,
}

impl ValidationReport {
    /// True when every error-severity check passed (advisories don't count).
    pub fn is_valid(&self) -> bool {
        self.items
            .iter()
            .all(|i| i.passed || i.severity == Severity::Advisory)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

const CONSERVATION_TOL: f64 = 1e-9;

/// Check positivity and boundedness of the rates, mass conservation of the
/// kernel, and (advisory) irreducibility heuristics. The grid is 512 log
/// points across the working domain.
pub fn validate_model(spec: &ModelSpec) -> ValidationReport {
    let (x_min, x_max) = spec.working_domain();
    let grid = log_grid(x_min, x_max, 512);
    let mut items = Vec::new();

    // growth rate strictly positive
    let (worst_c, worst_at) = grid
        .iter()
        .map(|&x| (spec.growth_rate(x), x))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    items.push(ValidationItem {
        name: "growth_positive".into(),
        severity: Severity::Error,
        passed: worst_c > 0.0 && worst_c.is_finite(),
        value: worst_c,
        detail: format!("min c(x) = {worst_c:.6e} at x = {worst_at:.6e}"),
    });

    // relative rate bounded
    let sup_rel = spec.sup_relative_rate();
    items.push(ValidationItem {
        name: "relative_rate_bounded".into(),
        severity: Severity::Error,
        passed: sup_rel.is_finite() && sup_rel > 0.0,
        value: sup_rel,
        detail: format!("sup c(x)/x = {sup_rel:.6e} over the validation grid"),
    });

    // total rate bounded and nonnegative
    let (k_min, k_max) = grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &x| {
        let k = spec.total_rate(x);
        (acc.0.min(k), acc.1.max(k))
    });
    items.push(ValidationItem {
        name: "total_rate_bounded".into(),
        severity: Severity::Error,
        passed: k_min >= 0.0 && k_max.is_finite(),
        value: k_max,
        detail: format!("K(x) in [{k_min:.6e}, {k_max:.6e}] over the validation grid"),
    });

    // mass conservation: integral (y/x) k(x,y) dy == K(x)
    let residual = conservation_residual(spec);
    items.push(ValidationItem {
        name: "mass_conservation".into(),
        severity: Severity::Error,
        passed: residual <= CONSERVATION_TOL,
        value: residual,
        detail: format!(
            "max relative residual of integral((y/x) k(x,y) dy) - K(x): {residual:.3e} (tolerance {CONSERVATION_TOL:.0e})"
        ),
    });

    // fragment density nonnegative (self-similar only; general kernels were
    // already sampled nonnegatively in the conservation quadrature)
    if let FragmentationKernel::SelfSimilar { density, .. } = spec.kernel() {
        let mut min_p = f64::INFINITY;
        for i in 1..=512 {
            min_p = min_p.min(density.eval(i as f64 / 512.0));
        }
        items.push(ValidationItem {
            name: "fragment_density_nonnegative".into(),
            severity: Severity::Error,
            passed: min_p >= 0.0,
            value: min_p,
            detail: format!("min p(u) over a 512-point scan: {min_p:.6e}"),
        });
    }

    // irreducibility heuristic: growth moves mass up everywhere, and the jump
    // density should put mass across most of (0, 1) so downward moves can
    // reach below any level
    let coverage = jump_support_coverage(spec);
    items.push(ValidationItem {
        name: "irreducibility".into(),
        severity: Severity::Advisory,
        passed: coverage >= 0.5,
        value: coverage,
        detail: format!(
            "fraction of (0,1) fragment sizes with positive density: {coverage:.3} (advisory; sampled, not a proof)"
        ),
    });

    ValidationReport { items }
}

fn conservation_residual(spec: &ModelSpec) -> f64 {
    let (x_min, x_max) = spec.working_domain();
    match spec.kernel() {
        FragmentationKernel::SelfSimilar { density, .. } => {
            // conservation reduces to the density normalization, scaled by K
            let q = if let crate::model::FragmentDensity::Tabulated { .. } = density {
                quad::integrate(&|u| u * density.eval(u), 0.0, 1.0, 1e-13, 1e-11).value
            } else {
                density.mass_integral()
            };
            (q - 1.0).abs()
        }
        FragmentationKernel::General { .. } => {
            // compare quadrature of the mass-weighted kernel against K at
            // fresh points (off the derivation grid when K was derived)
            let pts = log_grid(x_min * 1.0371, x_max * 0.9643, 32);
            let mut worst = 0.0f64;
            for &x in &pts {
                let q = quad::integrate(
                    &|u: f64| x * u * spec.kernel().kernel_value(x, x * u),
                    0.0,
                    1.0,
                    1e-13,
                    1e-11,
                );
                let k = spec.total_rate(x);
                worst = worst.max((q.value - k).abs() / (1.0 + k.abs()));
            }
            worst
        }
    }
}

fn jump_support_coverage(spec: &ModelSpec) -> f64 {
    let (x_min, x_max) = spec.working_domain();
    let x_ref = (x_min * x_max).sqrt();
    let mut positive = 0usize;
    let n = 129;
    for i in 1..=n {
        let u = i as f64 / (n + 1) as f64;
        if spec.kernel().target_density(x_ref, x_ref * u) > 0.0 {
            positive += 1;
        }
    }
    positive as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FragmentDensity, GrowthRate, TotalRate};

    #[test]
    fn bundled_models_validate() {
        for m in [
            ModelSpec::linear_calibration(),
            ModelSpec::hump(),
            ModelSpec::transient_counterexample(),
        ] {
            let r = validate_model(&m);
            assert!(r.is_valid(), "{:?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn misnormalized_density_fails_conservation() {
        // p(u) = 3 integrates u p to 3/2: conservation violated
        let kernel = FragmentationKernel::self_similar(
            TotalRate::Constant { value: 1.0 },
            FragmentDensity::Polynomial { coeffs: vec![3.0] },
        );
        let m = ModelSpec::new(GrowthRate::Linear { a: 0.5 }, kernel, 0.05, 20.0).unwrap();
        let r = validate_model(&m);
        assert!(!r.is_valid());
        let item = r.items.iter().find(|i| i.name == "mass_conservation").unwrap();
        assert!(!item.passed);
        assert!((item.value - 0.5).abs() < 1e-9, "residual {}", item.value);
    }

    #[test]
    fn supplied_total_rate_mismatch_detected() {
        // k(x,y) = 2/x has K = 1, but we claim K = 2
        let kernel = FragmentationKernel::general_supplied(
            crate::model::GeneralKernel::UniformMassFraction { coef: 2.0 },
            TotalRate::Constant { value: 2.0 },
        );
        let m = ModelSpec::new(GrowthRate::Linear { a: 0.5 }, kernel, 0.05, 20.0).unwrap();
        let r = validate_model(&m);
        let item = r.items.iter().find(|i| i.name == "mass_conservation").unwrap();
        assert!(!item.passed);
        assert!(item.value > 0.3);
    }

    #[test]
    fn negative_growth_table_flagged() {
        let xs = crate::numeric::log_grid(0.01, 100.0, 16);
        let cs: Vec<f64> = xs.iter().map(|&x| x - 1.0).collect(); // negative below 1
        let g = GrowthRate::tabulated(xs, cs).unwrap();
        let kernel = FragmentationKernel::self_similar(
            TotalRate::Constant { value: 1.0 },
            FragmentDensity::PowerLaw { exponent: 0.0 },
        );
        let m = ModelSpec::new(g, kernel, 0.05, 20.0).unwrap();
        let r = validate_model(&m);
        assert!(!r.is_valid());
        assert!(r.failures().any(|i| i.name == "growth_positive"));
    }

    #[test]
    fn narrow_support_density_is_advisory_only() {
        // density concentrated near u = 1: irreducibility advisory warns but
        // the model remains valid
        let us: Vec<f64> = (0..64).map(|i| 0.9 + 0.1 * i as f64 / 63.0).collect();
        let raw: Vec<f64> = us.iter().map(|_| 1.0).collect();
        // normalize integral u p(u) over [0.9, 1.0]: mass = 0.095
        let ps: Vec<f64> = raw.iter().map(|v| v / 0.095).collect();
        let kernel = FragmentationKernel::self_similar(
            TotalRate::Constant { value: 1.0 },
            FragmentDensity::Tabulated {
                table: crate::numeric::interp::Pchip::new(us, ps).unwrap(),
            },
        );
        let m = ModelSpec::new(GrowthRate::Linear { a: 0.5 }, kernel, 0.05, 20.0).unwrap();
        let r = validate_model(&m);
        let adv = r.items.iter().find(|i| i.name == "irreducibility").unwrap();
        assert!(!adv.passed);
        assert_eq!(adv.severity, Severity::Advisory);
        assert!(r.is_valid(), "advisory must not invalidate");
    }
}
