//! Config schema (serde) and construction of `ModelSpec` from config files.
//!
//! Unknown keys anywhere in the document are hard errors: a typo must never
//! silently fall back to a default.

use serde::{Deserialize, Serialize};

use super::{
    kernel::{FragmentDensity, FragmentationKernel, GeneralKernel, TotalRate},
    GrowthRate, ModelError, ModelSpec,
};

/// Top-level experiment document: the model plus run defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub growth: GrowthConfig,
    pub kernel: KernelConfig,
    pub domain: DomainConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub x_min: f64,
    pub x_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthConfig {
    Linear(LinearGrowthParams),
    PowerRational(PowerRationalParams),
    Tabulated(TabulatedParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrowthParams {
    pub a: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerRationalParams {
    pub scale: f64,
    pub power: f64,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedParams {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    SelfSimilar(SelfSimilarParams),
    General(GeneralKernelParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfSimilarParams {
    pub total_rate: TotalRateConfig,
    pub fragment_density: DensityConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum TotalRateConfig {
    Constant { value: f64 },
    PowerRational { scale: f64, power: f64, num: Vec<f64>, den: Vec<f64> },
    Tabulated { x: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    PowerLaw { exponent: f64 },
    Polynomial { coeffs: Vec<f64> },
    Tabulated { u: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralKernelParams {
    pub kind: GeneralKindConfig,
    /// Total rate K; omit to derive it by quadrature of the kernel.
    #[serde(default)]
    pub total_rate: Option<TotalRateConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneralKindConfig {
    /// k(x, y) = coef / x
    UniformMassFraction { coef: f64 },
}

/// Parse a full experiment document and build the model.
pub fn from_json(text: &str) -> Result<ModelSpec, ModelError> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
    build_model(&cfg.model)
}

pub fn parse_experiment(text: &str) -> Result<ExperimentConfig, ModelError> {
    serde_json::from_str(text).map_err(|e| ModelError::Config(e.to_string()))
}

pub fn build_model(cfg: &ModelConfig) -> Result<ModelSpec, ModelError> {
    let growth = match &cfg.growth {
        GrowthConfig::Linear(p) => GrowthRate::Linear { a: p.a },
        GrowthConfig::PowerRational(p) => GrowthRate::PowerRational {
            scale: p.scale,
            power: p.power,
            num: p.num.clone(),
            den: p.den.clone(),
        },
        GrowthConfig::Tabulated(p) => GrowthRate::tabulated(p.x.clone(), p.values.clone())
            .map_err(|e| ModelError::Config(format!("growth table: {e}")))?,
    };
    let total = |t: &TotalRateConfig| -> Result<TotalRate, ModelError> {
        Ok(match t {
            TotalRateConfig::Constant { value } => TotalRate::Constant { value: *value },
            TotalRateConfig::PowerRational { scale, power, num, den } => TotalRate::PowerRational {
                scale: *scale,
                power: *power,
                num: num.clone(),
                den: den.clone(),
            },
            TotalRateConfig::Tabulated { x, values } => {
                TotalRate::tabulated(x.clone(), values.clone())
                    .map_err(|e| ModelError::Config(format!("total rate table: {e}")))?
            }
        })
    };
    let kernel = match &cfg.kernel {
        KernelConfig::SelfSimilar(p) => {
            let density = match &p.fragment_density {
                DensityConfig::PowerLaw { exponent } => {
                    if *exponent <= -2.0 {
                        return Err(ModelError::Config(
                            "power-law fragment density needs exponent > -2".into(),
                        ));
                    }
                    FragmentDensity::PowerLaw { exponent: *exponent }
                }
                DensityConfig::Polynomial { coeffs } => {
                    FragmentDensity::Polynomial { coeffs: coeffs.clone() }
                }
                DensityConfig::Tabulated { u, values } => FragmentDensity::Tabulated {
                    table: crate::numeric::interp::Pchip::new(u.clone(), values.clone())
                        .map_err(|e| ModelError::Config(format!("density table: {e}")))?,
                },
            };
            FragmentationKernel::self_similar(total(&p.total_rate)?, density)
        }
        KernelConfig::General(p) => {
            let kind = match &p.kind {
                GeneralKindConfig::UniformMassFraction { coef } => {
                    GeneralKernel::UniformMassFraction { coef: *coef }
                }
            };
            match &p.total_rate {
                Some(t) => FragmentationKernel::general_supplied(kind, total(t)?),
                None => FragmentationKernel::general_derived(
                    kind,
                    cfg.domain.x_min,
                    cfg.domain.x_max,
                ),
            }
        }
    };
    ModelSpec::new(growth, kernel, cfg.domain.x_min, cfg.domain.x_max)
}

/// Bundled model documents; the files under configs/ are the same text.
pub const BUNDLED_LINEAR: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/linear-calibration.json"));
pub const BUNDLED_HUMP: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/hump.json"));
pub const BUNDLED_TRANSIENT: &str = include_str!(concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../configs/transient-counterexample.json"
));
