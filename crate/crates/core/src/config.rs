//! JSON experiment configuration. Unknown fields are rejected; parse errors
//! name the offending field path.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::function::{PiecewiseBilinear2D, PiecewiseLinear1D};
use crate::measure::{Anchor, Density, WeightedMeasure1D};
use crate::norms::ProductMeasure;
use crate::verify::{BatterySpec, ExperimentConfig, Family, StatementExponent, TOL_VERIFY};
use crate::young::YoungFunction;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message} (line {line}, column {column})")]
    Parse { path: String, message: String, line: usize, column: usize },
    #[error("{field}: {source}")]
    Invalid { field: String, source: Error },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Power { q: f64 },
    ExpPower { q: f64 },
    Tabulated { knots: Vec<(f64, f64)> },
}

impl PhiSpec {
    pub fn build(&self) -> Result<YoungFunction> {
        match self {
            PhiSpec::Power { q } => YoungFunction::power(*q),
            PhiSpec::ExpPower { q } => YoungFunction::exp_power(*q),
            PhiSpec::Tabulated { knots } => YoungFunction::tabulated(knots),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AnchorSpec {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Constant {
        c: f64,
    },
    PowerLaw {
        alpha: f64,
        #[serde(default)]
        anchor: AnchorSpec,
    },
    Tabulated {
        knots: Vec<(f64, f64)>,
    },
    Product {
        factors: (Box<DensitySpec>, Box<DensitySpec>),
    },
}

impl DensitySpec {
    pub fn build(&self) -> Density {
        match self {
            DensitySpec::Constant { c } => Density::Constant(*c),
            DensitySpec::PowerLaw { alpha, anchor } => Density::PowerLaw {
                alpha: *alpha,
                anchor: match anchor {
                    AnchorSpec::Left => Anchor::Left,
                    AnchorSpec::Right => Anchor::Right,
                },
            },
            DensitySpec::Tabulated { knots } => {
                Density::Tabulated { t: knots.iter().map(|k| k.0).collect(), w: knots.iter().map(|k| k.1).collect() }
            }
            DensitySpec::Product { factors } => Density::product(factors.0.build(), factors.1.build()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub interval: (f64, f64),
    pub density: DensitySpec,
}

impl MeasureSpec {
    pub fn build(&self) -> Result<WeightedMeasure1D> {
        WeightedMeasure1D::new(self.interval.0, self.interval.1, self.density.build())
    }
}

/// Test function for the `norm` command.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// Piecewise-linear on knots `x`.
    Nodes1d { x: Vec<f64>, values: Vec<f64> },
    /// Piecewise-bilinear; `values[i][j]` sits at `(x[i], y[j])`.
    Nodes2d { x: Vec<f64>, y: Vec<f64>, values: Vec<Vec<f64>> },
    /// `c₀ + c₁x + c₂y + c₃xy` on the grid `x × y`.
    Bilinear { x: Vec<f64>, y: Vec<f64>, coeffs: [f64; 4] },
}

pub enum BuiltFunction {
    OneD(PiecewiseLinear1D),
    TwoD(PiecewiseBilinear2D),
}

impl FunctionSpec {
    pub fn build(&self) -> Result<BuiltFunction> {
        Ok(match self {
            FunctionSpec::Nodes1d { x, values } => {
                BuiltFunction::OneD(PiecewiseLinear1D::from_nodes(x.clone(), values.clone())?)
            }
            FunctionSpec::Nodes2d { x, y, values } => {
                BuiltFunction::TwoD(PiecewiseBilinear2D::from_nodes(x.clone(), y.clone(), values)?)
            }
            FunctionSpec::Bilinear { x, y, coeffs: [c0, c1, c2, c3] } => {
                BuiltFunction::TwoD(PiecewiseBilinear2D::from_fn(x.clone(), y.clone(), |s, t| {
                    c0 + c1 * s + c2 * t + c3 * s * t
                })?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    Constant,
    Planes,
    Products,
    Ramps,
    Random,
}

impl From<FamilySpec> for Family {
    fn from(f: FamilySpec) -> Self {
        match f {
            FamilySpec::Constant => Family::Constant,
            FamilySpec::Planes => Family::Planes,
            FamilySpec::Products => Family::Products,
            FamilySpec::Ramps => Family::Ramps,
            FamilySpec::Random => Family::Random,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryConfig {
    pub families: Vec<FamilySpec>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_random_count")]
    pub random_count: usize,
    #[serde(default = "default_grid")]
    pub random_grid: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_grid() -> usize {
    4
}

fn default_random_count() -> usize {
    50
}

impl BatteryConfig {
    pub fn spec(&self, seed_override: Option<u64>) -> BatterySpec {
        BatterySpec {
            families: self.families.iter().map(|&f| f.into()).collect(),
            grid: self.grid,
            random_count: self.random_count,
            random_grid: self.random_grid,
            seed: seed_override.unwrap_or(self.seed),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// 1 or 2.
    pub axis: u8,
    #[serde(default = "default_family_size")]
    pub family_size: usize,
    #[serde(default = "default_decades")]
    pub decades: usize,
}

fn default_family_size() -> usize {
    9
}

fn default_decades() -> usize {
    5
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExponentSpec {
    #[default]
    Proof,
    Statement,
}

impl From<ExponentSpec> for StatementExponent {
    fn from(e: ExponentSpec) -> Self {
        match e {
            ExponentSpec::Proof => StatementExponent::Proof,
            ExponentSpec::Statement => StatementExponent::Statement,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub phi: PhiSpec,
    pub mu1: MeasureSpec,
    pub mu2: MeasureSpec,
    pub nu1: MeasureSpec,
    pub nu2: MeasureSpec,
    pub w1: MeasureSpec,
    pub w2: MeasureSpec,
    pub p1: f64,
    pub p2: f64,
    pub s1: f64,
    #[serde(default)]
    pub statement_exponent: ExponentSpec,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub battery: Option<BatteryConfig>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
}

fn invalid(field: &str) -> impl FnOnce(Error) -> ConfigError + '_ {
    move |source| ConfigError::Invalid { field: field.to_string(), source }
}

impl ConfigFile {
    pub fn parse(text: &str, path: &str) -> std::result::Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Parse {
                path: path.to_string(),
                message: if field == "." { inner.to_string() } else { format!("field `{field}`: {inner}") },
                line: inner.line(),
                column: inner.column(),
            }
        })
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        Self::parse(&text, &shown)
    }

    pub fn phi(&self) -> std::result::Result<YoungFunction, ConfigError> {
        self.phi.build().map_err(invalid("phi"))
    }

    /// Builds and validates the experiment.
    pub fn experiment(&self) -> std::result::Result<ExperimentConfig, ConfigError> {
        let m = |name: &'static str, spec: &MeasureSpec| spec.build().map_err(invalid(name));
        let mu = ProductMeasure::new(m("mu1", &self.mu1)?, m("mu2", &self.mu2)?);
        let nu = ProductMeasure::new(m("nu1", &self.nu1)?, m("nu2", &self.nu2)?);
        let w = ProductMeasure::new(m("w1", &self.w1)?, m("w2", &self.w2)?);
        let mut cfg =
            ExperimentConfig::new(self.phi()?, mu, nu, w, self.p1, self.p2, self.s1).map_err(invalid("config"))?;
        cfg.statement_exponent = self.statement_exponent.into();
        cfg.tol_verify = self.tolerance.unwrap_or(TOL_VERIFY);
        if !(cfg.tol_verify >= 0.0 && cfg.tol_verify.is_finite()) {
            return Err(ConfigError::Invalid {
                field: "tolerance".into(),
                source: Error::InvalidParameter(format!("{} is not a valid tolerance", cfg.tol_verify)),
            });
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "phi": {"kind": "power", "q": 2.0},
        "mu1": {"interval": [0, 1], "density": {"kind": "constant", "c": 1.0}},
        "mu2": {"interval": [0, 1], "density": {"kind": "power_law", "alpha": 0.5, "anchor": "right"}},
        "nu1": {"interval": [0, 1], "density": {"kind": "tabulated", "knots": [[0, 1], [1, 2]]}},
        "nu2": {"interval": [0, 1], "density": {"kind": "product", "factors": [{"kind": "constant", "c": 2}, {"kind": "power_law", "alpha": 1}]}},
        "w1": {"interval": [0, 1], "density": {"kind": "constant", "c": 1.0}},
        "w2": {"interval": [0, 1], "density": {"kind": "constant", "c": 1.0}},
        "p1": 2, "p2": 1, "s1": 2
    }"#;

    #[test]
    fn parses_full_config() {
        let cfg = ConfigFile::parse(BASE, "base").unwrap();
        let exp = cfg.experiment().unwrap();
        assert_eq!(exp.p2, 1.0);
        assert_eq!(exp.statement_exponent, StatementExponent::Proof);
        assert!((exp.nu.first.total_mass() - 1.5).abs() < 1e-14);
        assert!((exp.nu.second.total_mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unknown_field_is_rejected_with_path() {
        let text = BASE.replace("\"p1\": 2", "\"p1\": 2, \"bogus\": 1");
        let err = ConfigFile::parse(&text, "x").unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
        let text = BASE.replace(
            "\"kind\": \"constant\", \"c\": 1.0}},\n        \"mu2\"",
            "\"kind\": \"gaussian\"}},\n        \"mu2\"",
        );
        let err = ConfigFile::parse(&text, "x").unwrap_err().to_string();
        assert!(err.contains("mu1.density"), "{err}");
    }

    #[test]
    fn invalid_values_name_the_field() {
        let text = BASE.replace("\"alpha\": 0.5", "\"alpha\": -2");
        let err = ConfigFile::parse(&text, "x").unwrap().experiment().unwrap_err().to_string();
        assert!(err.starts_with("mu2:"), "{err}");
        let text = BASE.replace("\"s1\": 2", "\"s1\": 0.5");
        assert!(ConfigFile::parse(&text, "x").unwrap().experiment().is_err());
    }
}
