//! The JSON run configuration.
//!
//! A config names one command and carries the section that command needs.
//! Unknown fields are rejected everywhere, and `version` must be
//! [`CONFIG_VERSION`]. `schema/run-config.schema.json` documents the same
//! shape for external tooling.

use std::path::Path;

use hyperalg_core::complex::{c64, C64};
use hyperalg_core::eigenmodel::{EigenModel, ExpCombination, Kernel, MetricSpec};
use hyperalg_core::engine::OpenSetSpec;
use hyperalg_core::funcexpr::{examples, FunctionExpr};
use hyperalg_core::parse::parse;
use hyperalg_core::search::ScheduleStrategy;
use hyperalg_core::shiftalg::PolyGeomCombination;
use hyperalg_core::Polynomial;
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("unsupported config version {0} (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] hyperalg_core::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Search,
    Demo,
    Asymptotics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Used when the command line gives no `--seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demo: Option<DemoSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptotics: Option<AsymptoticsSpec>,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Complex([f64; 2]),
}

impl Num {
    pub fn value(self) -> C64 {
        match self {
            Num::Real(x) => c64(x, 0.0),
            Num::Complex([re, im]) => c64(re, im),
        }
    }
}

fn poly(coeffs: &[Num]) -> Polynomial {
    Polynomial::new(coeffs.iter().map(|c| c.value()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// The symbol `φ` in text form, acting on `E(λ)(z) = e^{λz}` unless
    /// `kernel` says otherwise.
    Phi {
        text: String,
        #[serde(default = "translation")]
        kernel: Kernel,
    },
    /// `P(B)` on `ℓ¹(ℕ)`, coefficients from the constant term up.
    Polynomial(Vec<Num>),
    /// The dilation model `φ(λ) = P(r^λ)` on `E(λ)(z) = z^λ`.
    Dilation { polynomial: Vec<Num>, r: f64 },
}

fn translation() -> Kernel {
    Kernel::TranslationExp
}

/// The operator a config describes.
#[derive(Debug, Clone)]
pub enum Operator {
    Eigen(EigenModel),
    Shift(Polynomial),
}

impl OperatorSpec {
    pub fn build(&self) -> Result<Operator, ConfigError> {
        match self {
            OperatorSpec::Phi { text, kernel } => Ok(Operator::Eigen(EigenModel::new(parse(text)?, *kernel))),
            OperatorSpec::Polynomial(c) => {
                let p = poly(c);
                if p.degree_or_zero() == 0 {
                    return invalid("P must be nonconstant");
                }
                Ok(Operator::Shift(p))
            }
            OperatorSpec::Dilation { polynomial, r } => {
                if !(*r > 0.0 && *r != 1.0 && r.is_finite()) {
                    return invalid("dilation factor r must be positive and not 1");
                }
                let phi = examples::poly_of_exp(poly(polynomial), c64(r.ln(), 0.0));
                Ok(Operator::Eigen(EigenModel::new(phi, Kernel::DilationPower)))
            }
        }
    }
}

impl Operator {
    pub fn phi(&self) -> Result<&FunctionExpr, ConfigError> {
        match self {
            Operator::Eigen(m) => Ok(&m.phi),
            Operator::Shift(_) => invalid("this command needs a symbol φ, not a polynomial of B"),
        }
    }

    pub fn polynomial(&self) -> Result<&Polynomial, ConfigError> {
        match self {
            Operator::Shift(p) => Ok(p),
            Operator::Eigen(_) => invalid("this command needs a polynomial P of the backward shift"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SearchSpec {
    Schedule {
        m: u32,
        #[serde(default = "corollary")]
        strategy: ScheduleStrategy,
    },
    SmallEigen {
        rho: f64,
    },
    Segment {
        w0: Num,
        delta: f64,
        #[serde(default)]
        require_large: bool,
    },
    LargeEigen {
        m: u32,
        #[serde(default)]
        growth_asserted: bool,
    },
    Powers {
        m: u32,
    },
    LevelSets {
        n1: usize,
        n2: usize,
    },
    MultiIndex {
        set: Vec<Vec<u32>>,
    },
}

fn corollary() -> ScheduleStrategy {
    ScheduleStrategy::CorollaryReduction
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionKind {
    SmallEigen,
    LargeEigen,
    Powers,
    MultiGenerator,
    Shift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoSpec {
    pub construction: ConstructionKind,
    /// Target power; unused by the multi-generator construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    /// The set `A` of the multi-generator construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_indices: Option<Vec<Vec<u32>>>,
    #[serde(default = "corollary")]
    pub strategy: ScheduleStrategy,
    #[serde(default)]
    pub growth_asserted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    /// `U`, or `U_1, …, U_d` for the multi-generator construction.
    pub u: Vec<SetSpec>,
    pub v: SetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<SetSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// Frequency `λ` of `E(λ)`, or base `λ` of `(λ^k)`.
    #[serde(alias = "base")]
    pub freq: Num,
    pub coef: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    #[serde(default)]
    pub center: Vec<TermSpec>,
    pub radius: f64,
    /// Circle metric for eigen models; defaults per kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
}

impl SetSpec {
    pub fn build(&self, op: &Operator) -> Result<OpenSetSpec, ConfigError> {
        let set = match op {
            Operator::Eigen(model) => {
                let center = ExpCombination::from_terms(self.center.iter().map(|t| (t.freq.value(), t.coef.value())));
                let metric = self.metric.clone().unwrap_or_else(|| MetricSpec::default_for(model.kernel));
                OpenSetSpec::eigen(center, self.radius, model.kernel, metric)
            }
            Operator::Shift(_) => {
                if self.metric.is_some() {
                    return invalid("ℓ¹ sets take no circle metric");
                }
                let mut center = PolyGeomCombination::zero();
                for t in &self.center {
                    center = center.add(&PolyGeomCombination::geometric(t.coef.value(), t.freq.value())?)?;
                }
                OpenSetSpec::shift(center, self.radius)
            }
        };
        set.validate()?;
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsSpec {
    pub lambda: Num,
    pub d: usize,
    #[serde(default = "default_asymptotics_n")]
    pub n_max: usize,
}

fn default_asymptotics_n() -> usize {
    4000
}

impl RunConfig {
    pub fn from_json(text: &str, path: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|source| ConfigError::Json { path: path.to_string(), source })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        Self::from_json(&text, &shown)
    }

    /// Structural checks beyond what serde enforces.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        let needs_operator = self.command != Command::Verify;
        if needs_operator && self.operator.is_none() {
            return invalid("operator is required");
        }
        match self.command {
            Command::Verify => Ok(()),
            Command::Search if self.search.is_none() => invalid("command 'search' needs a 'search' section"),
            Command::Demo if self.demo.is_none() => invalid("command 'demo' needs a 'demo' section"),
            Command::Asymptotics if self.asymptotics.is_none() => {
                invalid("command 'asymptotics' needs an 'asymptotics' section")
            }
            Command::Demo => self.demo.as_ref().map_or(Ok(()), DemoSpec::check),
            _ => Ok(()),
        }
    }

    pub fn operator(&self) -> Result<Operator, ConfigError> {
        match &self.operator {
            Some(op) => op.build(),
            None => invalid("operator is required"),
        }
    }
}

impl DemoSpec {
    fn check(&self) -> Result<(), ConfigError> {
        let multi = self.construction == ConstructionKind::MultiGenerator;
        if multi != self.multi_indices.is_some() {
            return invalid("multi_indices is required by, and only allowed for, the multi-generator construction");
        }
        if !multi && self.m.is_none() {
            return invalid("m is required");
        }
        if !multi && self.u.len() != 1 {
            return invalid("exactly one U set is required");
        }
        let needs_w = self.construction != ConstructionKind::Powers;
        if needs_w != self.w.is_some() {
            return invalid(if needs_w { "W is required" } else { "the powers construction takes no W" });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"{
        "version": 1, "command": "demo", "seed": 3,
        "operator": {"phi": {"text": "cos(z)"}},
        "demo": {"construction": "small-eigen", "m": 2,
                 "u": [{"center": [{"freq": 0.01, "coef": 0.7}], "radius": 0.5}],
                 "v": {"center": [{"freq": [2, 1], "coef": 1.3}], "radius": 0.01},
                 "w": {"radius": 0.001}}
    }"#;

    #[test]
    fn parses_a_demo() {
        let cfg = RunConfig::from_json(DEMO, "demo.json").unwrap();
        let op = cfg.operator().unwrap();
        let demo = cfg.demo.unwrap();
        let v = demo.v.build(&op).unwrap();
        assert_eq!(v.radius, 0.01);
        assert!(matches!(op, Operator::Eigen(ref m) if m.kernel == Kernel::TranslationExp));
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let extra = DEMO.replacen("\"seed\": 3", "\"seed\": 3, \"colour\": 1", 1);
        assert!(matches!(RunConfig::from_json(&extra, "x"), Err(ConfigError::Json { .. })));
        let nested = DEMO.replacen("\"radius\": 0.001", "\"radius\": 0.001, \"shape\": 2", 1);
        assert!(matches!(RunConfig::from_json(&nested, "x"), Err(ConfigError::Json { .. })));
        let v2 = DEMO.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(RunConfig::from_json(&v2, "x"), Err(ConfigError::Version(2))));
        let missing = DEMO.replacen("\"version\": 1,", "", 1);
        assert!(RunConfig::from_json(&missing, "x").is_err());
    }

    #[test]
    fn builds_shift_and_dilation_operators() {
        let shift = OperatorSpec::Polynomial(vec![Num::Real(0.0), Num::Real(2.0)]).build().unwrap();
        let set = SetSpec { center: vec![TermSpec { freq: Num::Real(0.5), coef: Num::Real(1.0) }], radius: 0.1, metric: None };
        assert!(set.build(&shift).is_ok());
        let dil = OperatorSpec::Dilation { polynomial: vec![Num::Real(-0.8), Num::Real(1.0)], r: 0.5 }.build().unwrap();
        let phi = dil.phi().unwrap();
        assert!((phi.eval(c64(0.0, 0.0)) - c64(0.2, 0.0)).norm() < 1e-15);
        assert!(OperatorSpec::Polynomial(vec![Num::Real(3.0)]).build().is_err());
    }
}
