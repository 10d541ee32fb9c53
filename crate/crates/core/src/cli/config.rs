//! JSON experiment configuration. Unknown keys are rejected; semantic checks
//! run before any sampling.

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::ctrw_engine::{CouplingMode, CouplingSpec};
use crate::error::{Error, Result};
use crate::levy_measure::{Atom, DirectionalTail, LevyMeasureModel, SubordinatorTail};
use crate::series_sampler::{default_truncation_depth, LimitCoupling, LimitMode};
use crate::stats::{StepLaw, StoppingRule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub direction: Vec<f64>,
    pub weight: f64,
    pub c: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub c: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_sphere: Option<TailSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubordinatorSpec {
    pub alpha: f64,
    pub c_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingName {
    Uncoupled,
    Tight,
    CommonShock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub s: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Upper bound for pre-limit versus limit KS distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_max: Option<f64>,
    /// Upper bound for forward versus backward limit KS (laws coincide).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_equal_max: Option<f64>,
    /// Lower bound for forward versus backward limit KS (laws differ).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_distinct_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_band: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Rademacher,
    Uniform { half_width: f64 },
    Discrete { values: Vec<f64>, probs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Fixed { m: u32 },
    FirstExceedance { threshold: f64, cap: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub law: LawSpec,
    pub rule: RuleSpec,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KolmogorovSpec {
    #[serde(default)]
    pub cases: Vec<CaseSpec>,
    /// Additional randomly drawn cases, seeded from `base_seed`.
    #[serde(default)]
    pub random_cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewalSpec {
    pub times: Vec<f64>,
    /// Independent runs averaged per time for the trend check.
    #[serde(default = "one")]
    pub runs: u64,
    /// Time at which the ratio band is enforced.
    pub band_time: f64,
    /// Require `|ratio − 1|` of the run averages to decrease along `times`.
    #[serde(default)]
    pub require_trend: bool,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subordinator: Option<SubordinatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_scale: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub replicates: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<WindowSpec>>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kolmogorov: Option<KolmogorovSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewal: Option<RenewalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// JSON schema every configuration is checked against before parsing.
pub const CONFIG_SCHEMA: &str = include_str!("../../configs/schema.json");

fn schema_validator() -> &'static jsonschema::Validator {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    VALIDATOR.get_or_init(|| {
        let schema: serde_json::Value =
            serde_json::from_str(CONFIG_SCHEMA).expect("bundled schema is valid JSON");
        jsonschema::validator_for(&schema).expect("bundled schema compiles")
    })
}

/// Top-level keys accepted by [`ExperimentConfig`], as published in the schema.
pub const CONFIG_KEYS: &[&str] = &[
    "experiment",
    "model",
    "subordinator",
    "coupling",
    "n_scale",
    "horizon",
    "t",
    "K",
    "eps",
    "replicates",
    "base_seed",
    "k_max",
    "windows",
    "thresholds",
    "kolmogorov",
    "renewal",
    "output",
    "workers",
];

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    /// Parses `text`, checking it against [`CONFIG_SCHEMA`] first.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| cfg(format!("invalid JSON: {e}")))?;
        let problems: Vec<String> = schema_validator()
            .iter_errors(&value)
            .map(|e| format!("{} at \"{}\"", e, e.instance_path()))
            .collect();
        if !problems.is_empty() {
            return Err(cfg(format!("schema violation: {}", problems.join("; "))));
        }
        serde_json::from_value(value).map_err(|e| cfg(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn model(&self) -> Result<LevyMeasureModel> {
        let spec = self
            .model
            .as_ref()
            .ok_or_else(|| cfg("missing key \"model\""))?;
        build_model(spec).map_err(as_config)
    }

    pub fn sub(&self) -> Result<SubordinatorTail> {
        let spec = self
            .subordinator
            .ok_or_else(|| cfg("missing key \"subordinator\""))?;
        SubordinatorTail::new(spec.alpha, spec.c_time).map_err(as_config)
    }

    pub fn coupling_name(&self) -> Result<CouplingName> {
        self.coupling.ok_or_else(|| cfg("missing key \"coupling\""))
    }

    /// Pre-limit coupling and its limit counterpart.
    pub fn couplings(&self) -> Result<(CouplingSpec, LimitCoupling)> {
        let sub = self.sub()?;
        let name = self.coupling_name()?;
        let model = match (name, &self.model) {
            (CouplingName::Tight, None) => LevyMeasureModel::tight(&sub),
            _ => self.model()?,
        };
        let (mode, limit_mode) = match name {
            CouplingName::Uncoupled => (CouplingMode::Uncoupled, LimitMode::Uncoupled),
            CouplingName::Tight => (CouplingMode::Tight, LimitMode::Tight),
            CouplingName::CommonShock => (CouplingMode::CommonShock, LimitMode::CommonGamma),
        };
        let pre = CouplingSpec::new(mode, model.clone(), sub).map_err(as_config)?;
        let lim = LimitCoupling::new(limit_mode, model, sub).map_err(as_config)?;
        pre.normalization(1).map_err(as_config)?;
        Ok((pre, lim))
    }

    pub fn n_scale(&self) -> Result<u64> {
        match self.n_scale {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(cfg("n_scale must be >= 1")),
            None => Err(cfg("missing key \"n_scale\"")),
        }
    }

    pub fn horizon(&self) -> Result<f64> {
        match self.horizon {
            Some(h) if h > 0.0 && h.is_finite() => Ok(h),
            Some(_) => Err(cfg("horizon must be positive")),
            None => Err(cfg("missing key \"horizon\"")),
        }
    }

    pub fn time(&self) -> Result<f64> {
        match self.t {
            Some(t) if t >= 0.0 && t.is_finite() => Ok(t),
            Some(_) => Err(cfg("t must be finite and >= 0")),
            None => Err(cfg("missing key \"t\"")),
        }
    }

    /// Explicit `K`, or the default depth for temporal tail mass `1e-4 · t`.
    pub fn truncation_depth(&self) -> Result<usize> {
        if let Some(k) = self.truncation {
            if k == 0 {
                return Err(cfg("K must be >= 1"));
            }
            return Ok(k);
        }
        let tol = 1e-4 * self.time()?.max(1e-3);
        default_truncation_depth(&self.sub()?, self.horizon()?, tol).map_err(as_config)
    }

    /// Explicit `eps`, or 0 when every tail index is below 1 and 1e-6 otherwise.
    pub fn eps_or_default(&self, model: &LevyMeasureModel) -> Result<f64> {
        match self.eps {
            Some(e) if e >= 0.0 && e.is_finite() => Ok(e),
            Some(_) => Err(cfg("eps must be finite and >= 0")),
            None => Ok(if model.tails().iter().all(|t| t.beta() < 1.0) {
                0.0
            } else {
                1e-6
            }),
        }
    }

    pub fn k_max(&self) -> Result<usize> {
        match self.k_max {
            Some(k) if k >= 1 => Ok(k),
            Some(_) => Err(cfg("k_max must be >= 1")),
            None => Err(cfg("missing key \"k_max\"")),
        }
    }

    /// Step count `⌊n_scale · T⌋` of the pre-limit walks on `[0, T]`.
    pub fn steps_on_horizon(&self) -> Result<usize> {
        let n = (self.n_scale()? as f64 * self.horizon()?).floor();
        if !(1.0..1e12).contains(&n) {
            return Err(cfg("n_scale · horizon must lie in [1, 1e12)"));
        }
        Ok(n as usize)
    }

    pub fn threshold(&self, value: Option<f64>, name: &str) -> Result<f64> {
        match value {
            Some(v) if v.is_finite() && v >= 0.0 => Ok(v),
            Some(_) => Err(cfg(format!("threshold {name} must be finite and >= 0"))),
            None => Err(cfg(format!("missing threshold \"{name}\""))),
        }
    }

    /// Shared checks for every experiment.
    pub fn validate_common(&self, expected: &str) -> Result<()> {
        if self.experiment != expected {
            return Err(cfg(format!(
                "config is for experiment \"{}\", not \"{expected}\"",
                self.experiment
            )));
        }
        if self.replicates == 0 {
            return Err(cfg("replicates must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(cfg("workers must be >= 1"));
        }
        Ok(())
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<LevyMeasureModel> {
    match (&spec.atoms, &spec.uniform_sphere) {
        (Some(atoms), None) => {
            let mut list = Vec::with_capacity(atoms.len());
            let mut tails = Vec::with_capacity(atoms.len());
            for a in atoms {
                if a.direction.len() != spec.dimension {
                    return Err(cfg("atom direction length differs from \"dimension\""));
                }
                list.push(Atom {
                    direction: a.direction.clone(),
                    weight: a.weight,
                });
                tails.push(DirectionalTail::new(a.c, a.beta)?);
            }
            LevyMeasureModel::from_atoms(list, tails)
        }
        (None, Some(tail)) => LevyMeasureModel::uniform_sphere(
            spec.dimension,
            DirectionalTail::new(tail.c, tail.beta)?,
        ),
        _ => Err(cfg(
            "model needs exactly one of \"atoms\" or \"uniform_sphere\"",
        )),
    }
}

impl From<&LawSpec> for StepLaw {
    fn from(l: &LawSpec) -> Self {
        match l {
            LawSpec::Rademacher => StepLaw::Rademacher,
            LawSpec::Uniform { half_width } => StepLaw::Uniform {
                half_width: *half_width,
            },
            LawSpec::Discrete { values, probs } => StepLaw::Discrete {
                values: values.clone(),
                probs: probs.clone(),
            },
        }
    }
}

impl From<&RuleSpec> for StoppingRule {
    fn from(r: &RuleSpec) -> Self {
        match *r {
            RuleSpec::Fixed { m } => StoppingRule::Fixed { m },
            RuleSpec::FirstExceedance { threshold, cap } => {
                StoppingRule::FirstExceedance { threshold, cap }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "experiment": "limit-compare",
        "model": {"dimension": 1, "atoms": [
            {"direction": [1], "weight": 0.5, "c": 1, "beta": 0.7},
            {"direction": [-1], "weight": 0.5, "c": 1, "beta": 0.7}
        ]},
        "subordinator": {"alpha": 0.5, "c_time": 1},
        "coupling": "uncoupled",
        "n_scale": 100, "horizon": 4, "t": 1, "replicates": 10
    }"#;

    #[test]
    fn parses_and_builds() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.validate_common("limit-compare").unwrap();
        let (pre, lim) = c.couplings().unwrap();
        assert_eq!(pre.dimension(), 1);
        assert_eq!(lim.mode(), LimitMode::Uncoupled);
        assert_eq!(c.truncation_depth().unwrap(), 160_000);
        assert_eq!(c.eps_or_default(lim.model()).unwrap(), 0.0);
        assert!(c.validate_common("mpp").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = MINIMAL.replace("\"replicates\"", "\"replicatez\": 1, \"replicates\"");
        assert!(matches!(
            ExperimentConfig::from_json(&bad),
            Err(Error::Config(_))
        ));
        let bad = MINIMAL.replace("\"c_time\": 1", "\"c_time\": 1, \"extra\": 2");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }

    #[test]
    fn invalid_model_is_config_error() {
        let bad = MINIMAL.replace("\"dimension\": 1", "\"dimension\": 2");
        let c = ExperimentConfig::from_json(&bad).unwrap();
        assert!(matches!(c.couplings(), Err(Error::Config(_))));
        // caught by the schema before parsing
        let bad = MINIMAL.replace("0.7", "1.0");
        assert!(matches!(
            ExperimentConfig::from_json(&bad),
            Err(Error::Config(_))
        ));
        let bad = MINIMAL.replace("\"uncoupled\"", "\"loose\"");
        assert!(matches!(
            ExperimentConfig::from_json(&bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn key_list_matches_struct() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        let full = ExperimentConfig {
            model: c.model.clone(),
            subordinator: c.subordinator,
            coupling: c.coupling,
            n_scale: Some(1),
            horizon: Some(1.0),
            t: Some(1.0),
            truncation: Some(1),
            eps: Some(0.0),
            k_max: Some(1),
            windows: Some(vec![WindowSpec { s: 1.0, delta: 1.0 }]),
            thresholds: Thresholds::default(),
            kolmogorov: Some(KolmogorovSpec {
                cases: vec![],
                random_cases: 0,
            }),
            renewal: Some(RenewalSpec {
                times: vec![1.0],
                runs: 1,
                band_time: 1.0,
                require_trend: false,
            }),
            output: Some(String::new()),
            workers: Some(1),
            ..c
        };
        let value = serde_json::to_value(&full).unwrap();
        let mut keys: Vec<&str> = value
            .as_object()
            .unwrap()
            .keys()
            .map(|k| k.as_str())
            .collect();
        let mut want = CONFIG_KEYS.to_vec();
        keys.sort_unstable();
        want.sort_unstable();
        assert_eq!(keys, want);
        schema_validator().validate(&value).unwrap();

        let schema: serde_json::Value = serde_json::from_str(CONFIG_SCHEMA).unwrap();
        let mut published: Vec<&str> = schema["properties"]
            .as_object()
            .unwrap()
            .keys()
            .map(|k| k.as_str())
            .collect();
        published.sort_unstable();
        assert_eq!(published, want);
    }
}
