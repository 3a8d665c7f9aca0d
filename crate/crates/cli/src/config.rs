//! Run configuration: one JSON document, unknown keys rejected.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use sclaw_core::harness::{Functional, Models};
use sclaw_core::kinetic::MollifierPair;
use sclaw_core::model::{
    make_initial, FluxKind, FluxModel, InitialKind, NoiseMode, NoiseModel, Profile, SimConfig,
    Splitting, TorusGrid, DEFAULT_CFL, DEFAULT_LATTICE_N, DEFAULT_VALIDATION_RANGE,
};
use sclaw_core::rate::{OptConfig, DEFAULT_BINS, DEFAULT_LAMBDA_LADDER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub initial: InitialSection,
    pub sim: SimSection,
    #[serde(default)]
    pub mollifier: MollifierSection,
    #[serde(default)]
    pub harness: HarnessSection,
    #[serde(default)]
    pub rate: RateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub flux: FluxSection,
    pub noise: NoiseSection,
    #[serde(default = "default_validation_range")]
    pub validation_range: f64,
    #[serde(default = "default_lattice_n")]
    pub lattice_n: usize,
}

fn default_validation_range() -> f64 {
    DEFAULT_VALIDATION_RANGE
}

fn default_lattice_n() -> usize {
    DEFAULT_LATTICE_N
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxSection {
    Zero {},
    Linear { speed: f64, q0: f64, cal_n: f64 },
    Burgers {},
    Polynomial { coefficients: Vec<f64>, q0: f64, cal_n: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub modes: Vec<ModeSection>,
    #[serde(default = "default_validation_range")]
    pub state_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Constant,
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub sigma: f64,
    pub profile: ProfileName,
    #[serde(default = "one_u32")]
    pub wavenumber: u32,
    pub alpha: f64,
    pub beta: f64,
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Constant { value: f64 },
    Riemann { u_left: f64, u_right: f64, x0: f64 },
    Sine { mean: f64, amp: f64, mode: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingName {
    Lie,
    Strang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub cells: usize,
    pub dt: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_splitting")]
    pub splitting: SplittingName,
    #[serde(default = "one_usize")]
    pub save_stride: usize,
    /// Path index used by `simulate`.
    #[serde(default)]
    pub path: u64,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

fn default_splitting() -> SplittingName {
    SplittingName::Lie
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierSection {
    pub gamma: f64,
    pub delta: f64,
    pub envelope_range: f64,
    pub envelope_lattice: usize,
    /// `(γ, δ)` pairs for the error ladder of `doubling`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ladder: Vec<[f64; 2]>,
}

impl Default for MollifierSection {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            delta: 0.1,
            envelope_range: DEFAULT_VALIDATION_RANGE,
            envelope_lattice: 201,
            ladder: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_ladder: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling_n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_paths: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    pub bins: usize,
    pub lambda_ladder: Vec<f64>,
    pub tol_feas: f64,
    pub max_iters: usize,
    /// Time steps of the target trajectory.
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSection>,
}

impl Default for RateSection {
    fn default() -> Self {
        let opt = OptConfig::default();
        Self {
            bins: DEFAULT_BINS,
            lambda_ladder: DEFAULT_LAMBDA_LADDER.to_vec(),
            tol_feas: opt.tol_feas,
            max_iters: opt.max_iters,
            steps: 64,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSection {
    /// `ρ(t, x) = η(x) + slope · t`.
    Drift { slope: f64 },
    /// Skeleton path from `η` under constant per-mode controls.
    Control { levels: Vec<f64> },
}

/// Parses a configuration document. Errors name the offending key, as in
/// `unknown key: sim.foo` or `missing key: model.flux`.
pub fn parse_config(text: &str) -> CliResult<Config> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.inner().to_string();
        CliError::Config(describe(&path, &inner))
    })
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() || path == "." {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn between_backticks(s: &str) -> Option<&str> {
    let a = s.find('`')?;
    let b = s[a + 1..].find('`')?;
    Some(&s[a + 1..a + 1 + b])
}

fn describe(path: &str, inner: &str) -> String {
    if inner.starts_with("unknown field") {
        let key = between_backticks(inner).unwrap_or("?");
        // The reported path already ends at the offending key.
        let full = if path.ends_with(key) { path.to_string() } else { join(path, key) };
        format!("unknown key: {full}")
    } else if inner.starts_with("missing field") {
        let key = between_backticks(inner).unwrap_or("?");
        format!("missing key: {}", join(path, key))
    } else {
        format!("invalid value at {}: {inner}", if path.is_empty() { "." } else { path })
    }
}

pub fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key: {key}"))
}

fn invalid(key: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid value at {key}: {why}"))
}

fn keyed<T>(key: &str, r: sclaw_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| invalid(key, e))
}

impl Config {
    pub fn grid(&self) -> CliResult<TorusGrid> {
        keyed("sim.cells", TorusGrid::new(self.sim.cells))
    }

    pub fn flux(&self) -> CliResult<FluxModel> {
        let m = match &self.model.flux {
            FluxSection::Zero {} => Ok(FluxModel::zero()),
            FluxSection::Burgers {} => Ok(FluxModel::burgers()),
            FluxSection::Linear { speed, q0, cal_n } => {
                FluxModel::new(FluxKind::Linear { speed: *speed }, *q0, *cal_n)
            }
            FluxSection::Polynomial {
                coefficients,
                q0,
                cal_n,
            } => FluxModel::new(
                FluxKind::Polynomial {
                    coefficients: coefficients.clone(),
                },
                *q0,
                *cal_n,
            ),
        };
        keyed("model.flux", m)
    }

    pub fn noise(&self) -> CliResult<NoiseModel> {
        let modes = self
            .model
            .noise
            .modes
            .iter()
            .map(|m| {
                let profile = match m.profile {
                    ProfileName::Constant => Profile::Constant,
                    ProfileName::Cos => Profile::Cos(m.wavenumber),
                    ProfileName::Sin => Profile::Sin(m.wavenumber),
                };
                NoiseMode::new(m.sigma, profile, m.alpha, m.beta)
            })
            .collect();
        keyed("model.noise", NoiseModel::new(modes, self.model.noise.state_bound))
    }

    pub fn eta(&self) -> CliResult<sclaw_core::model::ScalarField> {
        let kind = match self.initial {
            InitialSection::Constant { value } => InitialKind::Constant(value),
            InitialSection::Riemann { u_left, u_right, x0 } => {
                InitialKind::Riemann { u_left, u_right, x0 }
            }
            InitialSection::Sine { mean, amp, mode } => InitialKind::Sine { mean, amp, mode },
        };
        keyed("initial", make_initial(kind, self.grid()?))
    }

    pub fn models(&self) -> CliResult<Models> {
        Ok(Models {
            eta: self.eta()?,
            flux: self.flux()?,
            noise: self.noise()?,
        })
    }

    pub fn sim(&self) -> CliResult<SimConfig> {
        let s = &self.sim;
        let mut cfg = keyed("sim", SimConfig::new(s.epsilon, self.grid()?, s.dt))?;
        cfg.cfl = s.cfl;
        cfg = cfg.with_seed(s.seed).with_splitting(match s.splitting {
            SplittingName::Lie => Splitting::Lie,
            SplittingName::Strang => Splitting::Strang,
        });
        keyed("sim.save_stride", cfg.with_save_stride(s.save_stride))
    }

    pub fn mollifier(&self) -> CliResult<MollifierPair> {
        keyed("mollifier", MollifierPair::new(self.mollifier.gamma, self.mollifier.delta))
    }

    pub fn opt(&self) -> CliResult<OptConfig> {
        let opt = OptConfig {
            max_iters: self.rate.max_iters,
            tol_feas: self.rate.tol_feas,
            ..OptConfig::default()
        };
        keyed("rate", opt.validate())?;
        Ok(opt)
    }

    pub fn functionals(&self) -> CliResult<Vec<Functional>> {
        let names = self
            .harness
            .functionals
            .clone()
            .unwrap_or_else(|| vec!["mass".into(), "l2norm".into()]);
        names
            .iter()
            .map(|n| {
                Functional::parse(n)
                    .ok_or_else(|| invalid("harness.functionals", format!("unknown functional {n:?}")))
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn require<T: Clone>(value: &Option<T>, key: &str) -> CliResult<T> {
    value.clone().ok_or_else(|| missing(key))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"flux": {"kind": "burgers"}, "noise": {"modes": []}},
        "initial": {"kind": "constant", "value": 1.0},
        "sim": {"cells": 16, "dt": 0.0625, "epsilon": 0.5}
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.sim.cfl, DEFAULT_CFL);
        assert_eq!(c.rate.bins, DEFAULT_BINS);
        assert!(c.harness.iota.is_none());
        let back = parse_config(&c.to_json().to_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = MINIMAL.replace("\"epsilon\": 0.5", "\"epsilon\": 0.5, \"foo\": 1");
        let err = parse_config(&text).unwrap_err().to_string();
        assert_eq!(err, "unknown key: sim.foo");
        let text = MINIMAL.replace("\"kind\": \"burgers\"", "\"kind\": \"burgers\", \"bar\": 2");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.starts_with("unknown key: model.flux"), "{err}");
    }

    #[test]
    fn missing_keys_are_named() {
        let text = MINIMAL.replace("\"cells\": 16, ", "");
        let err = parse_config(&text).unwrap_err().to_string();
        assert_eq!(err, "missing key: sim.cells");
        let text = MINIMAL.replace(", \"value\": 1.0", "");
        let err = parse_config(&text).unwrap_err().to_string();
        assert_eq!(err, "missing key: initial.value");
    }
}
