use serde::{Deserialize, Serialize};

use crate::mesh::{GridSpec, SpacingLaw};
use crate::norms::HardySide;
use crate::operators::ProblemParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Constant,
    Hardy,
    ExtendCheck,
    Verify,
    Sweep,
    Regime,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Constant => "constant",
            Subcommand::Hardy => "hardy",
            Subcommand::ExtendCheck => "extend-check",
            Subcommand::Verify => "verify",
            Subcommand::Sweep => "sweep",
            Subcommand::Regime => "regime",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_q: f64,
    pub tol_r: f64,
    pub max_iter: usize,
    /// number of starting profiles; the first is the default initial guess
    pub multi_start: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol_q: 1e-12, tol_r: 1e-6, max_iter: 500, multi_start: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), formats: vec![Format::Json, Format::Csv] }
    }
}

/// Parameter pairs for `sweep`; `theta` defaults to `alpha` entrywise.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub alpha: Vec<f64>,
    pub theta: Option<Vec<f64>>,
}

/// `hardy` uses `alpha` as the weight `γ` of the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardyConfig {
    pub side: HardySide,
    /// target exponent; `p*` when absent
    pub q: Option<f64>,
}

impl Default for HardyConfig {
    fn default() -> Self {
        Self { side: HardySide::Right, q: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionConfig {
    pub corpus: usize,
    /// outer length `L`; `3R` when absent
    pub length: Option<f64>,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self { corpus: 50, length: None }
    }
}

fn default_grid() -> GridSpec {
    GridSpec {
        law: SpacingLaw::Algebraic { scale: 1.0, power: 2.0 },
        n: 800,
        r_max: f64::INFINITY,
        gauss_points: 1,
    }
}

fn two() -> f64 {
    2.0
}

fn three() -> f64 {
    3.0
}

fn one() -> u32 {
    1
}

/// Flat run configuration. The domain radius is the grid's `r_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    #[serde(default = "one")]
    pub m: u32,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "three")]
    pub alpha: f64,
    #[serde(default = "three")]
    pub theta: f64,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub hardy: HardyConfig,
    #[serde(default)]
    pub extension: ExtensionConfig,
}

/// Why a configuration was rejected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("regime: {0}")]
    Regime(String),
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        serde_json::from_value(serde_json::json!({ "subcommand": subcommand })).expect("defaults")
    }

    pub fn params(&self) -> ProblemParams {
        ProblemParams { m: self.m, p: self.p, alpha: self.alpha, theta: self.theta, r_max: self.grid.r_max }
    }

    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, ConfigError> {
        let config: RunConfig =
            serde_json::from_value(value).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// `(α, θ)` pairs of a sweep.
    pub fn sweep_entries(&self) -> Result<Vec<(f64, f64)>, ConfigError> {
        let a = &self.sweep.alpha;
        let t = self.sweep.theta.as_ref().unwrap_or(a);
        if a.is_empty() {
            return Err(ConfigError::Invalid("sweep.alpha is empty".into()));
        }
        if t.len() != a.len() {
            return Err(ConfigError::Invalid(format!(
                "sweep.theta has {} entries, sweep.alpha has {}",
                t.len(),
                a.len()
            )));
        }
        Ok(a.iter().copied().zip(t.iter().copied()).collect())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |s: String| ConfigError::Invalid(s);
        self.params().check_ranges().map_err(|e| invalid(e.to_string()))?;
        self.grid.build().map_err(|e| invalid(format!("grid: {e}")))?;
        if self.solver.multi_start == 0 {
            return Err(invalid("solver.multi_start must be at least 1".into()));
        }
        if !(self.solver.tol_r > 0.0) || !(self.solver.tol_q > 0.0) {
            return Err(invalid("solver tolerances must be positive".into()));
        }
        let minimizable = |params: ProblemParams| -> Result<(), ConfigError> {
            if params.p != 2.0 {
                return Err(invalid(format!("the minimizer needs p = 2, got p = {}", params.p)));
            }
            params.sobolev_condition().map_err(ConfigError::Regime)?;
            let q = (params.theta + 1.0) * params.p / params.sobolev_gap();
            if q == 2.0 {
                return Err(ConfigError::Regime(format!(
                    "2* = 2 at θ = α−2m = {}, the quotient is not scale invariant",
                    params.theta
                )));
            }
            Ok(())
        };
        match self.subcommand {
            Subcommand::Constant => minimizable(self.params())?,
            Subcommand::Sweep => {
                for (alpha, theta) in self.sweep_entries()? {
                    let p = ProblemParams { alpha, theta, ..self.params() };
                    p.check_ranges().map_err(|e| invalid(e.to_string()))?;
                    minimizable(p)?;
                }
            }
            Subcommand::Hardy => {
                if !(self.p > 1.0) {
                    return Err(invalid(format!("Hardy criterion needs p > 1, got {}", self.p)));
                }
                let gap = self.params().sobolev_gap();
                if self.hardy.q.is_none() && gap == 0.0 {
                    return Err(ConfigError::Regime(
                        "γ−mp+1 = 0, critical exponent undefined (set hardy.q)".into(),
                    ));
                }
            }
            Subcommand::ExtendCheck => {
                if self.grid.r_max.is_infinite() {
                    return Err(invalid("extend-check needs a finite grid.r_max".into()));
                }
                let beta0 = self.alpha - self.m as f64 * self.p;
                if !(beta0 > -1.0) {
                    return Err(ConfigError::Regime(format!(
                        "α−mp = {beta0} ≤ −1, lowest-order weight not integrable"
                    )));
                }
                if let Some(l) = self.extension.length {
                    if !(l > 2.0 * self.grid.r_max) {
                        return Err(invalid(format!("extension.length = {l} must exceed 2R")));
                    }
                }
            }
            Subcommand::Verify | Subcommand::Regime => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "subcommand": "constant",
        "m": 1, "p": 2.0, "alpha": 3.0, "theta": 3.0,
        "grid": {"law": "algebraic", "params": {"scale": 1.0, "power": 2.0}, "n": 400, "r_max": "inf", "gauss_points": 1},
        "solver": {"tol_q": 1e-12, "tol_r": 1e-6, "max_iter": 300, "multi_start": 2},
        "output": {"dir": "results", "formats": ["json", "csv"]},
        "seed": 7,
        "sweep": {"alpha": [2.2, 3.0, 5.0], "theta": null},
        "hardy": {"side": "right", "q": null},
        "extension": {"corpus": 50, "length": null}
    }"#;

    #[test]
    fn echoes_through_serialization() {
        let c = RunConfig::from_json(FULL).unwrap();
        let back: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        let orig: serde_json::Value = serde_json::from_str(FULL).unwrap();
        assert_eq!(back, orig);
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let c = RunConfig::from_json(r#"{"subcommand": "verify"}"#).unwrap();
        assert_eq!(c, RunConfig::new(Subcommand::Verify));
        assert_eq!(c.params(), ProblemParams::new(1, 2.0, 3.0, 3.0, f64::INFINITY).unwrap());
    }

    #[test]
    fn regime_named_at_parse_time() {
        let e = RunConfig::from_json(r#"{"subcommand": "constant", "m": 2, "alpha": 3.0}"#).unwrap_err();
        match e {
            ConfigError::Regime(msg) => assert!(msg.contains("α−mp+1 = 0"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let e = RunConfig::from_json(r#"{"subcommand": "constant", "theta": 0.5}"#).unwrap_err();
        assert!(matches!(e, ConfigError::Regime(ref m) if m.contains("θ ≥ α−mp")), "{e:?}");
        let e = RunConfig::from_json(r#"{"subcommand": "sweep", "sweep": {"alpha": [3.0, 1.0]}}"#);
        assert!(matches!(e, Err(ConfigError::Regime(_))));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(RunConfig::from_json("{"), Err(ConfigError::Invalid(_))));
        assert!(matches!(
            RunConfig::from_json(r#"{"subcommand": "constant", "alpah": 3.0}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            RunConfig::from_json(r#"{"subcommand": "constant", "p": 3.0, "alpha": 7.0}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            RunConfig::from_json(r#"{"subcommand": "extend-check"}"#),
            Err(ConfigError::Invalid(_))
        ));
        assert!(RunConfig::from_json(r#"{"subcommand": "regime", "theta": 0.5}"#).is_ok());
    }
}
