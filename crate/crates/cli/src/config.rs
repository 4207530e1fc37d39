//! Experiment configuration files.
//!
//! ```toml
//! version = 1
//! checks = ["holder", "theorem"]
//!
//! [grid]
//! n = 1
//! k_min = -6
//! k_max = 4
//! L = 12
//!
//! [exponent]
//! q1 = { family = "logdecay", qinf = 2.0, a = 1.0 }
//!
//! [operator]
//! beta = 0.25
//! m = 1
//! b = { kind = "log" }
//! engine = "fft"
//!
//! [space]
//! lambda = 0.1
//! p1 = 1.0
//! p2 = 1.0
//!
//! [family]
//! kind = "mixed"
//! size = 20
//! seed = 7
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vexnorm::grid::DEFAULT_CELL_BUDGET;
use vexnorm::verify::{FamilyKind, FamilySpec, Symbol};
use vexnorm::{Engine, ExponentFamily, ExponentFunction, GridSpec};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub const KNOWN_CHECKS: [&str; 8] = [
    "holder",
    "lemma2",
    "lemma3",
    "lemma4",
    "hls",
    "theorem",
    "e123",
    "logholder",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub checks: Vec<String>,
    pub grid: GridSection,
    #[serde(default)]
    pub exponent: ExponentSection,
    #[serde(default)]
    pub operator: OperatorSection,
    #[serde(default)]
    pub space: SpaceSection,
    #[serde(default)]
    pub family: FamilySection,
    #[serde(default)]
    pub holder: HolderSection,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub k_min: i32,
    pub k_max: i32,
    #[serde(rename = "L", alias = "level")]
    pub level: u32,
    /// Largest number of lattice cells any grid of the run may have.
    #[serde(default = "default_budget")]
    pub cell_budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_CELL_BUDGET
}

impl GridSection {
    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.n, self.k_min, self.k_max, self.level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    pub q1: ExponentFamily,
}

impl Default for ExponentSection {
    fn default() -> Self {
        ExponentSection {
            q1: ExponentFamily::Constant { q0: 2.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorSection {
    pub beta: f64,
    pub m: u32,
    pub b: Symbol,
    /// Multiplier applied to `b`.
    pub b_scale: f64,
    pub engine: Engine,
}

impl Default for OperatorSection {
    fn default() -> Self {
        OperatorSection {
            beta: 0.25,
            m: 0,
            b: Symbol::Log,
            b_scale: 1.0,
            engine: Engine::Fft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceSection {
    /// Defaults to the midpoint of the admissible window.
    pub alpha: Option<f64>,
    pub lambda: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Default for SpaceSection {
    fn default() -> Self {
        SpaceSection {
            alpha: None,
            lambda: 0.1,
            p1: 1.0,
            p2: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilySection {
    pub kind: FamilyKind,
    pub size: usize,
    pub seed: u64,
    /// `[lo, hi]` shell range for atom families.
    pub shells: Option<[i32; 2]>,
    pub gamma: Option<f64>,
}

impl Default for FamilySection {
    fn default() -> Self {
        FamilySection {
            kind: FamilyKind::Mixed,
            size: 20,
            seed: 0,
            shells: None,
            gamma: None,
        }
    }
}

impl FamilySection {
    pub fn spec(&self) -> FamilySpec {
        FamilySpec {
            kind: self.kind,
            size: self.size,
            seed: self.seed,
            shells: self.shells.map(|[a, b]| (a, b)),
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderSection {
    pub trials: usize,
}

impl Default for HolderSection {
    fn default() -> Self {
        HolderSection { trials: 1000 }
    }
}

/// Pass thresholds for the stability-based checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Largest refinement change of the Lebesgue-space ratio and of `delta`.
    pub refinement: f64,
    /// Largest refinement change of the Herz-Morrey ratio.
    pub theorem_refinement: f64,
    /// Largest change of the Herz-Morrey ratio when a shell is added.
    pub shell: f64,
    /// Largest refinement change of the E-part constants.
    pub e123_refinement: f64,
    /// Largest admissible constant in the lemma checks.
    pub lemma_constant: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            refinement: 0.05,
            theorem_refinement: 0.10,
            shell: 0.10,
            e123_refinement: 0.15,
            lemma_constant: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("vexnorm-out"),
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parse a config file; relative output directories resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Parse { message, .. } => CliError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        if cfg.output.dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output.dir = parent.join(&cfg.output.dir);
            }
        }
        Ok(cfg)
    }

    /// Parse and validate config text.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check every numeric precondition before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != SCHEMA_VERSION {
            return Err(invalid(
                "version",
                format!(
                    "unsupported schema version {}, expected {SCHEMA_VERSION}",
                    self.version
                ),
            ));
        }
        for c in &self.checks {
            if !KNOWN_CHECKS.contains(&c.as_str()) {
                return Err(invalid(
                    "checks",
                    format!("unknown check {c:?}; known checks are {KNOWN_CHECKS:?}"),
                ));
            }
        }
        let spec = self.grid.spec();
        spec.validate()
            .map_err(|e| invalid("grid", e.to_string()))?;
        if self.grid.cell_budget == 0 {
            return Err(invalid("grid.cell_budget", "must be positive"));
        }
        let n = self.grid.n;

        let op = &self.operator;
        if !(op.beta > 0.0 && op.beta < n as f64) {
            return Err(invalid(
                "operator.beta",
                format!("beta = {} outside (0, n) = (0, {n})", op.beta),
            ));
        }
        if !op.b_scale.is_finite() {
            return Err(invalid("operator.b_scale", "must be finite"));
        }
        let box_radius = 2f64.powi(spec.k_max + 1) * (n as f64).sqrt();
        let q1 = ExponentFunction::new(self.exponent.q1, box_radius)
            .map_err(|e| invalid("exponent.q1", e.to_string()))?;
        let needs_partner = self
            .checks
            .iter()
            .any(|c| matches!(c.as_str(), "hls" | "theorem" | "e123"));
        if needs_partner && op.beta >= n as f64 / q1.q_plus() {
            return Err(invalid(
                "operator.beta",
                format!(
                    "beta = {} must be below n/(q1)_+ = {:.6}",
                    op.beta,
                    n as f64 / q1.q_plus()
                ),
            ));
        }

        let s = &self.space;
        if !(s.p1 > 0.0 && s.p1.is_finite()) {
            return Err(invalid(
                "space.p1",
                format!("p1 = {} must lie in (0, inf)", s.p1),
            ));
        }
        if !(s.p2 >= s.p1 && s.p2.is_finite()) {
            return Err(invalid(
                "space.p2",
                format!("p2 = {} must satisfy p1 <= p2 < inf", s.p2),
            ));
        }
        if !(s.lambda >= 0.0 && s.lambda.is_finite()) {
            return Err(invalid(
                "space.lambda",
                format!("lambda = {} must be >= 0", s.lambda),
            ));
        }
        if let Some(a) = s.alpha {
            if !a.is_finite() {
                return Err(invalid("space.alpha", "must be finite"));
            }
        }

        let f = &self.family;
        if f.kind != FamilyKind::ShellAtoms && f.size == 0 {
            return Err(invalid("family.size", "must be positive"));
        }
        if f.kind == FamilyKind::Powerlaw && f.gamma.is_none() {
            return Err(invalid("family.gamma", "powerlaw families need gamma"));
        }
        if self.checks.iter().any(|c| c == "holder") && self.holder.trials == 0 {
            return Err(invalid("holder.trials", "must be positive"));
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("thresholds.refinement", t.refinement),
            ("thresholds.theorem_refinement", t.theorem_refinement),
            ("thresholds.shell", t.shell),
            ("thresholds.e123_refinement", t.e123_refinement),
            ("thresholds.lemma_constant", t.lemma_constant),
        ] {
            if !(v > 0.0) {
                return Err(invalid(name, format!("{v} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "version = 1\n[grid]\nn = 1\nk_min = -4\nk_max = 3\nL = 9\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::parse(BASE).unwrap();
        assert!(c.checks.is_empty());
        assert_eq!(c.operator.beta, 0.25);
        assert_eq!(c.exponent.q1, ExponentFamily::Constant { q0: 2.0 });
        assert_eq!(c.grid.spec(), GridSpec::new(1, -4, 3, 9));
    }

    #[test]
    fn full_syntax() {
        let text = format!(
            "{BASE}[exponent]\nq1 = {{ family = \"logdecay\", qinf = 2.0, a = 1.0 }}\n\
             [operator]\nbeta = 0.1\nm = 2\nb = {{ kind = \"constant\", c = 1.0 }}\nengine = \"direct\"\n\
             [family]\nkind = \"shell_atoms\"\nshells = [-2, 1]\n"
        );
        let c = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(
            c.exponent.q1,
            ExponentFamily::LogDecay { qinf: 2.0, a: 1.0 }
        );
        assert_eq!(c.operator.engine, Engine::Direct);
        assert_eq!(c.operator.b, Symbol::Constant { c: 1.0 });
        assert_eq!(c.family.spec().shells, Some((-2, 1)));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = ExperimentConfig::parse("version = 1\n[grid]\nn = = 1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = ExperimentConfig::parse(&format!("{BASE}[operator]\nbogus = 1\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus") && err.contains("line"), "{err}");
    }

    #[test]
    fn validation_errors_name_the_field() {
        let err = ExperimentConfig::parse(&format!("{BASE}[operator]\nbeta = 1.5\n"))
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("operator.beta") && err.contains("(0, 1)"),
            "{err}"
        );
        let err = ExperimentConfig::parse(&format!("checks = [\"nope\"]\n{BASE}"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("checks"), "{err}");
        let err = ExperimentConfig::parse(&BASE.replace("version = 1", "version = 2"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("version"), "{err}");
        let err = ExperimentConfig::parse(&format!("{BASE}[space]\np1 = 2.0\np2 = 1.0\n"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("space.p2"), "{err}");
        let err = ExperimentConfig::parse(&format!(
            "{BASE}[exponent]\nq1 = {{ family = \"constant\", q0 = 0.5 }}\n"
        ))
        .unwrap_err()
        .to_string();
        assert!(err.contains("exponent.q1"), "{err}");
        let text = format!("checks = [\"hls\"]\n{BASE}[operator]\nbeta = 0.6\n");
        let err = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("n/(q1)_+"), "{err}");
    }
}
