//! One-parameter sweeps of the Herz-Morrey ratio experiment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use vexnorm::verify::{evaluate_theorem, Stability, TheoremParams};
use vexnorm::ExponentFunction;

use crate::config::ExperimentConfig;
use crate::runner::write_csv;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    Lambda,
    Beta,
    M,
    Level,
    KMax,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] = [
        SweepParam::Alpha,
        SweepParam::Lambda,
        SweepParam::Beta,
        SweepParam::M,
        SweepParam::Level,
        SweepParam::KMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Lambda => "lambda",
            SweepParam::Beta => "beta",
            SweepParam::M => "m",
            SweepParam::Level => "L",
            SweepParam::KMax => "k_max",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    fn apply(self, cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig, CliError> {
        let mut c = cfg.clone();
        let int = |v: f64| -> Result<i64, CliError> {
            if v.fract() != 0.0 || !v.is_finite() {
                return Err(CliError::Argument(format!(
                    "{} takes integer values, got {v}",
                    self.name()
                )));
            }
            Ok(v as i64)
        };
        match self {
            SweepParam::Alpha => c.space.alpha = Some(value),
            SweepParam::Lambda => c.space.lambda = value,
            SweepParam::Beta => c.operator.beta = value,
            SweepParam::M => {
                c.operator.m = u32::try_from(int(value)?).map_err(|_| negative(self, value))?
            }
            SweepParam::Level => {
                c.grid.level = u32::try_from(int(value)?).map_err(|_| negative(self, value))?
            }
            SweepParam::KMax => c.grid.k_max = int(value)? as i32,
        }
        c.validate()?;
        Ok(c)
    }
}

fn negative(p: SweepParam, v: f64) -> CliError {
    CliError::Argument(format!("{} must be non-negative, got {v}", p.name()))
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s || (s == "level" && *p == SweepParam::Level))
            .ok_or_else(|| {
                let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
                CliError::Argument(format!(
                    "unknown sweep parameter {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub sup_ratio: f64,
    pub refinement_delta: Option<f64>,
    pub shell_delta: Option<f64>,
    pub in_window: bool,
    pub witness: String,
    pub n: usize,
    pub k_min: i32,
    pub k_max: i32,
    pub level: u32,
}

/// Run the ratio experiment once per value and write `sweep_<param>.csv`.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
) -> Result<(PathBuf, Vec<SweepRow>), CliError> {
    if values.is_empty() {
        return Err(CliError::Argument(format!(
            "sweep over {param} needs at least one value"
        )));
    }
    let configs = values
        .iter()
        .map(|&v| param.apply(cfg, v))
        .collect::<Result<Vec<_>, _>>()?;
    for c in &configs {
        let s = c.grid.spec();
        for g in [s, s.refined(), s.widened()] {
            g.check_budget(c.grid.cell_budget)?;
        }
    }
    let mut rows = Vec::with_capacity(values.len());
    for (c, &value) in configs.iter().zip(values) {
        let spec = c.grid.spec();
        let op = &c.operator;
        let s = &c.space;
        let radius = 2f64.powi(spec.k_max + 1) * (spec.n as f64).sqrt();
        let q1 = ExponentFunction::new(c.exponent.q1, radius)?;
        let params = TheoremParams::new(
            &q1, op.beta, op.m, s.p1, s.p2, s.lambda, s.alpha, op.b, op.engine, spec,
        )?
        .with_b_scale(op.b_scale);
        let rep = evaluate_theorem(&params, &c.family.spec(), spec, Stability::BOTH)?;
        rows.push(SweepRow {
            param: param.name().to_string(),
            value,
            sup_ratio: rep.ratios.sup_ratio,
            refinement_delta: rep.ratios.refinement_delta,
            shell_delta: rep.ratios.shell_delta,
            in_window: rep.in_window,
            witness: rep.ratios.witness,
            n: spec.n,
            k_min: spec.k_min,
            k_max: spec.k_max,
            level: spec.level,
        });
    }
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let path = dir.join(format!("sweep_{}.csv", param.name()));
    write_csv(&path, &rows)?;
    Ok((path, rows))
}
