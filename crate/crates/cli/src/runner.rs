//! Executes the checks named in a config and writes their reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use vexnorm::exponents::check_log_holder_refined;
use vexnorm::norms::{duality_product, holder_pair, luxemburg_norm, oscillation_report};
use vexnorm::operators::RieszOperator;
use vexnorm::verify::symbol::ball_family;
use vexnorm::verify::{
    check_theorem, e123_constants, estimate_delta, relative_change, run_ratio_experiment,
    with_stability, FamilyKind, FamilySpec, RatioReport, Stability, TestFamily, TheoremParams,
};
use vexnorm::{ExponentFunction, GridSpec};

use crate::config::ExperimentConfig;
use crate::CliError;

/// Result of one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Headline numbers; keys are stable across runs.
    pub metrics: BTreeMap<String, Value>,
    /// CSV file name inside the output directory.
    pub csv: String,
    pub rows: usize,
}

/// Fixed-schema JSON summary of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub version: u32,
    pub grid: GridSpec,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
    pub failures: Vec<String>,
    pub note: Option<String>,
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Csv(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Ensure every grid a check may build stays within the configured budget.
fn check_budget(cfg: &ExperimentConfig, specs: &[GridSpec]) -> Result<(), CliError> {
    for s in specs {
        s.check_budget(cfg.grid.cell_budget)?;
        s.check_budget(vexnorm::grid::DEFAULT_CELL_BUDGET)?;
    }
    Ok(())
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    spec: GridSpec,
    dir: &'a Path,
}

impl Ctx<'_> {
    fn q1(&self, spec: GridSpec) -> Result<ExponentFunction, CliError> {
        let radius = 2f64.powi(spec.k_max + 1) * (spec.n as f64).sqrt();
        Ok(ExponentFunction::new(self.cfg.exponent.q1, radius)?)
    }

    fn theorem_params(&self) -> Result<TheoremParams, CliError> {
        let op = &self.cfg.operator;
        let s = &self.cfg.space;
        let q1 = self.q1(self.spec)?;
        Ok(TheoremParams::new(
            &q1, op.beta, op.m, s.p1, s.p2, s.lambda, s.alpha, op.b, op.engine, self.spec,
        )?
        .with_b_scale(op.b_scale))
    }

    fn finish<T: Serialize>(
        &self,
        name: &str,
        passed: bool,
        metrics: Value,
        rows: &[T],
    ) -> Result<CheckOutcome, CliError> {
        let csv = format!("{name}.csv");
        write_csv(&self.dir.join(&csv), rows)?;
        let metrics = match metrics {
            Value::Object(m) => m.into_iter().collect(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        Ok(CheckOutcome {
            name: name.to_string(),
            passed,
            metrics,
            csv,
            rows: rows.len(),
        })
    }
}

/// Run every check of `cfg`, writing `summary.json` and one CSV per check.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Summary, CliError> {
    cfg.validate()?;
    let spec = cfg.grid.spec();
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let ctx = Ctx {
        cfg,
        spec,
        dir: &dir,
    };

    let mut checks = Vec::new();
    for name in &cfg.checks {
        let outcome = match name.as_str() {
            "holder" => holder(&ctx)?,
            "lemma2" => lemma2(&ctx)?,
            "lemma3" => lemma3(&ctx)?,
            "lemma4" => lemma4(&ctx)?,
            "hls" => hls(&ctx)?,
            "theorem" => theorem(&ctx)?,
            "e123" => e123(&ctx)?,
            "logholder" => logholder(&ctx)?,
            other => unreachable!("validated check name {other}"),
        };
        checks.push(outcome);
    }
    let failures: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    let summary = Summary {
        version: crate::config::SCHEMA_VERSION,
        grid: spec,
        passed: failures.is_empty(),
        note: cfg
            .checks
            .is_empty()
            .then(|| "no checks requested".to_string()),
        checks,
        failures,
    };
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Json(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })?;
    Ok(summary)
}

#[derive(Serialize)]
struct HolderRow {
    trial: usize,
    lhs: f64,
    rhs: f64,
    holds: bool,
    n: usize,
    k_min: i32,
    k_max: i32,
    level: u32,
}

fn holder(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    check_budget(ctx.cfg, &[ctx.spec])?;
    let grid = ctx.spec.build()?;
    let q = ctx.q1(ctx.spec)?;
    let trials = ctx.cfg.holder.trials;
    let seed = ctx.cfg.family.seed;
    let fam = vexnorm::verify::build_test_family(
        &FamilySpec::new(FamilyKind::RandomPiecewise, 2 * trials, seed),
        &grid,
        None,
    )?;
    let mut rows = Vec::with_capacity(trials);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let p = holder_pair(&fam[2 * t].1, &fam[2 * t + 1].1, &q)?;
        if p.rhs > 0.0 {
            worst = worst.max(p.lhs / p.rhs);
        }
        rows.push(HolderRow {
            trial: t,
            lhs: p.lhs,
            rhs: p.rhs,
            holds: p.lhs <= p.rhs + 1e-12,
            n: ctx.spec.n,
            k_min: ctx.spec.k_min,
            k_max: ctx.spec.k_max,
            level: ctx.spec.level,
        });
    }
    let violations = rows.iter().filter(|r| !r.holds).count();
    ctx.finish(
        "holder",
        violations == 0,
        json!({"trials": trials, "violations": violations, "max_lhs_over_rhs": worst, "holder_constant": q.holder_constant()}),
        &rows,
    )
}

#[derive(Serialize)]
struct DeltaRow {
    delta: f64,
    c: f64,
    pairs: usize,
    n: usize,
    k_min: i32,
    k_max: i32,
    level: u32,
}

fn lemma2(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    let specs = [ctx.spec, ctx.spec.refined()];
    check_budget(ctx.cfg, &specs)?;
    let q = ctx.q1(ctx.spec)?;
    let mut rows = Vec::new();
    for s in specs {
        let d = estimate_delta(&q, &s.build()?)?;
        rows.push(DeltaRow {
            delta: d.delta,
            c: d.c,
            pairs: d.pairs,
            n: s.n,
            k_min: s.k_min,
            k_max: s.k_max,
            level: s.level,
        });
    }
    let drift = relative_change(rows[0].delta, rows[1].delta);
    let passed = rows.iter().all(|r| r.delta > 0.0 && r.delta <= 1.0)
        && drift <= ctx.cfg.thresholds.refinement;
    ctx.finish(
        "lemma2",
        passed,
        json!({"delta": rows[0].delta, "c": rows[0].c, "refinement_delta": drift}),
        &rows,
    )
}

#[derive(Serialize)]
struct DualityRow {
    k: i32,
    product: f64,
    n: usize,
    k_min: i32,
    k_max: i32,
    level: u32,
}

/// Duality products must stay within `[1/C, C]` for this `C`.
const DUALITY_BOUND: f64 = 5.0;
const DUALITY_REFINEMENT: f64 = 0.10;

fn lemma3(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    let specs = [ctx.spec, ctx.spec.refined()];
    check_budget(ctx.cfg, &specs)?;
    let q = ctx.q1(ctx.spec)?;
    let mut rows = Vec::new();
    let mut per_level = Vec::new();
    for s in specs {
        let grid = s.build()?;
        let mut products = BTreeMap::new();
        for k in grid.shell_range() {
            // Balls smaller than one cell are not resolved.
            let p = match duality_product(&q, &grid, k) {
                Ok(p) => p,
                Err(vexnorm::Error::Data(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            products.insert(k, p);
            rows.push(DualityRow {
                k,
                product: p,
                n: s.n,
                k_min: s.k_min,
                k_max: s.k_max,
                level: s.level,
            });
        }
        per_level.push(products);
    }
    let drift = per_level[0]
        .iter()
        .filter_map(|(k, a)| per_level[1].get(k).map(|b| relative_change(*a, *b)))
        .fold(0.0, f64::max);
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| {
        (a.min(r.product), b.max(r.product))
    });
    let passed = lo >= 1.0 / DUALITY_BOUND && hi <= DUALITY_BOUND && drift < DUALITY_REFINEMENT;
    ctx.finish(
        "lemma3",
        passed,
        json!({"min": lo, "max": hi, "refinement_delta": drift}),
        &rows,
    )
}

#[derive(Serialize)]
struct OscillationRow {
    m: u32,
    bmo: f64,
    sup_ratio: f64,
    two_sided_constant: f64,
    growth_constant: f64,
    n: usize,
    k_min: i32,
    k_max: i32,
    level: u32,
}

fn lemma4(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    check_budget(ctx.cfg, &[ctx.spec])?;
    let grid = ctx.spec.build()?;
    let q = ctx.q1(ctx.spec)?;
    let op = &ctx.cfg.operator;
    op.b.check_bmo(ctx.spec)?;
    let b = op.b.sample(&grid, op.b_scale)?;
    let balls = ball_family(&grid)?;
    let orders: Vec<u32> = if op.m == 0 { vec![1, 2] } else { vec![op.m] };
    let mut rows = Vec::new();
    for m in orders {
        let r = oscillation_report(&b, m, &q, &balls)?;
        rows.push(OscillationRow {
            m,
            bmo: r.bmo,
            sup_ratio: r.sup_ratio,
            two_sided_constant: r.two_sided_constant,
            growth_constant: r.growth_constant,
            n: ctx.spec.n,
            k_min: ctx.spec.k_min,
            k_max: ctx.spec.k_max,
            level: ctx.spec.level,
        });
    }
    let limit = ctx.cfg.thresholds.lemma_constant;
    let worst = rows
        .iter()
        .map(|r| r.two_sided_constant.max(r.growth_constant))
        .fold(0.0, f64::max);
    ctx.finish(
        "lemma4",
        worst <= limit,
        json!({"max_constant": worst, "limit": limit}),
        &rows,
    )
}

#[derive(Serialize)]
struct RatioCsvRow<'a> {
    id: &'a str,
    source_norm: f64,
    target_norm: f64,
    ratio: f64,
    n: usize,
    k_min: i32,
    k_max: i32,
    level: u32,
}

fn ratio_rows(rep: &RatioReport) -> Vec<RatioCsvRow<'_>> {
    rep.per_function
        .iter()
        .map(|r| RatioCsvRow {
            id: &r.id,
            source_norm: r.source_norm,
            target_norm: r.target_norm,
            ratio: r.ratio,
            n: rep.grid.n,
            k_min: rep.grid.k_min,
            k_max: rep.grid.k_max,
            level: rep.grid.level,
        })
        .collect()
}

fn ratio_metrics(rep: &RatioReport) -> Value {
    json!({
        "sup_ratio": rep.sup_ratio,
        "witness": rep.witness,
        "refinement_delta": rep.refinement_delta,
        "shell_delta": rep.shell_delta,
    })
}

fn hls(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    check_budget(ctx.cfg, &[ctx.spec, ctx.spec.refined()])?;
    let beta = ctx.cfg.operator.beta;
    let engine = ctx.cfg.operator.engine;
    let q1 = ctx.q1(ctx.spec)?;
    let q2 = q1.sobolev_partner(beta, ctx.spec.n)?;
    let family = TestFamily::new(&ctx.cfg.family.spec(), ctx.spec, Some(&q1))?;
    let rep = with_stability(ctx.spec, Stability::REFINEMENT, |s| {
        let grid = s.build()?;
        let op = RieszOperator::new(&grid, beta)?;
        run_ratio_experiment(
            s,
            |f| op.apply(f, engine),
            |f| luxemburg_norm(f, &q1),
            |g| luxemburg_norm(g, &q2),
            &family.sample(&grid)?,
        )
    })?;
    let passed = rep.sup_ratio.is_finite()
        && rep
            .refinement_delta
            .is_some_and(|d| d < ctx.cfg.thresholds.refinement);
    ctx.finish("hls", passed, ratio_metrics(&rep), &ratio_rows(&rep))
}

fn theorem(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    check_budget(ctx.cfg, &[ctx.spec, ctx.spec.refined(), ctx.spec.widened()])?;
    let params = ctx.theorem_params()?;
    let rep = check_theorem(&params, &ctx.cfg.family.spec(), ctx.spec, Stability::BOTH)?;
    let t = &ctx.cfg.thresholds;
    let r = &rep.ratios;
    let passed = r.sup_ratio.is_finite()
        && r.refinement_delta.is_some_and(|d| d < t.theorem_refinement)
        && r.shell_delta.is_some_and(|d| d < t.shell);
    let mut metrics = ratio_metrics(r);
    let w = params.window;
    metrics["alpha"] = json!(params.alpha);
    metrics["bmo"] = json!(rep.bmo);
    metrics["bmo_power"] = json!(rep.bmo_power);
    metrics["window"] = json!({
        "active": w.active,
        "theorem": [w.theorem.lo, w.theorem.hi],
        "alternate": [w.alternate.lo, w.alternate.hi],
        "alpha_in_theorem_window": w.theorem.contains(params.alpha),
        "alpha_in_alternate_window": w.alternate.contains(params.alpha),
    });
    ctx.finish("theorem", passed, metrics, &ratio_rows(r))
}

#[derive(Serialize)]
struct E123Row {
    c1: f64,
    c2: f64,
    c3: f64,
    split_holds: bool,
    n: usize,
    k_min: i32,
    k_max: i32,
    level: u32,
}

fn e123(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    let specs = [ctx.spec, ctx.spec.refined()];
    check_budget(ctx.cfg, &specs)?;
    let params = ctx.theorem_params()?;
    params.window.require(params.alpha)?;
    let family = TestFamily::new(&ctx.cfg.family.spec(), ctx.spec, Some(&params.q1))?;
    let mut rows = Vec::new();
    for s in specs {
        let c = e123_constants(&params, &family, s)?;
        rows.push(E123Row {
            c1: c.c1,
            c2: c.c2,
            c3: c.c3,
            split_holds: c.split_holds,
            n: s.n,
            k_min: s.k_min,
            k_max: s.k_max,
            level: s.level,
        });
    }
    let drift = [
        relative_change(rows[0].c1, rows[1].c1),
        relative_change(rows[0].c2, rows[1].c2),
        relative_change(rows[0].c3, rows[1].c3),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let passed = rows.iter().all(|r| r.split_holds) && drift < ctx.cfg.thresholds.e123_refinement;
    ctx.finish(
        "e123",
        passed,
        json!({"c1": rows[0].c1, "c2": rows[0].c2, "c3": rows[0].c3, "refinement_delta": drift}),
        &rows,
    )
}

#[derive(Serialize)]
struct LogHolderRow {
    c_local: f64,
    c_infinity: f64,
    n: usize,
    k_min: i32,
    k_max: i32,
    level: u32,
}

/// Extra refinement levels used to detect unbounded log-Hölder constants.
const LOG_HOLDER_LEVELS: u32 = 2;

fn logholder(ctx: &Ctx) -> Result<CheckOutcome, CliError> {
    let mut s = ctx.spec;
    for _ in 0..LOG_HOLDER_LEVELS {
        s = s.refined();
    }
    check_budget(ctx.cfg, &[s])?;
    let q = ctx.q1(ctx.spec)?;
    let rep = check_log_holder_refined(&q, ctx.spec, LOG_HOLDER_LEVELS, ctx.cfg.family.seed)?;
    let rows: Vec<LogHolderRow> = rep
        .levels
        .iter()
        .zip(&rep.per_level)
        .map(|(&level, c)| LogHolderRow {
            c_local: c.c_local,
            c_infinity: c.c_infinity,
            n: ctx.spec.n,
            k_min: ctx.spec.k_min,
            k_max: ctx.spec.k_max,
            level,
        })
        .collect();
    let passed = !rep.local_unbounded && !rep.infinity_unbounded;
    ctx.finish(
        "logholder",
        passed,
        json!({
            "c_local": finite_or_null(rep.constants.c_local),
            "c_infinity": finite_or_null(rep.constants.c_infinity),
            "local_unbounded": rep.local_unbounded,
            "infinity_unbounded": rep.infinity_unbounded,
        }),
        &rows,
    )
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
