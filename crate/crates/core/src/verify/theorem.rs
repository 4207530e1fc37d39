//! Herz-Morrey boundedness of `I^m_{beta,b}` as a sup-ratio experiment, and
//! the three-part split of its norm by source and target shell.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, Result};
use crate::exponents::ExponentFunction;
use crate::grid::{DyadicGrid, GridFunction, GridSpec};
use crate::norms::{
    bmo_norm, herz_morrey_from_shell_norms, herz_morrey_norm, shell_norms, HerzMorreyParams,
};
use crate::operators::{Engine, RieszOperator};
use crate::verify::delta::AdmissibleWindow;
use crate::verify::family::{FamilySpec, TestFamily};
use crate::verify::ratio::{run_ratio_experiment, with_stability, RatioReport, Stability};
use crate::verify::symbol::{ball_family, Symbol};

/// Parameters of one boundedness experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremParams {
    #[serde(skip)]
    pub q1: ExponentFunction,
    #[serde(skip)]
    pub q2: ExponentFunction,
    pub beta: f64,
    pub m: u32,
    pub p1: f64,
    pub p2: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub b: Symbol,
    /// Multiplier applied to the sampled symbol.
    pub b_scale: f64,
    pub engine: Engine,
    pub window: AdmissibleWindow,
}

impl TheoremParams {
    /// Validate the parameters, derive `q2` and estimate the window on the
    /// grid `spec`. `alpha = None` selects the midpoint of the active window;
    /// an explicit `alpha` is not required to lie inside it.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        q1: &ExponentFunction,
        beta: f64,
        m: u32,
        p1: f64,
        p2: f64,
        lambda: f64,
        alpha: Option<f64>,
        b: Symbol,
        engine: Engine,
        spec: GridSpec,
    ) -> Result<Self> {
        let n = spec.n;
        let grid = spec.build()?;
        let q1 = q1.with_box(grid.box_radius())?;
        let q2 = q1.sobolev_partner(beta, n)?;
        if !(p1 > 0.0 && p1 <= p2 && p2.is_finite()) {
            return argument(format!("need 0 < p1 <= p2 < inf, got p1 = {p1}, p2 = {p2}"));
        }
        // lambda = 0 is the Herz-space case.
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return argument(format!("lambda must be >= 0, got {lambda}"));
        }
        let window = AdmissibleWindow::estimate(&q1, &q2, lambda, &grid)?;
        let alpha = alpha.unwrap_or_else(|| window.active_window().midpoint());
        if !alpha.is_finite() {
            return argument("alpha must be finite");
        }
        Ok(TheoremParams {
            q1,
            q2,
            beta,
            m,
            p1,
            p2,
            lambda,
            alpha,
            b,
            b_scale: 1.0,
            engine,
            window,
        })
    }

    pub fn with_b_scale(mut self, scale: f64) -> Self {
        self.b_scale = scale;
        self
    }

    pub fn admissible(&self) -> bool {
        self.window.active_window().contains(self.alpha)
    }

    /// Exponents and symbol on one grid.
    fn on_grid(&self, grid: &Arc<DyadicGrid>) -> Result<GridSetup> {
        let q1 = self.q1.with_box(grid.box_radius())?;
        let q2 = self
            .q1
            .sobolev_partner(self.beta, grid.dim())?
            .with_box(grid.box_radius())?;
        let b = if self.m == 0 {
            None
        } else {
            Some(self.b.sample(grid, self.b_scale)?)
        };
        Ok(GridSetup {
            op: RieszOperator::new(grid, self.beta)?,
            source: HerzMorreyParams::new(self.alpha, self.lambda, self.p1, q1)?,
            target: HerzMorreyParams::new(self.alpha, self.lambda, self.p2, q2)?,
            b,
        })
    }
}

struct GridSetup {
    op: RieszOperator,
    source: HerzMorreyParams,
    target: HerzMorreyParams,
    b: Option<GridFunction>,
}

impl GridSetup {
    fn apply(&self, f: &GridFunction, m: u32, engine: Engine) -> Result<GridFunction> {
        self.op.commutator(f, m, self.b.as_ref(), engine)
    }
}

/// Ratio report for the Herz-Morrey bound with the predicted scaling factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub params: TheoremParams,
    pub ratios: RatioReport,
    /// `||b||_BMO` over the standard ball family of the base grid.
    pub bmo: f64,
    /// `||b||_BMO^m`, the factor the operator norm is expected to scale with.
    pub bmo_power: f64,
    pub in_window: bool,
}

/// `||I^m_{beta,b} f||_{MK(alpha,lambda,p2,q2)} / ||f||_{MK(alpha,lambda,p1,q1)}`
/// over the family on one grid.
pub fn theorem_ratios(
    params: &TheoremParams,
    family: &TestFamily,
    spec: GridSpec,
) -> Result<RatioReport> {
    let grid = spec.build()?;
    let setup = params.on_grid(&grid)?;
    let members = family.sample(&grid)?;
    run_ratio_experiment(
        spec,
        |f| setup.apply(f, params.m, params.engine),
        |f| herz_morrey_norm(f, &setup.source),
        |g| herz_morrey_norm(g, &setup.target),
        &members,
    )
}

/// Sup-ratio experiment for the Herz-Morrey bound on `spec`, with
/// refinement and shell stability, without requiring `alpha` to be
/// admissible. Symbols that fail [`Symbol::check_bmo`] are rejected.
pub fn evaluate_theorem(
    params: &TheoremParams,
    family_spec: &FamilySpec,
    spec: GridSpec,
    stability: Stability,
) -> Result<TheoremReport> {
    if params.m > 0 {
        params.b.check_bmo(spec)?;
    }
    let family = TestFamily::new(family_spec, spec, Some(&params.q1))?;
    let ratios = with_stability(spec, stability, |s| theorem_ratios(params, &family, s))?;
    let bmo = if params.m == 0 {
        0.0
    } else {
        let grid = spec.build()?;
        bmo_norm(
            &params.b.sample(&grid, params.b_scale)?,
            &ball_family(&grid)?,
        )
    };
    Ok(TheoremReport {
        params: params.clone(),
        ratios,
        bmo,
        bmo_power: bmo.powi(params.m as i32),
        in_window: params.admissible(),
    })
}

/// [`evaluate_theorem`] for admissible `alpha` only.
pub fn check_theorem(
    params: &TheoremParams,
    family_spec: &FamilySpec,
    spec: GridSpec,
    stability: Stability,
) -> Result<TheoremReport> {
    params.window.require(params.alpha)?;
    evaluate_theorem(params, family_spec, spec, stability)
}

/// The three-part split of `||I^m f||^p1` by source shell `j` relative to
/// target shell `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct E123 {
    pub first_shell: i32,
    /// Per target shell `k`: `sum_{j <= k-2} ||I^m(f chi_j) chi_k||_{q2}`.
    pub t1: Vec<f64>,
    /// Per target shell: the same sum over `|j - k| <= 1`.
    pub t2: Vec<f64>,
    /// Per target shell: the same sum over `j >= k + 2`.
    pub t3: Vec<f64>,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// `||I^m f||_{MK(alpha,lambda,p1,q2)}^p1`.
    pub total: f64,
    /// `max(1, 3^(p1 - 1))`, the constant of the three-term split.
    pub split_constant: f64,
}

impl E123 {
    /// `total <= split_constant (E1 + E2 + E3)` up to rounding.
    pub fn split_holds(&self) -> bool {
        self.total <= self.split_constant * (self.e1 + self.e2 + self.e3) * (1.0 + 1e-12)
    }
}

/// `sup_{k0} 2^(-k0 lambda p) sum_{k <= k0} 2^(k alpha p) t_k^p`.
fn truncated_power(first_shell: i32, t: &[f64], alpha: f64, lambda: f64, p: f64) -> f64 {
    herz_morrey_from_shell_norms(first_shell, t, alpha, lambda, p)
        .norm
        .powf(p)
}

/// Split `I^m_{beta,b} f` over source and target shells on `f`'s grid.
pub fn decompose_e123(f: &GridFunction, params: &TheoremParams) -> Result<E123> {
    let grid = f.grid();
    let setup = params.on_grid(grid)?;
    let shells: Vec<i32> = grid.shell_range().collect();
    let first = shells[0];
    let q2 = &setup.target.q;

    // Row j: target shell norms of I^m(f chi_j).
    let rows: Vec<Option<Vec<f64>>> = shells
        .par_iter()
        .map(|&j| {
            let piece = f.restrict_to_shell(j)?;
            if piece.is_zero() {
                return Ok(None);
            }
            Ok(Some(shell_norms(
                &setup.apply(&piece, params.m, params.engine)?,
                q2,
            )))
        })
        .collect::<Result<_>>()?;

    let len = shells.len();
    let (mut t1, mut t2, mut t3) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    for (jj, row) in rows.iter().enumerate() {
        let Some(row) = row else { continue };
        for kk in 0..len {
            let (j, k) = (jj as i64, kk as i64);
            if j <= k - 2 {
                t1[kk] += row[kk];
            } else if j >= k + 2 {
                t3[kk] += row[kk];
            } else {
                t2[kk] += row[kk];
            }
        }
    }
    let (a, l, p) = (params.alpha, params.lambda, params.p1);
    let whole = setup.apply(f, params.m, params.engine)?;
    let total = truncated_power(first, &shell_norms(&whole, q2), a, l, p);
    Ok(E123 {
        first_shell: first,
        e1: truncated_power(first, &t1, a, l, p),
        e2: truncated_power(first, &t2, a, l, p),
        e3: truncated_power(first, &t3, a, l, p),
        t1,
        t2,
        t3,
        total,
        split_constant: 3f64.powf(p - 1.0).max(1.0),
    })
}

/// Largest `E_i / (||b||^(m p1) ||f||^p1_{MK(alpha,lambda,p1,q1)})` over a
/// family, one entry per part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct E123Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Every member satisfied the three-term split.
    pub split_holds: bool,
}

/// Normalized E-part constants of a family on one grid.
pub fn e123_constants(
    params: &TheoremParams,
    family: &TestFamily,
    spec: GridSpec,
) -> Result<E123Constants> {
    let grid = spec.build()?;
    let setup = params.on_grid(&grid)?;
    let bm = match &setup.b {
        Some(b) if params.m > 0 => {
            bmo_norm(b, &ball_family(&grid)?).powf(params.m as f64 * params.p1)
        }
        _ => 1.0,
    };
    let members = family.sample(&grid)?;
    let parts: Vec<(E123, f64)> = members
        .par_iter()
        .map(|(_, f)| {
            let e = decompose_e123(f, params)?;
            Ok((e, herz_morrey_norm(f, &setup.source).powf(params.p1)))
        })
        .collect::<Result<_>>()?;
    let mut out = E123Constants {
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
        split_holds: true,
    };
    for (e, src) in &parts {
        let scale = bm * src;
        out.c1 = out.c1.max(e.e1 / scale);
        out.c2 = out.c2.max(e.e2 / scale);
        out.c3 = out.c3.max(e.e3 / scale);
        out.split_holds &= e.split_holds();
    }
    Ok(out)
}

/// `(sum |a_i|)^r <= sum |a_i|^r` for `0 < r <= 1`.
pub fn lp_embedding_holds(a: &[f64], r: f64) -> bool {
    let lhs = a.iter().map(|x| x.abs()).sum::<f64>().powf(r);
    let rhs: f64 = a.iter().map(|x| x.abs().powf(r)).sum();
    lhs <= rhs * (1.0 + 1e-12)
}
