//! Sup-ratio estimation of operator norms with refinement and shell
//! stability.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

/// One family member's contribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub id: String,
    pub source_norm: f64,
    pub target_norm: f64,
    pub ratio: f64,
}

/// Estimated operator norm over a test family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub grid: GridSpec,
    pub sup_ratio: f64,
    /// Id of the member attaining `sup_ratio`.
    pub witness: String,
    pub per_function: Vec<RatioRow>,
    /// `|sup(L + 1) - sup(L)| / sup(L)`, when measured.
    pub refinement_delta: Option<f64>,
    /// `|sup(k_max + 1) - sup(k_max)| / sup(k_max)`, when measured.
    pub shell_delta: Option<f64>,
}

/// Relative change, with `0/0` counted as no change.
pub fn relative_change(base: f64, other: f64) -> f64 {
    if base == 0.0 && other == 0.0 {
        0.0
    } else {
        (other - base).abs() / base.abs()
    }
}

/// Apply `operator` to every member and compare norms.
///
/// Members are processed in parallel; the report keeps family order.
pub fn run_ratio_experiment<Op, Src, Tgt>(
    grid: GridSpec,
    operator: Op,
    source_norm: Src,
    target_norm: Tgt,
    family: &[(String, GridFunction)],
) -> Result<RatioReport>
where
    Op: Fn(&GridFunction) -> Result<GridFunction> + Sync,
    Src: Fn(&GridFunction) -> f64 + Sync,
    Tgt: Fn(&GridFunction) -> f64 + Sync,
{
    if family.is_empty() {
        return Err(Error::Config("test family is empty".into()));
    }
    let rows: Vec<RatioRow> = family
        .par_iter()
        .map(|(id, f)| {
            let source = source_norm(f);
            if !(source > 0.0) {
                return Err(Error::Data(format!(
                    "test function {id} has zero source norm"
                )));
            }
            let target = target_norm(&operator(f)?);
            Ok(RatioRow {
                id: id.clone(),
                source_norm: source,
                target_norm: target,
                ratio: target / source,
            })
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.ratio > rows[best].ratio {
            best = i;
        }
    }
    Ok(RatioReport {
        grid,
        sup_ratio: rows[best].ratio,
        witness: rows[best].id.clone(),
        per_function: rows,
        refinement_delta: None,
        shell_delta: None,
    })
}

/// Which stability measurements to add to a base report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stability {
    pub refinement: bool,
    pub shells: bool,
}

impl Stability {
    pub const BOTH: Stability = Stability {
        refinement: true,
        shells: true,
    };
    pub const REFINEMENT: Stability = Stability {
        refinement: true,
        shells: false,
    };
}

/// Run `experiment` on `spec` and on its refinement and/or widening, and
/// fill in the deltas of the base report.
pub fn with_stability<E>(spec: GridSpec, stability: Stability, experiment: E) -> Result<RatioReport>
where
    E: Fn(GridSpec) -> Result<RatioReport>,
{
    let mut base = experiment(spec)?;
    if stability.refinement {
        let fine = experiment(spec.refined())?;
        base.refinement_delta = Some(relative_change(base.sup_ratio, fine.sup_ratio));
    }
    if stability.shells {
        let wide = experiment(spec.widened())?;
        base.shell_delta = Some(relative_change(base.sup_ratio, wide.sup_ratio));
    }
    Ok(base)
}

impl RatioReport {
    /// Rows as CSV text: `id,source_norm,target_norm,ratio` plus the grid
    /// parameters on every row.
    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut out = String::from("id,source_norm,target_norm,ratio,n,k_min,k_max,level\n");
        for r in &self.per_function {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{},{},{},{}\n",
                r.id, r.source_norm, r.target_norm, r.ratio, g.n, g.k_min, g.k_max, g.level
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ExponentFunction;
    use crate::norms::luxemburg_norm;
    use crate::verify::family::{build_test_family, FamilyKind, FamilySpec};

    fn setup() -> (GridSpec, Vec<(String, GridFunction)>) {
        let spec = GridSpec::new(1, -4, 3, 9);
        let g = spec.build().unwrap();
        let fam = build_test_family(&FamilySpec::new(FamilyKind::Mixed, 15, 1), &g, None).unwrap();
        (spec, fam)
    }

    #[test]
    fn identity_and_doubling() {
        let (spec, fam) = setup();
        let q = ExponentFunction::constant(2.0).unwrap();
        let norm = |f: &GridFunction| luxemburg_norm(f, &q);
        let id = run_ratio_experiment(spec, |f| Ok(f.clone()), norm, norm, &fam).unwrap();
        assert!(id.per_function.iter().all(|r| r.ratio == 1.0));
        assert_eq!(id.sup_ratio, 1.0);
        let two = run_ratio_experiment(spec, |f| Ok(f.scaled(2.0)), norm, norm, &fam).unwrap();
        assert!((two.sup_ratio - 2.0).abs() < 1e-7);
        assert!(two.per_function.iter().all(|r| r.ratio >= 0.0));
    }

    #[test]
    fn zero_member_is_a_data_error_naming_it() {
        let (spec, mut fam) = setup();
        let g = fam[0].1.grid().clone();
        fam.push(("ghost".into(), GridFunction::zeros(&g)));
        let q = ExponentFunction::constant(2.0).unwrap();
        let norm = |f: &GridFunction| luxemburg_norm(f, &q);
        match run_ratio_experiment(spec, |f| Ok(f.clone()), norm, norm, &fam) {
            Err(Error::Data(msg)) => assert!(msg.contains("ghost")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_has_one_row_per_member() {
        let (spec, fam) = setup();
        let q = ExponentFunction::constant(2.0).unwrap();
        let norm = |f: &GridFunction| luxemburg_norm(f, &q);
        let rep = run_ratio_experiment(spec, |f| Ok(f.clone()), norm, norm, &fam).unwrap();
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), fam.len() + 1);
        assert!(csv.lines().nth(1).unwrap().ends_with(",1,-4,3,9"));
    }

    #[test]
    fn relative_change_handles_zero() {
        assert_eq!(relative_change(0.0, 0.0), 0.0);
        assert!((relative_change(2.0, 2.2) - 0.1).abs() < 1e-12);
    }
}
