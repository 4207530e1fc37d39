//! End-to-end experiments across grids, families and operators.

use vexnorm::exponents::check_log_holder_refined;
use vexnorm::norms::{herz_morrey_norm, luxemburg_norm, HerzMorreyParams};
use vexnorm::operators::{Engine, RieszOperator};
use vexnorm::verify::{
    check_theorem, evaluate_theorem, run_ratio_experiment, with_stability, FamilyKind, FamilySpec,
    Stability, Symbol, TestFamily, TheoremParams,
};
use vexnorm::{ExponentFamily, ExponentFunction, GridSpec};

fn spec() -> GridSpec {
    GridSpec::new(1, -6, 4, 12)
}

#[test]
fn commutator_lebesgue_ratio_is_refinement_stable() {
    let q1 = ExponentFunction::constant(2.0).unwrap();
    let q2 = q1.sobolev_partner(0.25, 1).unwrap();
    let family = TestFamily::new(&FamilySpec::new(FamilyKind::Mixed, 30, 5), spec(), None).unwrap();
    for m in 1..=2u32 {
        let rep = with_stability(spec(), Stability::REFINEMENT, |s| {
            let grid = s.build()?;
            let op = RieszOperator::new(&grid, 0.25)?;
            let b = Symbol::Log.sample(&grid, 1.0)?;
            let engine = if m == 1 { Engine::Fft } else { Engine::Direct };
            run_ratio_experiment(
                s,
                |f| op.commutator(f, m, Some(&b), engine),
                |f| luxemburg_norm(f, &q1),
                |g| luxemburg_norm(g, &q2),
                &family.sample(&grid)?,
            )
        })
        .unwrap();
        assert!(rep.sup_ratio.is_finite() && rep.sup_ratio > 0.0);
        assert!(
            rep.refinement_delta.unwrap() < 0.05,
            "m={m}: {:?}",
            rep.refinement_delta
        );
    }
}

#[test]
fn zeroth_order_theorem_matches_plain_ratio_experiment() {
    let q1 = ExponentFunction::constant(2.0).unwrap();
    let params = TheoremParams::new(
        &q1,
        0.25,
        0,
        1.0,
        1.5,
        0.1,
        None,
        Symbol::Log,
        Engine::Fft,
        spec(),
    )
    .unwrap();
    let fam_spec = FamilySpec::new(FamilyKind::Mixed, 12, 9);
    let rep = check_theorem(&params, &fam_spec, spec(), Stability::default()).unwrap();

    let grid = spec().build().unwrap();
    let q1g = q1.with_box(grid.box_radius()).unwrap();
    let q2g = q1g.sobolev_partner(0.25, 1).unwrap();
    let src = HerzMorreyParams::new(params.alpha, 0.1, 1.0, q1g).unwrap();
    let tgt = HerzMorreyParams::new(params.alpha, 0.1, 1.5, q2g).unwrap();
    let op = RieszOperator::new(&grid, 0.25).unwrap();
    let family = TestFamily::new(&fam_spec, spec(), None)
        .unwrap()
        .sample(&grid)
        .unwrap();
    let plain = run_ratio_experiment(
        spec(),
        |f| op.apply(f, Engine::Fft),
        |f| herz_morrey_norm(f, &src),
        |g| herz_morrey_norm(g, &tgt),
        &family,
    )
    .unwrap();
    for (a, b) in rep.ratios.per_function.iter().zip(&plain.per_function) {
        assert_eq!(a.id, b.id);
        assert!((a.ratio - b.ratio).abs() <= 1e-12 * b.ratio);
    }
}

#[test]
fn herz_space_case_is_supported() {
    let q1 = ExponentFunction::constant(2.0).unwrap();
    let params = TheoremParams::new(
        &q1,
        0.25,
        0,
        1.0,
        1.0,
        0.0,
        None,
        Symbol::Log,
        Engine::Fft,
        spec(),
    )
    .unwrap();
    assert!(params.admissible());
    let fam = FamilySpec::new(FamilyKind::ShellAtoms, 0, 0).with_shells(-3, 0);
    let rep = check_theorem(&params, &fam, spec(), Stability::REFINEMENT).unwrap();
    assert!(rep.ratios.sup_ratio.is_finite());
    assert!(rep.ratios.refinement_delta.unwrap() < 0.1);
}

#[test]
fn ratios_vary_continuously_across_the_window() {
    let q1 = ExponentFunction::constant(2.0).unwrap();
    let base = TheoremParams::new(
        &q1,
        0.25,
        1,
        1.0,
        1.0,
        0.1,
        None,
        Symbol::Log,
        Engine::Fft,
        spec(),
    )
    .unwrap();
    let w = base.window.active_window();
    let fam = FamilySpec::new(FamilyKind::ShellAtoms, 0, 0).with_shells(-3, 0);
    let mut sups = Vec::new();
    for i in 1..8 {
        let alpha = w.lo + (w.hi - w.lo) * i as f64 / 8.0;
        let mut p = base.clone();
        p.alpha = alpha;
        let rep = evaluate_theorem(&p, &fam, spec(), Stability::default()).unwrap();
        assert!(rep.in_window);
        assert!(rep.bmo_power > 0.0);
        sups.push(rep.ratios.sup_ratio);
    }
    assert!(sups.iter().all(|s| s.is_finite() && *s > 0.0));
    for pair in sups.windows(2) {
        assert!((pair[1] / pair[0] - 1.0).abs() < 0.5, "{sups:?}");
    }
}

#[test]
fn step_exponent_is_flagged_while_smooth_ones_are_not() {
    let s = GridSpec::new(1, -4, 2, 7);
    let step = ExponentFunction::new(
        ExponentFamily::Step {
            inner: 3.0,
            outer: 2.0,
            radius: 1.0,
        },
        4.0,
    )
    .unwrap();
    assert!(
        check_log_holder_refined(&step, s, 3, 1)
            .unwrap()
            .local_unbounded
    );
    let smooth =
        ExponentFunction::new(ExponentFamily::LogDecay { qinf: 2.0, a: 1.0 }, 4.0).unwrap();
    let rep = check_log_holder_refined(&smooth, s, 3, 1).unwrap();
    assert!(!rep.local_unbounded && !rep.infinity_unbounded);
}

#[test]
fn two_dimensional_pipeline_runs() {
    let s = GridSpec::new(2, -3, 3, 6);
    let q1 = ExponentFunction::constant(2.0).unwrap();
    let params = TheoremParams::new(
        &q1,
        0.5,
        1,
        1.0,
        1.0,
        0.2,
        None,
        Symbol::Log,
        Engine::Fft,
        s,
    )
    .unwrap();
    let rep = check_theorem(
        &params,
        &FamilySpec::new(FamilyKind::Gaussians, 4, 2),
        s,
        Stability::default(),
    )
    .unwrap();
    assert_eq!(rep.ratios.per_function.len(), 4);
    assert!(rep.ratios.sup_ratio.is_finite() && rep.ratios.sup_ratio > 0.0);
}
