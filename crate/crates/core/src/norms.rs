//! Modular, Luxemburg, BMO and Herz-Morrey norms on grid functions, plus the
//! quantities behind the standard variable-exponent lemmas (duality product,
//! oscillation powers).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{argument, Error, Result};
use crate::exponents::ExponentFunction;
use crate::grid::{DyadicGrid, GridFunction};
use crate::sum::pairwise_sum_by;

/// Nonzero magnitudes with their exponents; the only cells that contribute to
/// a modular.
struct ModularTerms {
    mag: Vec<f64>,
    exp: Vec<f64>,
    measure: f64,
}

impl ModularTerms {
    fn from_cells<I>(values: &[f64], q: &[f64], cells: I, measure: f64) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut mag = Vec::new();
        let mut exp = Vec::new();
        for i in cells {
            let a = values[i].abs();
            if a != 0.0 {
                mag.push(a);
                exp.push(q[i]);
            }
        }
        ModularTerms { mag, exp, measure }
    }

    fn eval(&self, eta: f64) -> f64 {
        pairwise_sum_by(self.mag.len(), |i| (self.mag[i] / eta).powf(self.exp[i])) * self.measure
    }

    /// Smallest `eta` with `eval(eta) <= 1`: bracket from `max |f|`, then
    /// bisect until the bracket cannot shrink in floating point.
    fn luxemburg(&self) -> f64 {
        if self.mag.is_empty() {
            return 0.0;
        }
        let eta0 = self.mag.iter().fold(0.0f64, |m, &a| m.max(a));
        let (mut lo, mut hi);
        if self.eval(eta0) <= 1.0 {
            hi = eta0;
            lo = 0.5 * eta0;
            while self.eval(lo) <= 1.0 {
                hi = lo;
                lo *= 0.5;
            }
        } else {
            lo = eta0;
            hi = 2.0 * eta0;
            while self.eval(hi) > 1.0 {
                lo = hi;
                hi *= 2.0;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// `sum_cells (|f| / eta)^q(x) * measure`.
pub fn modular(f: &GridFunction, q: &ExponentFunction, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return argument(format!("modular needs eta > 0, got {eta}"));
    }
    let grid = f.grid();
    let qs = q.sample(grid);
    Ok(ModularTerms::from_cells(f.values(), &qs, 0..f.len(), grid.cell_measure()).eval(eta))
}

/// Luxemburg norm `inf { eta > 0 : modular(f, q, eta) <= 1 }`.
///
/// The returned value always satisfies `modular(f, q, norm) <= 1`.
pub fn luxemburg_norm(f: &GridFunction, q: &ExponentFunction) -> f64 {
    let grid = f.grid();
    let qs = q.sample(grid);
    luxemburg_on_cells(f.values(), &qs, 0..f.len(), grid.cell_measure())
}

/// Luxemburg norm of `values` restricted to `cells`, with `q` pre-sampled.
pub fn luxemburg_on_cells<I>(values: &[f64], q: &[f64], cells: I, measure: f64) -> f64
where
    I: IntoIterator<Item = usize>,
{
    ModularTerms::from_cells(values, q, cells, measure).luxemburg()
}

/// `||f chi_k||_{q(.)}` for every shell `k` of the grid, in shell order.
pub fn shell_norms(f: &GridFunction, q: &ExponentFunction) -> Vec<f64> {
    let grid = f.grid();
    let qs = q.sample(grid);
    shell_norms_sampled(f, &qs)
}

pub(crate) fn shell_norms_sampled(f: &GridFunction, qs: &[f64]) -> Vec<f64> {
    let grid = f.grid();
    let shells: Vec<i32> = grid.shell_range().collect();
    shells
        .par_iter()
        .map(|&k| {
            let cells = grid.shell_cells(k).expect("shell in range");
            luxemburg_on_cells(f.values(), qs, cells.iter().copied(), grid.cell_measure())
        })
        .collect()
}

/// `(1/|S|) sum_S f * measure`.
pub fn mean_on_set(f: &GridFunction, cells: &[usize]) -> Result<f64> {
    if cells.is_empty() {
        return argument("mean over an empty set");
    }
    let v = f.values();
    Ok(pairwise_sum_by(cells.len(), |i| v[cells[i]]) / cells.len() as f64)
}

/// A closed ball `|x - center| <= radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Finite family of balls over which the BMO supremum is taken, with each
/// ball's active cells precomputed.
#[derive(Debug, Clone)]
pub struct BallFamily {
    balls: Vec<Ball>,
    cells: Vec<Vec<usize>>,
}

impl BallFamily {
    /// Balls from an explicit list; balls missing the grid are dropped.
    pub fn from_balls(grid: &DyadicGrid, balls: &[Ball]) -> Result<Self> {
        let mut out = Vec::new();
        let mut cells = Vec::new();
        for b in balls {
            let c = grid.ball_cells(&b.center[..grid.dim()], b.radius);
            if !c.is_empty() {
                out.push(*b);
                cells.push(c);
            }
        }
        if out.is_empty() {
            return argument("ball family does not intersect the grid");
        }
        Ok(BallFamily { balls: out, cells })
    }

    /// Radii `2^j`, `j in [k_min, k_max]`, centred at the origin and at every
    /// `stride`-th active cell center.
    pub fn dyadic(grid: &DyadicGrid, stride: usize) -> Result<Self> {
        if stride == 0 {
            return argument("center stride must be positive");
        }
        let mut centers = vec![[0.0, 0.0]];
        centers.extend((0..grid.len()).step_by(stride).map(|i| grid.center(i)));
        let mut balls = Vec::new();
        for c in centers {
            for j in grid.k_min()..=grid.k_max() {
                balls.push(Ball {
                    center: c,
                    radius: 2f64.powi(j),
                });
            }
        }
        Self::from_balls(grid, &balls)
    }

    /// The origin-centred balls `B_k`.
    pub fn origin_centered(grid: &DyadicGrid) -> Result<Self> {
        let balls: Vec<Ball> = grid
            .shell_range()
            .map(|k| Ball {
                center: [0.0, 0.0],
                radius: 2f64.powi(k),
            })
            .collect();
        Self::from_balls(grid, &balls)
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn cells(&self, index: usize) -> &[usize] {
        &self.cells[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ball, &[usize])> {
        self.balls
            .iter()
            .zip(self.cells.iter().map(|c| c.as_slice()))
    }
}

/// Mean oscillation `(1/|B|) sum_B |b - b_B|` over one cell set.
pub fn mean_oscillation(b: &GridFunction, cells: &[usize]) -> Result<f64> {
    let mean = mean_on_set(b, cells)?;
    let v = b.values();
    Ok(pairwise_sum_by(cells.len(), |i| (v[cells[i]] - mean).abs()) / cells.len() as f64)
}

/// BMO norm over a finite ball family, with the maximizing ball.
pub fn bmo_norm_with_witness(b: &GridFunction, balls: &BallFamily) -> (f64, Ball) {
    let osc: Vec<f64> = (0..balls.len())
        .into_par_iter()
        .map(|i| mean_oscillation(b, balls.cells(i)).expect("family balls are nonempty"))
        .collect();
    let mut best = 0;
    for (i, &o) in osc.iter().enumerate() {
        if o > osc[best] {
            best = i;
        }
    }
    (osc[best], balls.balls()[best])
}

/// `sup_B (1/|B|) integral_B |b - b_B|` over the family.
pub fn bmo_norm(b: &GridFunction, balls: &BallFamily) -> f64 {
    bmo_norm_with_witness(b, balls).0
}

/// `(alpha, lambda, p, q)` of a Herz-Morrey norm.
#[derive(Debug, Clone, PartialEq)]
pub struct HerzMorreyParams {
    pub alpha: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: ExponentFunction,
}

impl HerzMorreyParams {
    pub fn new(alpha: f64, lambda: f64, p: f64, q: ExponentFunction) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return argument(format!("Herz-Morrey p must lie in (0, inf), got {p}"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return argument(format!("Herz-Morrey lambda must be >= 0, got {lambda}"));
        }
        if !alpha.is_finite() {
            return argument("Herz-Morrey alpha must be finite");
        }
        Ok(HerzMorreyParams {
            alpha,
            lambda,
            p,
            q,
        })
    }
}

/// The truncated Herz-Morrey expression for every `k0` of the shell range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HerzMorreyProfile {
    pub first_shell: i32,
    /// `||f chi_k||_{q(.)}` per shell.
    pub shell_norms: Vec<f64>,
    /// `2^(-k0 lambda) (sum_{k <= k0} 2^(k alpha p) ||f chi_k||^p)^(1/p)` per `k0`.
    pub per_k0: Vec<f64>,
    pub argmax_k0: i32,
    pub norm: f64,
}

/// Assemble the Herz-Morrey norm from precomputed shell norms.
pub fn herz_morrey_from_shell_norms(
    first_shell: i32,
    shell_norms: &[f64],
    alpha: f64,
    lambda: f64,
    p: f64,
) -> HerzMorreyProfile {
    let mut acc = 0.0;
    let mut per_k0 = Vec::with_capacity(shell_norms.len());
    for (i, &s) in shell_norms.iter().enumerate() {
        let k = (first_shell + i as i32) as f64;
        acc += (k * alpha * p).exp2() * s.powf(p);
        per_k0.push((-k * lambda).exp2() * acc.powf(1.0 / p));
    }
    let mut best = 0;
    for (i, &v) in per_k0.iter().enumerate() {
        if v > per_k0[best] {
            best = i;
        }
    }
    HerzMorreyProfile {
        first_shell,
        shell_norms: shell_norms.to_vec(),
        norm: per_k0.get(best).copied().unwrap_or(0.0),
        argmax_k0: first_shell + best as i32,
        per_k0,
    }
}

pub fn herz_morrey_profile(f: &GridFunction, params: &HerzMorreyParams) -> HerzMorreyProfile {
    let norms = shell_norms(f, &params.q);
    herz_morrey_from_shell_norms(
        f.grid().k_min() + 1,
        &norms,
        params.alpha,
        params.lambda,
        params.p,
    )
}

/// `sup_{k0} 2^(-k0 lambda) (sum_{k <= k0} 2^(k alpha p) ||f chi_k||_{q(.)}^p)^(1/p)`
/// over the grid's shell range.
pub fn herz_morrey_norm(f: &GridFunction, params: &HerzMorreyParams) -> f64 {
    herz_morrey_profile(f, params).norm
}

/// Both sides of the generalized Hölder inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderPair {
    /// `sum |f g| * measure`
    pub lhs: f64,
    /// `r_q ||f||_{q(.)} ||g||_{q'(.)}`
    pub rhs: f64,
}

pub fn holder_pair(f: &GridFunction, g: &GridFunction, q: &ExponentFunction) -> Result<HolderPair> {
    let fg = f.mul(g)?;
    let lhs = pairwise_sum_by(fg.len(), |i| fg.values()[i].abs()) * f.grid().cell_measure();
    let qc = q.conjugate()?;
    let rhs = q.holder_constant() * luxemburg_norm(f, q) * luxemburg_norm(g, &qc);
    Ok(HolderPair { lhs, rhs })
}

/// `|B_k|^(-1) ||chi_{B_k}||_{q(.)} ||chi_{B_k}||_{q'(.)}`, with `|B_k|` the
/// grid measure of the ball.
pub fn duality_product(
    q: &ExponentFunction,
    grid: &std::sync::Arc<DyadicGrid>,
    k: i32,
) -> Result<f64> {
    let chi = GridFunction::characteristic_ball(grid, k)?;
    let cells = chi.support();
    if cells.is_empty() {
        return Err(Error::Data(format!("ball B_{k} contains no active cells")));
    }
    let measure = grid.measure_of(&cells);
    let qc = q.conjugate()?;
    Ok(luxemburg_norm(&chi, q) * luxemburg_norm(&chi, &qc) / measure)
}

/// `||(b - b_B)^m chi_B||_{q(.)} / ||chi_B||_{q(.)}` for one cell set.
pub fn oscillation_power_ratio(
    b: &GridFunction,
    m: u32,
    qs: &[f64],
    cells: &[usize],
) -> Result<f64> {
    let mean = mean_on_set(b, cells)?;
    let mu = b.grid().cell_measure();
    let dev: Vec<f64> = b
        .values()
        .iter()
        .map(|&v| (v - mean).powi(m as i32))
        .collect();
    let num = luxemburg_on_cells(&dev, qs, cells.iter().copied(), mu);
    let ones = vec![1.0; b.len()];
    let den = luxemburg_on_cells(&ones, qs, cells.iter().copied(), mu);
    Ok(num / den)
}

/// Oscillation-power estimates for a BMO symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub m: u32,
    pub bmo: f64,
    /// `sup_B ||(b - b_B)^m chi_B|| / ||chi_B||` over the family.
    pub sup_ratio: f64,
    /// Smallest `C` with `C^-1 bmo^m <= sup_ratio <= C bmo^m`.
    pub two_sided_constant: f64,
    /// Smallest `C` with `||(b - b_{B_i})^m chi_{B_j}|| <= C (j - i)^m bmo^m ||chi_{B_j}||`
    /// over all shell pairs `i < j`.
    pub growth_constant: f64,
}

/// Evaluate both oscillation-power estimates for `b` against the exponent `q`.
pub fn oscillation_report(
    b: &GridFunction,
    m: u32,
    q: &ExponentFunction,
    balls: &BallFamily,
) -> Result<OscillationReport> {
    if m == 0 {
        return argument("oscillation powers need m >= 1");
    }
    let grid = b.grid();
    let qs = q.sample(grid);
    let bmo = bmo_norm(b, balls);
    let ratios: Vec<f64> = (0..balls.len())
        .into_par_iter()
        .map(|i| oscillation_power_ratio(b, m, &qs, balls.cells(i)))
        .collect::<Result<_>>()?;
    let sup_ratio = ratios.iter().fold(0.0f64, |a, &r| a.max(r));
    let bm = bmo.powi(m as i32);
    let two_sided_constant = (sup_ratio / bm).max(bm / sup_ratio);

    let mu = grid.cell_measure();
    let balls_k: Vec<(i32, Vec<usize>)> = grid
        .shell_range()
        .map(|k| (k, grid.ball_cells(&[0.0, 0.0][..grid.dim()], 2f64.powi(k))))
        .filter(|(_, c)| !c.is_empty())
        .collect();
    let ones = vec![1.0; b.len()];
    let chi_norms: Vec<f64> = balls_k
        .iter()
        .map(|(_, c)| luxemburg_on_cells(&ones, &qs, c.iter().copied(), mu))
        .collect();
    let mut growth_constant = 0.0f64;
    for (ii, (i, ci)) in balls_k.iter().enumerate() {
        let mean_i = mean_on_set(b, ci)?;
        let dev: Vec<f64> = b
            .values()
            .iter()
            .map(|&v| (v - mean_i).powi(m as i32))
            .collect();
        for (jj, (j, cj)) in balls_k.iter().enumerate().skip(ii + 1) {
            let lhs = luxemburg_on_cells(&dev, &qs, cj.iter().copied(), mu);
            let scale = ((j - i) as f64).powi(m as i32) * bm * chi_norms[jj];
            growth_constant = growth_constant.max(lhs / scale);
        }
    }
    Ok(OscillationReport {
        m,
        bmo,
        sup_ratio,
        two_sided_constant,
        growth_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ExponentFamily;
    use std::sync::Arc;

    fn grid() -> Arc<DyadicGrid> {
        DyadicGrid::build(1, -6, 2, 10).unwrap()
    }

    fn interval(g: &Arc<DyadicGrid>, a: f64, b: f64) -> GridFunction {
        GridFunction::from_fn(g, |x| if x[0] >= a && x[0] <= b { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn modular_examples() {
        let g = grid();
        let f = interval(&g, 0.0, 1.0);
        let q3 = ExponentFunction::constant(3.0).unwrap();
        let q2 = ExponentFunction::constant(2.0).unwrap();
        // [0, 1] minus the excluded core of length 2^-6.
        let len = 1.0 - 2f64.powi(-6);
        assert!((modular(&f, &q3, 2.0).unwrap() - 0.125 * len).abs() < 1e-12);
        assert!((modular(&f, &q2, 1.0).unwrap() - len).abs() < 1e-12);
        assert_eq!(modular(&GridFunction::zeros(&g), &q2, 0.3).unwrap(), 0.0);
        assert!(modular(&f, &q2, 0.0).is_err());
        assert!(modular(&f, &q2, -1.0).is_err());
    }

    #[test]
    fn modular_is_strictly_decreasing_in_eta() {
        let g = grid();
        let f = GridFunction::from_fn(&g, |x| (-x[0].abs()).exp()).unwrap();
        let q =
            ExponentFunction::on_grid(ExponentFamily::LogDecay { qinf: 2.0, a: 1.0 }, &g).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..50 {
            let m = modular(&f, &q, 0.1 * i as f64).unwrap();
            assert!(m < prev);
            prev = m;
        }
    }

    #[test]
    fn luxemburg_examples() {
        let g = DyadicGrid::build(1, -12, 2, 14).unwrap();
        let q2 = ExponentFunction::constant(2.0).unwrap();
        let n1 = luxemburg_norm(&interval(&g, 0.0, 1.0), &q2);
        let n2 = luxemburg_norm(&interval(&g, 0.0, 2.0), &q2);
        assert!((n1 - 1.0).abs() < 1e-3, "{n1}");
        assert!((n2 - 2f64.sqrt()).abs() < 1e-3, "{n2}");
        assert_eq!(luxemburg_norm(&GridFunction::zeros(&g), &q2), 0.0);
    }

    #[test]
    fn luxemburg_matches_closed_form_for_constant_exponent() {
        let g = grid();
        let f = GridFunction::from_fn(&g, |x| (2.0 * x[0]).cos() + 0.3).unwrap();
        for p in [1.1, 1.5, 2.0, 3.7, 6.0] {
            let q = ExponentFunction::constant(p).unwrap();
            let closed = (f.values().iter().map(|v| v.abs().powf(p)).sum::<f64>()
                * g.cell_measure())
            .powf(1.0 / p);
            let lux = luxemburg_norm(&f, &q);
            assert!(
                (lux - closed).abs() <= 1e-6 * closed,
                "p={p}: {lux} vs {closed}"
            );
        }
    }

    /// Independent oracle: scan 10^5 values of eta and keep the smallest one
    /// whose modular is at most 1.
    #[test]
    fn luxemburg_matches_dense_eta_scan() {
        let g = grid();
        let f = GridFunction::from_fn(&g, |x| (-x[0].abs()).exp()).unwrap();
        let q =
            ExponentFunction::on_grid(ExponentFamily::LogDecay { qinf: 2.0, a: 1.0 }, &g).unwrap();
        let qs: Vec<f64> = (0..g.len()).map(|i| q.evaluate(g.point(i))).collect();
        let modular_at = |eta: f64| -> f64 {
            f.values()
                .iter()
                .zip(&qs)
                .map(|(v, e)| (v.abs() / eta).powf(*e))
                .sum::<f64>()
                * g.cell_measure()
        };
        let (lo, hi) = (0.5, 2.0);
        let steps = 100_000;
        let mut scan = hi;
        for i in 0..=steps {
            let eta = lo + (hi - lo) * i as f64 / steps as f64;
            if modular_at(eta) <= 1.0 {
                scan = eta;
                break;
            }
        }
        let lux = luxemburg_norm(&f, &q);
        assert!((lux - scan).abs() < 1e-4, "{lux} vs {scan}");
    }

    #[test]
    fn unit_modular_identity() {
        let g = grid();
        let q = ExponentFunction::on_grid(
            ExponentFamily::GaussBump {
                q0: 2.0,
                a: 0.5,
                s: 1.0,
            },
            &g,
        )
        .unwrap();
        let f = GridFunction::from_fn(&g, |x| 5.0 * x[0].sin()).unwrap();
        let n = luxemburg_norm(&f, &q);
        let m = modular(&f, &q, n).unwrap();
        assert!((1.0 - 1e-6..=1.0).contains(&m), "{m}");
    }

    #[test]
    fn mean_on_set_examples() {
        let g = grid();
        let c = GridFunction::constant(&g, 2.5);
        let all: Vec<usize> = (0..g.len()).collect();
        assert!((mean_on_set(&c, &all).unwrap() - 2.5).abs() < 1e-15);
        let x = GridFunction::from_fn(&g, |x| x[0]).unwrap();
        let unit = g.ball_cells(&[0.5], 0.5);
        // Midpoint-rule oracle on [0,1]; the core near 0 shifts the mean by O(2^k_min).
        assert!((mean_on_set(&x, &unit).unwrap() - 0.5).abs() < g.spacing() + 2f64.powi(-6));
        let chi = interval(&g, 0.0, 1.0);
        let big: Vec<usize> = g.ball_cells(&[0.0], 2.0);
        let frac = mean_on_set(&chi, &big).unwrap();
        let expect = g.measure_of(&chi.support()) / g.measure_of(&big);
        assert!((frac - expect).abs() < 1e-14);
        assert!(mean_on_set(&x, &[]).is_err());
    }

    #[test]
    fn bmo_examples() {
        let g = grid();
        let balls = BallFamily::dyadic(&g, 37).unwrap();
        assert_eq!(bmo_norm(&GridFunction::constant(&g, 4.0), &balls), 0.0);
        let heaviside = GridFunction::from_fn(&g, |x| if x[0] >= 0.0 { 1.0 } else { 0.0 }).unwrap();
        let origin = BallFamily::origin_centered(&g).unwrap();
        for (_, cells) in origin.iter() {
            assert!((mean_oscillation(&heaviside, cells).unwrap() - 0.5).abs() < 1e-14);
        }
        assert!((bmo_norm(&heaviside, &balls) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bmo_of_log_is_stable_under_widening() {
        let mut values = Vec::new();
        for k_max in [2, 4] {
            let g = DyadicGrid::build(1, -6, k_max, 10 + k_max as u32).unwrap();
            let b = GridFunction::from_fn(&g, |x| x[0].abs().ln()).unwrap();
            let balls = BallFamily::dyadic(&g, g.len() / 64).unwrap();
            values.push(bmo_norm(&b, &balls));
        }
        assert!((values[1] / values[0] - 1.0).abs() < 0.1, "{values:?}");
        assert!(values[0] > 0.7 && values[0] < 1.5);
    }

    #[test]
    fn herz_morrey_examples() {
        let g = grid();
        let q = ExponentFunction::constant(2.0).unwrap();
        let atom = GridFunction::characteristic_shell(&g, 0).unwrap();
        let params = HerzMorreyParams::new(0.7, 0.3, 1.5, q.clone()).unwrap();
        let hm = herz_morrey_norm(&atom, &params);
        let expect = g.measure_of(&atom.support()).sqrt();
        assert!((hm - expect).abs() < 1e-12, "{hm} vs {expect}");

        // lambda = 0 is the Herz norm: the full sum over shells.
        let f = GridFunction::from_fn(&g, |x| (-x[0] * x[0]).exp()).unwrap();
        let herz = HerzMorreyParams::new(0.4, 0.0, 2.0, q.clone()).unwrap();
        let norms = shell_norms(&f, &q);
        let direct = g
            .shell_range()
            .zip(&norms)
            .map(|(k, s)| 2f64.powf(k as f64 * 0.4 * 2.0) * s * s)
            .sum::<f64>()
            .sqrt();
        assert!((herz_morrey_norm(&f, &herz) - direct).abs() < 1e-12 * direct);

        let c = -3.7;
        let scaled = herz_morrey_norm(&f.scaled(c), &params);
        assert!((scaled - c.abs() * herz_morrey_norm(&f, &params)).abs() < 1e-12 * scaled);
        assert_eq!(herz_morrey_norm(&GridFunction::zeros(&g), &params), 0.0);
    }

    #[test]
    fn herz_morrey_params_are_validated() {
        let q = ExponentFunction::constant(2.0).unwrap();
        assert!(HerzMorreyParams::new(0.0, -0.1, 1.0, q.clone()).is_err());
        assert!(HerzMorreyParams::new(0.0, 0.1, 0.0, q.clone()).is_err());
        assert!(HerzMorreyParams::new(f64::NAN, 0.1, 1.0, q).is_err());
    }

    #[test]
    fn holder_examples() {
        let g = grid();
        let q = ExponentFunction::constant(2.0).unwrap();
        let f = interval(&g, 0.0, 1.0);
        let hp = holder_pair(&f, &f, &q).unwrap();
        assert!((hp.lhs - hp.rhs).abs() < 1e-12 && hp.lhs <= hp.rhs + 1e-12);
        let zero = holder_pair(&GridFunction::zeros(&g), &f, &q).unwrap();
        assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));
    }

    #[test]
    fn duality_product_is_one_for_constant_exponents() {
        let g = grid();
        let q = ExponentFunction::constant(3.0).unwrap();
        for k in -4..=2 {
            assert!((duality_product(&q, &g, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oscillation_of_constant_exponent_log() {
        let g = grid();
        let b = GridFunction::from_fn(&g, |x| x[0].abs().ln()).unwrap();
        let balls = BallFamily::dyadic(&g, 97).unwrap();
        let q = ExponentFunction::constant(2.0).unwrap();
        let r = oscillation_report(&b, 1, &q, &balls).unwrap();
        assert!(
            r.two_sided_constant >= 1.0 && r.two_sided_constant < 3.0,
            "{r:?}"
        );
        assert!(r.growth_constant > 0.0 && r.growth_constant < 10.0, "{r:?}");
        assert!(oscillation_report(&b, 0, &q, &balls).is_err());
    }
}
