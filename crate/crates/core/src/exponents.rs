//! Variable exponents `q(.)`, their conjugates and Sobolev partners, and
//! sample-based certificates for the two log-Hölder conditions.
//!
//! Every exponent here is radial and closed-form. Derived exponents (the
//! conjugate `q/(q-1)` and the partner `q2` with `1/q1 - 1/q2 = beta/n`) wrap
//! the base profile and evaluate the defining formula pointwise, so the
//! algebraic identities between them hold to rounding.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::grid::{DyadicGrid, GridSpec};

/// Closed-form radial exponent families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ExponentFamily {
    /// `q(x) = q0`.
    Constant { q0: f64 },
    /// `q(x) = qinf + a / ln(e + |x|)`.
    #[serde(rename = "logdecay")]
    LogDecay { qinf: f64, a: f64 },
    /// `q(x) = q0 + a exp(-|x|^2 / s^2)`.
    #[serde(rename = "gaussbump")]
    GaussBump { q0: f64, a: f64, s: f64 },
    /// `inner` for `|x| <= radius`, `outer` beyond. Discontinuous, so it fails
    /// the local log-Hölder condition; used to exercise that check.
    #[serde(skip)]
    Step { inner: f64, outer: f64, radius: f64 },
}

impl ExponentFamily {
    fn at_radius(&self, r: f64) -> f64 {
        match *self {
            ExponentFamily::Constant { q0 } => q0,
            ExponentFamily::LogDecay { qinf, a } => qinf + a / (std::f64::consts::E + r).ln(),
            ExponentFamily::GaussBump { q0, a, s } => q0 + a * (-(r * r) / (s * s)).exp(),
            ExponentFamily::Step {
                inner,
                outer,
                radius,
            } => {
                if r <= radius {
                    inner
                } else {
                    outer
                }
            }
        }
    }

    /// Exact range of the profile over `0 <= r <= r_max`. Each family is
    /// monotone in `r`, so the extremes sit at the endpoints.
    fn range(&self, r_max: f64) -> (f64, f64) {
        match *self {
            ExponentFamily::Step {
                inner,
                outer,
                radius,
            } => {
                if radius >= r_max {
                    (inner, inner)
                } else {
                    (inner.min(outer), inner.max(outer))
                }
            }
            _ => {
                let a = self.at_radius(0.0);
                let b = self.at_radius(r_max);
                (a.min(b), a.max(b))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ExponentFamily::Constant { q0 } => q0.is_finite(),
            ExponentFamily::LogDecay { qinf, a } => qinf.is_finite() && a.is_finite(),
            ExponentFamily::GaussBump { q0, a, s } => {
                q0.is_finite() && a.is_finite() && s.is_finite() && s > 0.0
            }
            ExponentFamily::Step {
                inner,
                outer,
                radius,
            } => inner.is_finite() && outer.is_finite() && radius > 0.0,
        };
        if !ok {
            return argument(format!("malformed exponent parameters {self:?}"));
        }
        // The box bounds miss the limit at infinity, which also has to stay
        // above 1 for the exponent to be in class P on the whole space.
        let limit = match *self {
            ExponentFamily::LogDecay { qinf, .. } => qinf,
            ExponentFamily::GaussBump { q0, .. } => q0,
            _ => return Ok(()),
        };
        if limit > 1.0 {
            Ok(())
        } else {
            argument(format!(
                "exponent not in class P: limit at infinity {limit} <= 1"
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Family(ExponentFamily),
    Conjugate(Arc<Profile>),
    /// `1/q2 = 1/base - shift`.
    SobolevPartner {
        base: Arc<Profile>,
        shift: f64,
    },
}

fn conj(q: f64) -> f64 {
    q / (q - 1.0)
}

impl Profile {
    fn at_radius(&self, r: f64) -> f64 {
        match self {
            Profile::Family(f) => f.at_radius(r),
            Profile::Conjugate(p) => conj(p.at_radius(r)),
            Profile::SobolevPartner { base, shift } => 1.0 / (1.0 / base.at_radius(r) - shift),
        }
    }

    fn range(&self, r_max: f64) -> (f64, f64) {
        match self {
            Profile::Family(f) => f.range(r_max),
            // q -> q/(q-1) is decreasing on (1, inf).
            Profile::Conjugate(p) => {
                let (lo, hi) = p.range(r_max);
                (conj(hi), conj(lo))
            }
            Profile::SobolevPartner { base, shift } => {
                let (lo, hi) = base.range(r_max);
                (1.0 / (1.0 / lo - shift), 1.0 / (1.0 / hi - shift))
            }
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match self {
            Profile::Family(ExponentFamily::Constant { q0 }) => Some(*q0),
            Profile::Family(_) => None,
            Profile::Conjugate(p) => p.constant_value().map(conj),
            Profile::SobolevPartner { base, shift } => {
                base.constant_value().map(|q| 1.0 / (1.0 / q - shift))
            }
        }
    }
}

/// A variable exponent in class P on a box of given radius, with cached
/// `q_minus = inf q` and `q_plus = sup q` over that box.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFunction {
    profile: Profile,
    q_minus: f64,
    q_plus: f64,
    box_radius: f64,
}

impl ExponentFunction {
    /// Exponent from a family, bounded over `|x| <= box_radius`.
    pub fn new(family: ExponentFamily, box_radius: f64) -> Result<Self> {
        family.validate()?;
        Self::from_profile(Profile::Family(family), box_radius)
    }

    /// Exponent bounded over the box of `grid`.
    pub fn on_grid(family: ExponentFamily, grid: &DyadicGrid) -> Result<Self> {
        Self::new(family, grid.box_radius())
    }

    pub fn constant(q0: f64) -> Result<Self> {
        Self::new(ExponentFamily::Constant { q0 }, 1.0)
    }

    fn from_profile(profile: Profile, box_radius: f64) -> Result<Self> {
        if !(box_radius > 0.0 && box_radius.is_finite()) {
            return argument(format!(
                "box radius must be positive and finite, got {box_radius}"
            ));
        }
        let (q_minus, q_plus) = profile.range(box_radius);
        if !(q_minus > 1.0) {
            return argument(format!("exponent not in class P: q_minus = {q_minus} <= 1"));
        }
        if !q_plus.is_finite() {
            return argument("exponent not in class P: q_plus is infinite");
        }
        Ok(ExponentFunction {
            profile,
            q_minus,
            q_plus,
            box_radius,
        })
    }

    /// Same exponent with bounds recomputed over a different box.
    pub fn with_box(&self, box_radius: f64) -> Result<Self> {
        Self::from_profile(self.profile.clone(), box_radius)
    }

    pub fn q_minus(&self) -> f64 {
        self.q_minus
    }

    pub fn q_plus(&self) -> f64 {
        self.q_plus
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    /// `q(x)` for a point of any dimension.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        self.profile.at_radius(r)
    }

    /// `q` at any point with `|x| = r`.
    pub fn at_radius(&self, r: f64) -> f64 {
        self.profile.at_radius(r)
    }

    /// `q` sampled at every active cell of a grid.
    pub fn sample(&self, grid: &DyadicGrid) -> Vec<f64> {
        (0..grid.len())
            .map(|i| self.profile.at_radius(grid.radius(i)))
            .collect()
    }

    /// The value when the exponent is constant, looking through derived
    /// wrappers.
    pub fn constant_value(&self) -> Option<f64> {
        self.profile.constant_value()
    }

    /// `r_q = 1 + 1/q_minus - 1/q_plus`, the generalized Hölder constant.
    pub fn holder_constant(&self) -> f64 {
        1.0 + 1.0 / self.q_minus - 1.0 / self.q_plus
    }

    /// Conjugate exponent `q'(x) = q(x) / (q(x) - 1)`.
    pub fn conjugate(&self) -> Result<Self> {
        if !(self.q_minus > 1.0) {
            return argument(format!("conjugate needs q_minus > 1, got {}", self.q_minus));
        }
        Self::from_profile(
            Profile::Conjugate(Arc::new(self.profile.clone())),
            self.box_radius,
        )
    }

    /// The exponent `q2` with `1/q(x) - 1/q2(x) = beta/n`; requires
    /// `0 < beta < n / q_plus`.
    pub fn sobolev_partner(&self, beta: f64, n: usize) -> Result<Self> {
        let bound = n as f64 / self.q_plus;
        if !(beta > 0.0 && beta < bound) {
            return argument(format!(
                "beta = {beta} outside (0, n/q_plus) = (0, {bound})"
            ));
        }
        Self::from_profile(
            Profile::SobolevPartner {
                base: Arc::new(self.profile.clone()),
                shift: beta / n as f64,
            },
            self.box_radius,
        )
    }
}

/// Largest sampled values of the two log-Hölder quotients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogHolderConstants {
    /// `max |q(x) - q(y)| * (-ln|x - y|)` over pairs with `|x - y| <= 1/2`.
    pub c_local: f64,
    /// `max |q(x) - q(y)| * ln(e + |x|)` over pairs with `|y| >= |x|`.
    pub c_infinity: f64,
}

/// Number of random continuum pairs added to the grid-node pairs.
pub const RANDOM_PAIRS: usize = 10_000;

fn local_quotient(q: &ExponentFunction, x: &[f64], y: &[f64]) -> Option<f64> {
    let d = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if d == 0.0 || d > 0.5 {
        return None;
    }
    Some((q.evaluate(x) - q.evaluate(y)).abs() * (-d.ln()))
}

fn decay_quotient(q: &ExponentFunction, x: &[f64], y: &[f64]) -> f64 {
    let nx = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let ny = y.iter().map(|c| c * c).sum::<f64>().sqrt();
    let (inner, outer, r) = if nx <= ny { (x, y, nx) } else { (y, x, ny) };
    (q.evaluate(inner) - q.evaluate(outer)).abs() * (std::f64::consts::E + r).ln()
}

/// Sample-based certificate for both log-Hölder conditions on one grid.
///
/// Pairs: every active cell against lattice neighbours at offsets `2^j` cells
/// along each axis (local condition), every cell against the cells `2^j`
/// places further out in radius order (decay condition), plus
/// [`RANDOM_PAIRS`] random pairs of each kind drawn from the active region.
pub fn check_log_holder(q: &ExponentFunction, grid: &DyadicGrid, seed: u64) -> LogHolderConstants {
    let n = grid.dim();
    let h = grid.spacing();
    let side = grid.side() as i64;
    let mut c_local = 0.0f64;
    let mut c_inf = 0.0f64;

    for i in 0..grid.len() {
        let li = grid.lattice_index(i) as i64;
        let coords = [li % side, li / side];
        for axis in 0..n {
            let mut step = 1i64;
            while step as f64 * h <= 0.5 {
                let mut c = coords;
                c[axis] += step;
                if c[axis] < side {
                    let lj = (c[0] + c[1] * side) as usize;
                    let j = grid.cell_at(lj);
                    if j != crate::grid::INACTIVE {
                        if let Some(v) = local_quotient(q, grid.point(i), grid.point(j)) {
                            c_local = c_local.max(v);
                        }
                    }
                }
                step *= 2;
            }
        }
    }

    let mut by_radius: Vec<usize> = (0..grid.len()).collect();
    by_radius.sort_by(|&a, &b| grid.radius(a).total_cmp(&grid.radius(b)));
    for p in 0..by_radius.len() {
        let mut step = 1usize;
        while p + step < by_radius.len() {
            let v = decay_quotient(q, grid.point(by_radius[p]), grid.point(by_radius[p + step]));
            c_inf = c_inf.max(v);
            step *= 2;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = grid.box_radius();
    let inner = 2f64.powi(grid.k_min());
    let draw = |rng: &mut ChaCha8Rng| -> [f64; 2] {
        loop {
            let mut p = [0.0; 2];
            for c in p.iter_mut().take(n) {
                *c = rng.gen_range(-outer..outer);
            }
            let r = p[0].hypot(p[1]);
            if r > inner && r <= outer {
                return p;
            }
        }
    };
    for _ in 0..RANDOM_PAIRS {
        let x = draw(&mut rng);
        // Log-uniform separation down to one cell.
        let d = (rng.gen_range(h.ln()..0.5f64.ln())).exp();
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let y = if n == 1 {
            let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            [x[0] + s * d, 0.0]
        } else {
            [x[0] + d * theta.cos(), x[1] + d * theta.sin()]
        };
        if let Some(v) = local_quotient(q, &x[..n], &y[..n]) {
            c_local = c_local.max(v);
        }
        let z = draw(&mut rng);
        c_inf = c_inf.max(decay_quotient(q, &x[..n], &z[..n]));
    }

    LogHolderConstants {
        c_local,
        c_infinity: c_inf,
    }
}

/// Log-Hölder constants tracked over successive refinements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHolderReport {
    pub levels: Vec<u32>,
    pub per_level: Vec<LogHolderConstants>,
    /// Final constants; a component is `f64::INFINITY` when it kept growing
    /// under refinement.
    pub constants: LogHolderConstants,
    pub local_unbounded: bool,
    pub infinity_unbounded: bool,
}

/// Growth that does not decay across refinements: every increment is
/// material and the last is at least half the first.
fn grows_without_bound(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let incs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let floor = 1e-3 * values[0].abs().max(1.0);
    incs.iter().all(|&d| d > floor) && incs[incs.len() - 1] >= 0.5 * incs[0]
}

/// Run [`check_log_holder`] at `spec.level ..= spec.level + extra_levels` and
/// flag constants that grow without bound.
pub fn check_log_holder_refined(
    q: &ExponentFunction,
    spec: GridSpec,
    extra_levels: u32,
    seed: u64,
) -> Result<LogHolderReport> {
    let mut levels = Vec::new();
    let mut per_level = Vec::new();
    let mut s = spec;
    for _ in 0..=extra_levels {
        let grid = s.build()?;
        per_level.push(check_log_holder(q, &grid, seed));
        levels.push(s.level);
        s = s.refined();
    }
    let locals: Vec<f64> = per_level.iter().map(|c| c.c_local).collect();
    let infs: Vec<f64> = per_level.iter().map(|c| c.c_infinity).collect();
    let local_unbounded = grows_without_bound(&locals);
    let infinity_unbounded = grows_without_bound(&infs);
    let last = *per_level.last().expect("at least one level");
    Ok(LogHolderReport {
        levels,
        per_level,
        constants: LogHolderConstants {
            c_local: if local_unbounded {
                f64::INFINITY
            } else {
                last.c_local
            },
            c_infinity: if infinity_unbounded {
                f64::INFINITY
            } else {
                last.c_infinity
            },
        },
        local_unbounded,
        infinity_unbounded,
    })
}
