//! The Hardy-Littlewood maximal operator, the fractional integral `I_beta`
//! and its order-`m` BMO commutators on a dyadic grid.
//!
//! `I_beta f(x) = integral f(y) |x - y|^(beta - n) dy` is discretized with
//! cell-center sampling of `f`. Off-diagonal cells use the midpoint rule; the
//! cell containing `x` uses the exact integral of the kernel over that cell,
//! so the weakly singular diagonal is integrated rather than capped. The
//! resulting weights depend only on the lattice offset, which makes the sum a
//! discrete convolution: the `Fft` engine evaluates it by zero-padded FFT, the
//! `Direct` engine by explicit summation over the support of `f`.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::grid::{DyadicGrid, GridFunction};

/// How the fractional-integral convolution is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Explicit O(N * |supp f|) summation.
    Direct,
    /// Zero-padded FFT convolution, O(N log N).
    #[default]
    Fft,
}

/// Exact integral of `|t|^(beta - n)` over the cell `[-h/2, h/2]^n`.
pub fn diagonal_weight(n: usize, beta: f64, h: f64) -> f64 {
    let half = 0.5 * h;
    if n == 1 {
        return 2.0 * half.powf(beta) / beta;
    }
    // Inscribed disk in closed form; the four corner regions by polar
    // integration, which leaves a smooth angular integral:
    // (8/beta) (h/2)^beta int_0^{pi/4} (cos(theta)^-beta - 1) dtheta.
    let disk = 2.0 * std::f64::consts::PI * half.powf(beta) / beta;
    let corners =
        8.0 / beta * half.powf(beta) * simpson(|t| t.cos().powf(-beta) - 1.0, 0.0, FRAC_PI_4, 512);
    disk + corners
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Quadrature weights of `I_beta` on one grid, indexed by lattice offset,
/// with the FFT of the zero-padded kernel cached.
pub struct RieszOperator {
    grid: Arc<DyadicGrid>,
    beta: f64,
    /// Weights for offsets `-(side-1) ..= side-1` per axis, row-major in 2-D.
    weights: Vec<f64>,
    padded: usize,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RieszOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RieszOperator")
            .field("grid", &self.grid.spec())
            .field("beta", &self.beta)
            .finish()
    }
}

fn check_beta(beta: f64, n: usize) -> Result<()> {
    if !(beta > 0.0 && beta < n as f64) {
        return argument(format!("beta = {beta} outside (0, n) = (0, {n})"));
    }
    Ok(())
}

impl RieszOperator {
    pub fn new(grid: &Arc<DyadicGrid>, beta: f64) -> Result<Self> {
        let n = grid.dim();
        check_beta(beta, n)?;
        let side = grid.side();
        let h = grid.spacing();
        let mu = grid.cell_measure();
        let width = 2 * side - 1;
        let diag = diagonal_weight(n, beta, h);
        let weight = |d: [i64; 2]| -> f64 {
            if d == [0, 0] {
                diag
            } else {
                let dist = h * ((d[0] * d[0] + d[1] * d[1]) as f64).sqrt();
                mu * dist.powf(beta - n as f64)
            }
        };
        let off = side as i64 - 1;
        let weights: Vec<f64> = if n == 1 {
            (0..width).map(|i| weight([i as i64 - off, 0])).collect()
        } else {
            (0..width * width)
                .into_par_iter()
                .map(|i| weight([(i % width) as i64 - off, (i / width) as i64 - off]))
                .collect()
        };

        let padded = 2 * side;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded);
        let inverse = planner.plan_fft_inverse(padded);
        let mut kernel_hat = vec![Complex64::new(0.0, 0.0); padded.pow(n as u32)];
        let wrap = |d: i64| -> usize { d.rem_euclid(padded as i64) as usize };
        if n == 1 {
            for i in 0..width {
                kernel_hat[wrap(i as i64 - off)].re = weights[i];
            }
        } else {
            for iy in 0..width {
                for ix in 0..width {
                    let idx = wrap(ix as i64 - off) + padded * wrap(iy as i64 - off);
                    kernel_hat[idx].re = weights[ix + width * iy];
                }
            }
        }
        let mut op = RieszOperator {
            grid: grid.clone(),
            beta,
            weights,
            padded,
            kernel_hat: Vec::new(),
            forward,
            inverse,
        };
        op.transform(&mut kernel_hat, false);
        op.kernel_hat = kernel_hat;
        Ok(op)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &Arc<DyadicGrid> {
        &self.grid
    }

    /// Quadrature weight between two active cells.
    pub fn weight(&self, target: usize, source: usize) -> f64 {
        let side = self.grid.side();
        let width = 2 * side - 1;
        let (lt, ls) = (
            self.grid.lattice_index(target),
            self.grid.lattice_index(source),
        );
        if self.grid.dim() == 1 {
            self.weights[lt + side - 1 - ls]
        } else {
            let dx = (lt % side) + side - 1 - (ls % side);
            let dy = (lt / side) + side - 1 - (ls / side);
            self.weights[dx + width * dy]
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        let p = self.padded;
        if self.grid.dim() == 1 {
            plan.process(data);
            return;
        }
        for row in data.chunks_mut(p) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); p];
        for x in 0..p {
            for y in 0..p {
                col[y] = data[x + p * y];
            }
            plan.process(&mut col);
            for y in 0..p {
                data[x + p * y] = col[y];
            }
        }
    }

    fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(f.grid(), &self.grid) || f.grid().spec() == self.grid.spec() {
            Ok(())
        } else {
            argument("function lives on a different grid than the operator")
        }
    }

    fn apply_fft(&self, values: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let p = self.padded;
        let side = g.side();
        let mut buf = vec![Complex64::new(0.0, 0.0); p.pow(g.dim() as u32)];
        for (i, &v) in values.iter().enumerate() {
            let l = g.lattice_index(i);
            let idx = if g.dim() == 1 {
                l
            } else {
                (l % side) + p * (l / side)
            };
            buf[idx].re = v;
        }
        self.transform(&mut buf, false);
        for (a, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *a *= k;
        }
        self.transform(&mut buf, true);
        let scale = 1.0 / buf.len() as f64;
        (0..g.len())
            .map(|i| {
                let l = g.lattice_index(i);
                let idx = if g.dim() == 1 {
                    l
                } else {
                    (l % side) + p * (l / side)
                };
                buf[idx].re * scale
            })
            .collect()
    }

    fn apply_direct(&self, values: &[f64]) -> Vec<f64> {
        let support: Vec<usize> = (0..values.len()).filter(|&j| values[j] != 0.0).collect();
        (0..self.grid.len())
            .into_par_iter()
            .map(|i| support.iter().map(|&j| values[j] * self.weight(i, j)).sum())
            .collect()
    }

    /// `I_beta f` with the chosen engine.
    pub fn apply(&self, f: &GridFunction, engine: Engine) -> Result<GridFunction> {
        self.check_grid(f)?;
        let out = match engine {
            Engine::Direct => self.apply_direct(f.values()),
            Engine::Fft => self.apply_fft(f.values()),
        };
        GridFunction::new(self.grid.clone(), out)
    }

    /// `I^m_{beta,b} f(x) = integral f(y) (b(x) - b(y))^m |x - y|^(beta - n) dy`.
    ///
    /// `m = 0` is `apply`. For `m >= 1` the kernel is no longer a convolution
    /// and the direct engine is used, except that `m = 1` with the FFT engine
    /// goes through `b I_beta f - I_beta(b f)`.
    pub fn commutator(
        &self,
        f: &GridFunction,
        m: u32,
        b: Option<&GridFunction>,
        engine: Engine,
    ) -> Result<GridFunction> {
        if m == 0 {
            return self.apply(f, engine);
        }
        let b = match b {
            Some(b) => b,
            None => return argument(format!("commutator of order m = {m} needs a symbol b")),
        };
        self.check_grid(f)?;
        self.check_grid(b)?;
        let bv = b.values();
        if bv.iter().all(|&v| v == bv[0]) {
            // (b(x) - b(y))^m vanishes identically.
            return Ok(GridFunction::zeros(&self.grid));
        }
        if m == 1 && engine == Engine::Fft {
            let i_f = self.apply(f, Engine::Fft)?;
            let i_bf = self.apply(&b.mul(f)?, Engine::Fft)?;
            return b.mul(&i_f)?.sub(&i_bf);
        }
        let fv = f.values();
        let support: Vec<usize> = (0..fv.len()).filter(|&j| fv[j] != 0.0).collect();
        let out: Vec<f64> = (0..self.grid.len())
            .into_par_iter()
            .map(|i| {
                support
                    .iter()
                    .map(|&j| fv[j] * (bv[i] - bv[j]).powi(m as i32) * self.weight(i, j))
                    .sum()
            })
            .collect();
        GridFunction::new(self.grid.clone(), out)
    }
}

/// `I_beta f` on the grid of `f`.
pub fn fractional_integral(f: &GridFunction, beta: f64, engine: Engine) -> Result<GridFunction> {
    RieszOperator::new(f.grid(), beta)?.apply(f, engine)
}

/// Parameters of `I^m_{beta,b}`.
#[derive(Debug, Clone)]
pub struct FracIntegralSpec {
    pub beta: f64,
    pub m: u32,
    pub b: Option<GridFunction>,
    pub engine: Engine,
}

impl FracIntegralSpec {
    pub fn new(beta: f64, m: u32, b: Option<GridFunction>, engine: Engine) -> Result<Self> {
        if m >= 1 && b.is_none() {
            return argument(format!("commutator of order m = {m} needs a symbol b"));
        }
        Ok(FracIntegralSpec { beta, m, b, engine })
    }
}

/// `I^m_{beta,b} f`.
pub fn commutator(f: &GridFunction, spec: &FracIntegralSpec) -> Result<GridFunction> {
    if spec.m >= 1 && spec.b.is_none() {
        return argument(format!(
            "commutator of order m = {} needs a symbol b",
            spec.m
        ));
    }
    RieszOperator::new(f.grid(), spec.beta)?.commutator(f, spec.m, spec.b.as_ref(), spec.engine)
}

/// Hardy-Littlewood maximal function with the `r^-n` normalization,
/// `Mf(x) = max_r r^-n integral_{B(x,r)} |f|`, over the open balls of radii
/// `r = 2^j h`, `j = 0 ..= k_max - k_min + L`.
pub fn maximal(f: &GridFunction) -> GridFunction {
    let g = f.grid();
    let side = g.side();
    let n = g.dim();
    let h = g.spacing();
    let mu = g.cell_measure();
    let jmax = (g.k_max() - g.k_min()) as u32 + g.level();

    // Lattice of |f| * measure, zero off the active set, with row prefix sums.
    let rows = if n == 1 { 1 } else { side };
    let mut prefix = vec![0.0; rows * (side + 1)];
    for (i, &v) in f.values().iter().enumerate() {
        let l = g.lattice_index(i);
        let (x, y) = (l % side, l / side);
        prefix[y * (side + 1) + x + 1] = v.abs() * mu;
    }
    for y in 0..rows {
        let row = &mut prefix[y * (side + 1)..(y + 1) * (side + 1)];
        for x in 1..=side {
            row[x] += row[x - 1];
        }
    }
    let row_sum = |y: usize, lo: i64, hi: i64| -> f64 {
        let lo = lo.max(0) as usize;
        let hi = hi.min(side as i64 - 1);
        if (hi as usize) < lo || hi < 0 {
            return 0.0;
        }
        let row = &prefix[y * (side + 1)..(y + 1) * (side + 1)];
        row[hi as usize + 1] - row[lo]
    };

    let values: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let l = g.lattice_index(i);
            let (x, y) = ((l % side) as i64, (l / side) as i64);
            let mut best = 0.0f64;
            for j in 0..=jmax {
                let reach = 1i64 << j.min(62);
                let r = h * reach as f64;
                let total = if n == 1 {
                    // |dx| < 2^j cells.
                    row_sum(0, x - (reach - 1), x + (reach - 1))
                } else {
                    let reach = reach.min(2 * side as i64);
                    let mut s = 0.0;
                    for dy in -(reach - 1)..=(reach - 1) {
                        let yy = y + dy;
                        if yy < 0 || yy >= side as i64 {
                            continue;
                        }
                        // Largest |dx| with dx^2 + dy^2 < reach^2.
                        let rem = reach * reach - dy * dy;
                        let mut w = ((rem as f64).sqrt()) as i64;
                        while w * w >= rem {
                            w -= 1;
                        }
                        while (w + 1) * (w + 1) < rem {
                            w += 1;
                        }
                        s += row_sum(yy as usize, x - w, x + w);
                    }
                    s
                };
                best = best.max(total / r.powi(n as i32));
            }
            best
        })
        .collect();
    GridFunction::from_vec_unchecked(g.clone(), values)
}
