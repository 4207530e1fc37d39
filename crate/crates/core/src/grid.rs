//! Uniform Cartesian discretization of R^n (n = 1, 2) organized by dyadic
//! annuli.
//!
//! The box `[-2^k_max, 2^k_max]^n` is split into `2^(L+1)` cells per axis of
//! side `h = 2^(k_max - L)`. A cell is *active* when its center satisfies
//! `2^k_min < |center| <= 2^k_max`; the core around the origin is dropped and,
//! in two dimensions, so are the box corners outside `B_{k_max}`. Every active
//! cell belongs to exactly one annulus `A_k = B_k \ B_{k-1}` with
//! `2^(k-1) < |center| <= 2^k`, `k_min < k <= k_max`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::sum::pairwise_sum_by;

/// Default upper bound on the number of lattice cells a grid may allocate.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 22;

/// Default inner truncation index.
pub const DEFAULT_K_MIN: i32 = -6;

/// Parameters identifying a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub k_min: i32,
    pub k_max: i32,
    pub level: u32,
}

impl GridSpec {
    pub fn new(n: usize, k_min: i32, k_max: i32, level: u32) -> Self {
        GridSpec {
            n,
            k_min,
            k_max,
            level,
        }
    }

    /// Cell side `2^(k_max - L)`.
    pub fn spacing(&self) -> f64 {
        2f64.powi(self.k_max - self.level as i32)
    }

    /// Cells per axis of the full lattice.
    pub fn side(&self) -> usize {
        1usize << (self.level + 1)
    }

    /// Same box, one refinement level finer.
    pub fn refined(&self) -> Self {
        GridSpec {
            level: self.level + 1,
            ..*self
        }
    }

    /// One more outer shell at the same cell spacing.
    pub fn widened(&self) -> Self {
        GridSpec {
            k_max: self.k_max + 1,
            level: self.level + 1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 1 && self.n != 2 {
            return argument(format!("dimension n must be 1 or 2, got {}", self.n));
        }
        if self.k_min >= self.k_max {
            return argument(format!(
                "empty shell range: k_min = {} must be below k_max = {}",
                self.k_min, self.k_max
            ));
        }
        if self.level < 1 {
            return argument("refinement level L must be at least 1");
        }
        if self.level > 30 {
            return argument(format!("refinement level L = {} is too large", self.level));
        }
        Ok(())
    }

    /// Resource error when the full lattice would exceed `budget` cells.
    pub fn check_budget(&self, budget: usize) -> Result<usize> {
        let total = self
            .side()
            .checked_pow(self.n as u32)
            .ok_or_else(|| Error::Resource("lattice size overflows".into()))?;
        if total > budget {
            return Err(Error::Resource(format!(
                "grid needs {total} lattice cells, budget is {budget}"
            )));
        }
        Ok(total)
    }

    pub fn build(&self) -> Result<Arc<DyadicGrid>> {
        DyadicGrid::build_with_budget(*self, DEFAULT_CELL_BUDGET)
    }
}

/// A truncated dyadic discretization of R^n. Immutable after construction.
#[derive(Debug)]
pub struct DyadicGrid {
    spec: GridSpec,
    h: f64,
    side: usize,
    lattice: Vec<usize>,
    lattice_to_cell: Vec<usize>,
    centers: Vec<[f64; 2]>,
    radii: Vec<f64>,
    shells: Vec<i32>,
    shell_cells: Vec<Vec<usize>>,
}

/// Marker for lattice cells that are not active.
pub const INACTIVE: usize = usize::MAX;

/// Index `k` with `2^(k-1) < r <= 2^k`.
pub fn shell_index(r: f64) -> i32 {
    debug_assert!(r > 0.0);
    let mut k = r.log2().ceil() as i32;
    while 2f64.powi(k) < r {
        k += 1;
    }
    while 2f64.powi(k - 1) >= r {
        k -= 1;
    }
    k
}

impl DyadicGrid {
    pub fn build(n: usize, k_min: i32, k_max: i32, level: u32) -> Result<Arc<DyadicGrid>> {
        GridSpec::new(n, k_min, k_max, level).build()
    }

    pub fn build_with_budget(spec: GridSpec, budget: usize) -> Result<Arc<DyadicGrid>> {
        spec.validate()?;
        let side = spec.side();
        let total = spec.check_budget(budget)?;
        let h = spec.spacing();
        let outer = 2f64.powi(spec.k_max);
        let inner = 2f64.powi(spec.k_min);
        let coord = |i: usize| -outer + (i as f64 + 0.5) * h;

        let mut lattice = Vec::new();
        let mut centers = Vec::new();
        let mut radii = Vec::new();
        let mut shells = Vec::new();
        let mut lattice_to_cell = vec![INACTIVE; total];
        for (idx, slot) in lattice_to_cell.iter_mut().enumerate() {
            let c = match spec.n {
                1 => [coord(idx), 0.0],
                _ => [coord(idx % side), coord(idx / side)],
            };
            let r = c[0].hypot(c[1]);
            if r <= inner || r > outer {
                continue;
            }
            *slot = lattice.len();
            lattice.push(idx);
            centers.push(c);
            radii.push(r);
            shells.push(shell_index(r));
        }
        let n_shells = (spec.k_max - spec.k_min) as usize;
        let mut shell_cells = vec![Vec::new(); n_shells];
        for (i, &k) in shells.iter().enumerate() {
            shell_cells[(k - spec.k_min - 1) as usize].push(i);
        }
        Ok(Arc::new(DyadicGrid {
            spec,
            h,
            side,
            lattice,
            lattice_to_cell,
            centers,
            radii,
            shells,
            shell_cells,
        }))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.n
    }

    pub fn k_min(&self) -> i32 {
        self.spec.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.spec.k_max
    }

    pub fn level(&self) -> u32 {
        self.spec.level
    }

    /// Cell side length `h`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Measure `h^n` of each cell.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.spec.n as i32)
    }

    /// Half-width `2^k_max` of the box.
    pub fn box_radius(&self) -> f64 {
        2f64.powi(self.spec.k_max)
    }

    /// Number of active cells.
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Cells per axis of the underlying lattice.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Flat lattice index of an active cell.
    pub fn lattice_index(&self, cell: usize) -> usize {
        self.lattice[cell]
    }

    /// Active cell at a lattice index, or [`INACTIVE`].
    pub fn cell_at(&self, lattice_index: usize) -> usize {
        self.lattice_to_cell[lattice_index]
    }

    /// Center of a cell; the second coordinate is 0 when n = 1.
    pub fn center(&self, cell: usize) -> [f64; 2] {
        self.centers[cell]
    }

    /// Center as a slice of length n.
    pub fn point(&self, cell: usize) -> &[f64] {
        &self.centers[cell][..self.spec.n]
    }

    pub fn radius(&self, cell: usize) -> f64 {
        self.radii[cell]
    }

    pub fn shell_of(&self, cell: usize) -> i32 {
        self.shells[cell]
    }

    /// Shell indices present on the grid, `k_min + 1 ..= k_max`.
    pub fn shell_range(&self) -> std::ops::RangeInclusive<i32> {
        self.spec.k_min + 1..=self.spec.k_max
    }

    /// Cells of annulus `A_k`, in grid order.
    pub fn shell_cells(&self, k: i32) -> Result<&[usize]> {
        self.check_shell(k)?;
        Ok(&self.shell_cells[(k - self.spec.k_min - 1) as usize])
    }

    pub(crate) fn check_shell(&self, k: i32) -> Result<()> {
        if k <= self.spec.k_min || k > self.spec.k_max {
            return argument(format!(
                "shell index {k} outside ({}, {}]",
                self.spec.k_min, self.spec.k_max
            ));
        }
        Ok(())
    }

    /// Grid measure of a set of cells.
    pub fn measure_of(&self, cells: &[usize]) -> f64 {
        cells.len() as f64 * self.cell_measure()
    }

    /// Total measure of the active cells.
    pub fn total_measure(&self) -> f64 {
        self.len() as f64 * self.cell_measure()
    }

    /// Cells whose center lies in the closed ball `|x - center| <= radius`.
    pub fn ball_cells(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let c = [center[0], center.get(1).copied().unwrap_or(0.0)];
        if self.spec.n == 1 {
            // Active cells are sorted by coordinate in one dimension.
            let lo = self.centers.partition_point(|p| p[0] < c[0] - radius);
            let hi = self.centers.partition_point(|p| p[0] <= c[0] + radius);
            return (lo..hi)
                .filter(|&i| (self.centers[i][0] - c[0]).abs() <= radius)
                .collect();
        }
        (0..self.len())
            .filter(|&i| {
                let p = self.centers[i];
                (p[0] - c[0]).hypot(p[1] - c[1]) <= radius
            })
            .collect()
    }
}

/// Real samples on the active cells of a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<DyadicGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<DyadicGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return argument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value at cell {i}")));
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Arc<DyadicGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        GridFunction { grid, values }
    }

    pub fn zeros(grid: &Arc<DyadicGrid>) -> Self {
        GridFunction {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<DyadicGrid>, c: f64) -> Self {
        GridFunction {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    /// Sample a function of the point (a slice of length n) at cell centers.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: &Arc<DyadicGrid>, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        GridFunction::new(grid.clone(), values)
    }

    /// `chi_{B_k}`: 1 on cells with `|center| <= 2^k`.
    pub fn characteristic_ball(grid: &Arc<DyadicGrid>, k: i32) -> Result<Self> {
        grid.check_shell(k)?;
        let r = 2f64.powi(k);
        let values = (0..grid.len())
            .map(|i| if grid.radius(i) <= r { 1.0 } else { 0.0 })
            .collect();
        Ok(GridFunction {
            grid: grid.clone(),
            values,
        })
    }

    /// `chi_{A_k}`.
    pub fn characteristic_shell(grid: &Arc<DyadicGrid>, k: i32) -> Result<Self> {
        GridFunction::constant(grid, 1.0).restrict_to_shell(k)
    }

    pub fn grid(&self) -> &Arc<DyadicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f * chi_k`: equal to `f` on `A_k` and zero elsewhere.
    pub fn restrict_to_shell(&self, k: i32) -> Result<Self> {
        self.grid.check_shell(k)?;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if self.grid.shell_of(i) == k { v } else { 0.0 })
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Keep the values on `cells`, zero elsewhere.
    pub fn restrict_to_cells(&self, cells: &[usize]) -> Self {
        let mut values = vec![0.0; self.len()];
        for &i in cells {
            values[i] = self.values[i];
        }
        GridFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.spec() == other.grid.spec()
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            argument("grid functions live on different grids")
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(GridFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Midpoint-rule integral over the active cells.
    pub fn integral(&self) -> f64 {
        pairwise_sum_by(self.len(), |i| self.values[i]) * self.grid.cell_measure()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Indices of cells where the function is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.values[i] != 0.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_example_grid() {
        let g = DyadicGrid::build(1, -4, 2, 8).unwrap();
        assert_eq!(g.spacing(), 1.0 / 64.0);
        assert_eq!(g.side(), 512);
        // [-4, 4] minus [-1/16, 1/16]: 8 cells of width 1/64 removed.
        assert_eq!(g.len(), 512 - 8);
        let max_r = (0..g.len()).map(|i| g.radius(i)).fold(0.0, f64::max);
        let min_r = (0..g.len())
            .map(|i| g.radius(i))
            .fold(f64::INFINITY, f64::min);
        assert!(max_r < 4.0 && max_r > 4.0 - 1.0 / 64.0);
        assert!(min_r > 1.0 / 16.0);
    }

    #[test]
    fn empty_shell_range_is_an_argument_error() {
        assert!(matches!(
            DyadicGrid::build(1, 0, 0, 8),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            DyadicGrid::build(3, -2, 2, 4),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            DyadicGrid::build(1, -2, 2, 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let spec = GridSpec::new(2, -3, 3, 9);
        assert!(matches!(
            DyadicGrid::build_with_budget(spec, 1000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn two_dimensional_lattice_size() {
        let g = DyadicGrid::build(2, -3, 3, 9).unwrap();
        assert_eq!(g.side(), 1024);
        assert_eq!(g.spacing(), 2f64.powi(3 - 9));
        // The disk of radius 8 covers about pi/4 of the 16 x 16 box.
        let frac = g.len() as f64 / (1024.0 * 1024.0);
        assert!((frac - std::f64::consts::FRAC_PI_4).abs() < 1e-3, "{frac}");
    }

    #[test]
    fn shell_index_boundaries() {
        assert_eq!(shell_index(1.0), 0);
        assert_eq!(shell_index(1.0 + 1e-12), 1);
        assert_eq!(shell_index(0.5), -1);
        assert_eq!(shell_index(0.75), 0);
        assert_eq!(shell_index(3.9), 2);
    }

    #[test]
    fn shells_partition_active_cells() {
        let g = DyadicGrid::build(1, -4, 3, 9).unwrap();
        let total: usize = g
            .shell_range()
            .map(|k| g.shell_cells(k).unwrap().len())
            .sum();
        assert_eq!(total, g.len());
        for k in g.shell_range() {
            for &i in g.shell_cells(k).unwrap() {
                let r = g.radius(i);
                assert!(2f64.powi(k - 1) < r && r <= 2f64.powi(k));
            }
        }
    }

    #[test]
    fn shell_measure_converges_to_annulus_length() {
        let g = DyadicGrid::build(1, -6, 2, 10).unwrap();
        for k in g.shell_range() {
            let m = g.measure_of(g.shell_cells(k).unwrap());
            let exact = 2.0 * (2f64.powi(k) - 2f64.powi(k - 1));
            assert!((m - exact).abs() <= 0.02 * exact, "k={k}: {m} vs {exact}");
        }
    }

    #[test]
    fn restriction_is_idempotent_and_partitions() {
        let g = DyadicGrid::build(1, -3, 2, 8).unwrap();
        let f = GridFunction::from_fn(&g, |x| (3.0 * x[0]).sin() + 0.1).unwrap();
        let mut acc = GridFunction::zeros(&g);
        for k in g.shell_range() {
            let fk = f.restrict_to_shell(k).unwrap();
            let again = fk.restrict_to_shell(k).unwrap();
            assert_eq!(fk.values(), again.values());
            acc = acc.add(&fk).unwrap();
        }
        assert_eq!(acc.values(), f.values());
        assert!(f.restrict_to_shell(-3).is_err());
        assert!(f.restrict_to_shell(3).is_err());
    }

    #[test]
    fn restriction_of_one_is_shell_indicator() {
        let g = DyadicGrid::build(1, -3, 2, 8).unwrap();
        let chi = GridFunction::constant(&g, 1.0)
            .restrict_to_shell(0)
            .unwrap();
        for i in 0..g.len() {
            let inside = g.radius(i) > 0.5 && g.radius(i) <= 1.0;
            assert_eq!(chi.values()[i], if inside { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn characteristic_balls() {
        let g = DyadicGrid::build(1, -4, 2, 8).unwrap();
        let top = GridFunction::characteristic_ball(&g, 2).unwrap();
        assert!(top.values().iter().all(|&v| v == 1.0));
        let b0 = GridFunction::characteristic_ball(&g, 0).unwrap();
        assert!((b0.integral() - (2.0 - 2.0 * 2f64.powi(-4))).abs() < 1e-12);
        for k in -3..=2 {
            let small = GridFunction::characteristic_ball(&g, k - 1);
            let big = GridFunction::characteristic_ball(&g, k).unwrap();
            if let Ok(small) = small {
                assert!(small.values().iter().zip(big.values()).all(|(a, b)| a <= b));
            }
        }
        assert!(GridFunction::characteristic_ball(&g, 3).is_err());
    }

    #[test]
    fn refinement_consistency_of_integrals() {
        for level in 8..11 {
            let a = DyadicGrid::build(1, -6, 2, level).unwrap();
            let b = DyadicGrid::build(1, -6, 2, level + 1).unwrap();
            let ia = GridFunction::from_fn(&a, |x| (-x[0] * x[0]).exp())
                .unwrap()
                .integral();
            let ib = GridFunction::from_fn(&b, |x| (-x[0] * x[0]).exp())
                .unwrap()
                .integral();
            assert!((ia - ib).abs() < 0.01 * ib);
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let a = DyadicGrid::build(2, -2, 1, 5).unwrap();
        let b = DyadicGrid::build(2, -2, 1, 5).unwrap();
        assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            assert_eq!(a.center(i), b.center(i));
            assert_eq!(a.lattice_index(i), b.lattice_index(i));
        }
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let g = DyadicGrid::build(1, -2, 1, 4).unwrap();
        let mut v = vec![0.0; g.len()];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(g, v), Err(Error::Data(_))));
    }
}
