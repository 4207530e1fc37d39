//! Test-function families for sup-ratio experiments.
//!
//! Members are continuous descriptions in absolute coordinates, so the same
//! family can be sampled on a grid, its refinement and its widening. Every
//! member is supported in `|x| <= 2^(k_max - 1)` of the grid the family was
//! built for, and every feature spans at least four cells of that grid.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::exponents::ExponentFunction;
use crate::grid::{DyadicGrid, GridFunction, GridSpec};

/// Which functions a family contains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `chi_{A_k}` for each shell in a range.
    ShellAtoms,
    Gaussians,
    RandomPiecewise,
    Oscillatory,
    /// `|x|^(-gamma)` on a ball around the origin.
    Powerlaw,
    /// Every shell atom of the inner half, then gaussians, piecewise and
    /// oscillatory members in turn.
    Mixed,
}

impl FamilyKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "shell_atoms" => FamilyKind::ShellAtoms,
            "gaussians" => FamilyKind::Gaussians,
            "random_piecewise" => FamilyKind::RandomPiecewise,
            "oscillatory" => FamilyKind::Oscillatory,
            "powerlaw" => FamilyKind::Powerlaw,
            "mixed" => FamilyKind::Mixed,
            other => return argument(format!("unknown family kind {other:?}")),
        })
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::ShellAtoms => "shell_atoms",
            FamilyKind::Gaussians => "gaussians",
            FamilyKind::RandomPiecewise => "random_piecewise",
            FamilyKind::Oscillatory => "oscillatory",
            FamilyKind::Powerlaw => "powerlaw",
            FamilyKind::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

/// Everything needed to rebuild a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    /// Number of members; shell-atom families have one member per shell.
    pub size: usize,
    pub seed: u64,
    /// Shell range for atoms, defaulting to every shell of the inner half.
    #[serde(default)]
    pub shells: Option<(i32, i32)>,
    /// Decay exponent of power-law members.
    #[serde(default)]
    pub gamma: Option<f64>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, size: usize, seed: u64) -> Self {
        FamilySpec {
            kind,
            size,
            seed,
            shells: None,
            gamma: None,
        }
    }

    pub fn with_shells(mut self, lo: i32, hi: i32) -> Self {
        self.shells = Some((lo, hi));
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    ShellAtom {
        k: i32,
    },
    Gaussian {
        center: [f64; 2],
        width: f64,
        amp: f64,
    },
    /// Axis-aligned boxes `(lo, hi, value)`; later boxes overwrite earlier.
    Piecewise {
        pieces: Vec<([f64; 2], [f64; 2], f64)>,
    },
    /// `sin(freq x_1 + phase) (1 - |x|^2 / radius^2)_+`.
    Oscillatory {
        freq: f64,
        phase: f64,
        radius: f64,
    },
    /// `|x|^(-gamma)` on `|x| <= radius`.
    PowerLaw {
        gamma: f64,
        radius: f64,
    },
}

/// One named family member.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: String,
    pub shape: Shape,
    /// Members vanish outside this radius.
    pub support: f64,
}

impl TestFunction {
    pub fn at(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > self.support {
            return 0.0;
        }
        match &self.shape {
            Shape::ShellAtom { k } => {
                if r > 2f64.powi(k - 1) && r <= 2f64.powi(*k) {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Gaussian { center, width, amp } => {
                let d2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                if d2 > 16.0 * width * width {
                    0.0
                } else {
                    amp * (-d2 / (width * width)).exp()
                }
            }
            Shape::Piecewise { pieces } => {
                let mut v = 0.0;
                for (lo, hi, val) in pieces {
                    if x.iter().enumerate().all(|(i, &c)| c >= lo[i] && c < hi[i]) {
                        v = *val;
                    }
                }
                v
            }
            Shape::Oscillatory {
                freq,
                phase,
                radius,
            } => {
                let envelope = 1.0 - r * r / (radius * radius);
                if envelope <= 0.0 {
                    0.0
                } else {
                    (freq * x[0] + phase).sin() * envelope
                }
            }
            Shape::PowerLaw { gamma, radius } => {
                if r <= *radius {
                    r.powf(-gamma)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, grid: &Arc<DyadicGrid>) -> Result<GridFunction> {
        GridFunction::from_fn(grid, |x| self.at(x))
    }
}

/// A deterministic family of test functions.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFamily {
    pub spec: FamilySpec,
    pub members: Vec<TestFunction>,
}

impl TestFamily {
    /// Build the family for grids derived from `grid`. Power-law members are
    /// checked against the source exponent `source`.
    pub fn new(
        spec: &FamilySpec,
        grid: GridSpec,
        source: Option<&ExponentFunction>,
    ) -> Result<Self> {
        grid.validate()?;
        let n = grid.n;
        let h = grid.spacing();
        let support = 2f64.powi(grid.k_max - 1);
        let inner_lo = grid.k_min + 1;
        let inner_hi = grid.k_max - 1;
        if inner_hi < inner_lo {
            return argument("grid has no shells inside the inner half of the box");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut members = Vec::new();

        let atoms = |lo: i32, hi: i32| -> Result<Vec<TestFunction>> {
            if lo > hi || lo < inner_lo || hi > inner_hi {
                return argument(format!(
                    "shell range [{lo}, {hi}] must lie within [{inner_lo}, {inner_hi}]"
                ));
            }
            Ok((lo..=hi)
                .map(|k| TestFunction {
                    id: format!("atom_k{k}"),
                    shape: Shape::ShellAtom { k },
                    support,
                })
                .collect())
        };

        match spec.kind {
            FamilyKind::ShellAtoms => {
                let (lo, hi) = spec.shells.unwrap_or((inner_lo, inner_hi));
                members = atoms(lo, hi)?;
            }
            FamilyKind::Powerlaw => {
                let gamma = spec
                    .gamma
                    .ok_or_else(|| Error::Argument("powerlaw family needs gamma".into()))?;
                let q = source.ok_or_else(|| {
                    Error::Argument("powerlaw family needs the source exponent".into())
                })?;
                // |x|^(-gamma q(x)) is integrable at the origin iff gamma q(0) < n.
                let q0 = q.at_radius(0.0);
                if !(gamma >= 0.0) || gamma * q0 >= n as f64 {
                    return Err(Error::Construction(format!(
                        "|x|^-{gamma} has infinite source norm: gamma q(0) = {} >= n = {n}",
                        gamma * q0
                    )));
                }
                for i in 0..spec.size.max(1) {
                    let k = inner_hi - (i as i32).rem_euclid(inner_hi - inner_lo + 1);
                    members.push(TestFunction {
                        id: format!("powerlaw_{i}"),
                        shape: Shape::PowerLaw {
                            gamma,
                            radius: 2f64.powi(k),
                        },
                        support,
                    });
                }
            }
            kind => {
                let cycle: &[FamilyKind] = match kind {
                    FamilyKind::Mixed => {
                        members = atoms(inner_lo, inner_hi)?;
                        members.truncate(spec.size);
                        &[
                            FamilyKind::Gaussians,
                            FamilyKind::RandomPiecewise,
                            FamilyKind::Oscillatory,
                        ]
                    }
                    FamilyKind::Gaussians => &[FamilyKind::Gaussians],
                    FamilyKind::RandomPiecewise => &[FamilyKind::RandomPiecewise],
                    _ => &[FamilyKind::Oscillatory],
                };
                let mut i = 0;
                while members.len() < spec.size {
                    let which = cycle[i % cycle.len()];
                    let shape = random_shape(which, n, h, support, &mut rng);
                    members.push(TestFunction {
                        id: format!("{which}_{i}"),
                        shape,
                        support,
                    });
                    i += 1;
                }
            }
        }
        if members.is_empty() {
            return argument("family is empty");
        }
        Ok(TestFamily {
            spec: spec.clone(),
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sample every member on `grid`.
    pub fn sample(&self, grid: &Arc<DyadicGrid>) -> Result<Vec<(String, GridFunction)>> {
        self.members
            .iter()
            .map(|m| Ok((m.id.clone(), m.sample(grid)?)))
            .collect()
    }
}

/// Sampled family on one grid.
pub fn build_test_family(
    spec: &FamilySpec,
    grid: &Arc<DyadicGrid>,
    source: Option<&ExponentFunction>,
) -> Result<Vec<(String, GridFunction)>> {
    TestFamily::new(spec, grid.spec(), source)?.sample(grid)
}

fn random_point(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let mut p = [0.0; 2];
        for c in p.iter_mut().take(n) {
            *c = rng.gen_range(-radius..radius);
        }
        if p[0].hypot(p[1]) <= radius {
            return p;
        }
    }
}

fn log_uniform(lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn random_shape(kind: FamilyKind, n: usize, h: f64, support: f64, rng: &mut ChaCha8Rng) -> Shape {
    let min_feature = 4.0 * h;
    match kind {
        FamilyKind::Gaussians => {
            let width = log_uniform(min_feature, support / 4.0, rng);
            // Keep the center far enough in that the peak is sampled.
            let center = random_point(n, support - width, rng);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            Shape::Gaussian {
                center,
                width,
                amp: sign * rng.gen_range(0.5..2.0),
            }
        }
        FamilyKind::RandomPiecewise => {
            let count = rng.gen_range(1..=6);
            let mut pieces = Vec::with_capacity(count);
            for _ in 0..count {
                let mut lo = [0.0; 2];
                let mut hi = [1.0; 2];
                let half = support / 2f64.sqrt();
                for a in 0..n {
                    let w = log_uniform(min_feature, half, rng);
                    let start = rng.gen_range(-half..half - w);
                    lo[a] = start;
                    hi[a] = start + w;
                }
                let mut v = rng.gen_range(0.25..2.0);
                if rng.gen_bool(0.5) {
                    v = -v;
                }
                pieces.push((lo, hi, v));
            }
            Shape::Piecewise { pieces }
        }
        _ => {
            let radius = log_uniform(support / 8.0, support, rng);
            let max_freq = std::f64::consts::TAU / (8.0 * h);
            let freq = log_uniform(1.0 / radius, max_freq, rng);
            Shape::Oscillatory {
                freq,
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
                radius,
            }
        }
    }
}
