//! BMO symbols `b` for the commutator experiments.

use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::norms::{bmo_norm, BallFamily};

/// A symbol defined on the whole space, sampled per grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Symbol {
    /// `ln |x|`, the standard unbounded BMO function.
    #[default]
    Log,
    Constant {
        c: f64,
    },
    /// The first coordinate `x_1`.
    Linear,
    /// `|x|^gamma`.
    Power {
        gamma: f64,
    },
}

/// Growth factor of the BMO norm per doubling of the box beyond which a
/// symbol is treated as not in BMO.
pub const BMO_GROWTH_LIMIT: f64 = 1.25;

/// Centers are subsampled to about this many per family when estimating BMO
/// norms.
const BMO_CENTERS: usize = 64;

impl Symbol {
    pub fn at(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        match *self {
            Symbol::Log => r.ln(),
            Symbol::Constant { c } => c,
            Symbol::Linear => x[0],
            Symbol::Power { gamma } => r.powf(gamma),
        }
    }

    /// `scale * b` on the grid.
    pub fn sample(
        &self,
        grid: &std::sync::Arc<crate::grid::DyadicGrid>,
        scale: f64,
    ) -> Result<GridFunction> {
        GridFunction::from_fn(grid, |x| scale * self.at(x))
    }

    /// BMO norm of the sampled symbol over the standard ball family.
    pub fn bmo_on(&self, spec: GridSpec, scale: f64) -> Result<f64> {
        let grid = spec.build()?;
        let b = self.sample(&grid, scale)?;
        Ok(bmo_norm(&b, &ball_family(&grid)?))
    }

    /// Reject symbols whose BMO norm keeps growing with the box, which is how
    /// polynomially growing functions show up on a truncated grid.
    pub fn check_bmo(&self, spec: GridSpec) -> Result<f64> {
        let small = GridSpec {
            level: spec.level.min(10),
            ..spec
        };
        let base = self.bmo_on(small, 1.0)?;
        let wide = self.bmo_on(small.widened().widened(), 1.0)?;
        if base > 0.0 && wide > BMO_GROWTH_LIMIT * BMO_GROWTH_LIMIT * base {
            return argument(format!(
                "symbol {self:?} is not in BMO: oscillation grows from {base:.4} to {wide:.4} \
                 as the box widens by a factor 4"
            ));
        }
        Ok(base)
    }
}

/// Dyadic balls around about [`BMO_CENTERS`] subsampled centers plus the
/// origin.
pub fn ball_family(grid: &crate::grid::DyadicGrid) -> Result<BallFamily> {
    BallFamily::dyadic(grid, (grid.len() / BMO_CENTERS).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_and_constants_pass_the_bmo_check() {
        let spec = GridSpec::new(1, -6, 3, 10);
        let b = Symbol::Log.check_bmo(spec).unwrap();
        assert!(b > 0.5 && b < 1.5, "{b}");
        assert_eq!(Symbol::Constant { c: 2.0 }.check_bmo(spec).unwrap(), 0.0);
    }

    #[test]
    fn growing_symbols_are_rejected() {
        let spec = GridSpec::new(1, -6, 3, 10);
        assert!(Symbol::Linear.check_bmo(spec).is_err());
        assert!(Symbol::Power { gamma: 2.0 }.check_bmo(spec).is_err());
    }

    #[test]
    fn config_syntax() {
        let s: Symbol = serde_json::from_str(r#"{"kind":"log"}"#).unwrap();
        assert_eq!(s, Symbol::Log);
        let s: Symbol = serde_json::from_str(r#"{"kind":"constant","c":1.5}"#).unwrap();
        assert_eq!(s, Symbol::Constant { c: 1.5 });
    }
}
