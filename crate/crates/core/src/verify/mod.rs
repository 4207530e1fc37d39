//! Experiment drivers: test families, sup-ratio estimation, power-law
//! regression for nested balls, the Herz-Morrey boundedness harness and the
//! acceptance suite.

pub mod acceptance;
pub mod delta;
pub mod family;
pub mod ratio;
pub mod symbol;
pub mod theorem;

pub use delta::{estimate_delta, AdmissibleWindow, DeltaEstimate, Window, WindowChoice};
pub use family::{build_test_family, FamilyKind, FamilySpec, TestFamily, TestFunction};
pub use ratio::{
    relative_change, run_ratio_experiment, with_stability, RatioReport, RatioRow, Stability,
};
pub use symbol::Symbol;
pub use theorem::{
    check_theorem, decompose_e123, e123_constants, evaluate_theorem, theorem_ratios, TheoremParams,
    TheoremReport, E123,
};
