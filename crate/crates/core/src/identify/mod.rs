//! Identification along transversal curves.
//!
//! Inputs confined to a transversal curve reduce the model to a scalar
//! Preisach operator in the arc length `s`. Measuring the first-order
//! transition function `psi(s0, s1)` and differentiating it recovers the
//! weight; with a family of transversals and a known weight it recovers
//! the curves themselves.

mod curves;
mod surface;
mod transversal;

pub use curves::{recover_curves, CurveRecovery, CurveRecoveryConfig, LevelCloud, SkippedLevel, TaggedCurve};
pub use surface::{
    extract_phi, jacobian_grid, measure_transition_surface, recover_weight, Lattice, PhiGrid, RecoveredWeight,
    TransitionSurface, Triangle,
};
pub use transversal::{restrict_relay, BoundCurve, ScalarRelay, TransversalCurve};

#[cfg(test)]
mod tests;
