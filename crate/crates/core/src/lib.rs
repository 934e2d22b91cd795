//! Preisach-type hysteresis for two-dimensional input signals.
//!
//! A relay is defined by a pair of curves taken from two one-parameter
//! families of nested open sets (a [`FoliationPair`]). Under the ordering
//! conditions checked by [`foliation::validate`], every relay is driven by two
//! scalar signals `K0(t) = c0(u(t))` and `K1(t) = c1(u(t))`, which makes the
//! superposed operator a weighted quadrature over the admissible parameter
//! region with scalar-Preisach-like memory.
//!
//! Module map:
//!
//! * [`foliation`]: domains, curve families, admissibility and geometry.
//! * [`relay`]: exit-time and threshold semantics of a single relay.
//! * [`plane`]: the relay grid, the hysteresis operator and wiping-out memory.
//! * [`variation`]: total variation, modulus of continuity and relay bounds.
//! * [`identify`]: weight recovery and curve recovery along transversal curves.

pub mod error;
pub mod expr;
pub mod field;
pub mod foliation;
pub mod geometry;
pub mod identify;
pub mod plane;
pub mod relay;
pub mod signal;
pub mod variation;

pub use error::{Error, Result};
pub use foliation::{Domain, Family, FoliationKind, FoliationPair, ParamPair, ParamRange, Sampling};
pub use geometry::Point2;
pub use plane::{HysteresisOutput, InitialState, MemoryInterface, RelayGrid, WeightFunction};
pub use relay::{KSignals, RelayEvent, RelayState};
pub use signal::Signal2D;

/// Absolute time tolerance for located switching instants.
pub const TIME_TOL: f64 = 1e-9;

/// Iteration cap for every bisection used to locate a crossing.
pub const MAX_BISECTIONS: usize = 64;
