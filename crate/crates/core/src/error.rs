use thiserror::Error;

use crate::foliation::Family;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({x1}, {x2}) lies outside the domain")]
    OutsideDomain { x1: f64, x2: f64 },

    #[error("signal leaves the domain at t = {t}")]
    SignalOutsideDomain { t: f64 },

    #[error("parameter pair ({c0}, {c1}) is not admissible")]
    NotAdmissible { c0: f64, c1: f64 },

    #[error("curve gap {gap} of pair ({c0}, {c1}) is below the minimum {min_gap}")]
    DegenerateGap { c0: f64, c1: f64, gap: f64, min_gap: f64 },

    #[error("level {level} of family {family} does not meet the domain")]
    EmptyCurve { family: Family, level: f64 },

    #[error("K0 > c0 and K1 > c1 simultaneously at t = {t} for pair ({c0}, {c1})")]
    AdmissibilityViolation { t: f64, c0: f64, c1: f64 },

    #[error("initial point lies outside both sets of pair ({c0}, {c1})")]
    AmbiguousInitialization { c0: f64, c1: f64 },

    #[error("no admissible grid cell at resolution h = {h}")]
    EmptyRegion { h: f64 },

    #[error("reduced signal is not piecewise monotone near t = {t}")]
    NotPiecewiseMonotone { t: f64 },

    #[error("reduced signal leaves the domain at level {level}")]
    ReductionOutsideDomain { level: f64 },

    #[error("transversal curve does not meet level {level} of family {family}")]
    NoIntersection { family: Family, level: f64 },

    #[error("lattice has {nodes} nodes per axis, at least 3 are required")]
    GridTooCoarse { nodes: usize },

    #[error("Jacobian vanishes at (s0, s1) = ({s0}, {s1})")]
    SingularJacobian { s0: f64, s1: f64 },

    #[error("no root for level {level} on transversal xi = {xi}")]
    NoRoot { xi: f64, level: f64 },

    #[error("{brackets} candidate roots for level {level} on transversal xi = {xi}")]
    AmbiguousRoot { xi: f64, level: f64, brackets: usize },

    #[error("curve is not transversal: {0}")]
    NotTransversal(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid foliation: {0}")]
    InvalidFoliation(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("csv error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
