use thiserror::Error;

/// Errors produced by the library operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A covector was required to satisfy H = -1/2 or H = 0 and does not.
    #[error("covector is not normalized: H = {hamiltonian:.6e} (expected -1/2 or 0)")]
    NotNormalized { hamiltonian: f64 },

    /// A covector with h1 >= 0 where the half-space h1 < 0 is required.
    #[error("covector must have h1 < 0, got h1 = {h1}")]
    BadOrientation { h1: f64 },

    /// Normalization to the H = -1/2 hyperboloid asked for a covector with H >= 0.
    #[error("time-like normalization impossible: H = {hamiltonian:.6e} >= 0")]
    NotTimelike { hamiltonian: f64 },

    /// The symmetric case mu = 0 is excluded from the optimality machinery.
    #[error("operation undefined in the symmetric case mu = 0")]
    SymmetricRegime,

    /// An operation was called with structure parameters of the wrong regime.
    #[error("operation requires {expected} regime, parameters are {got}")]
    WrongRegime {
        expected: &'static str,
        got: &'static str,
    },

    /// A covector with Kil(h) = 0 where the Kil != 0 branches are required.
    #[error("operation undefined for Kil(h) = 0 covectors")]
    KilZero,

    /// A covector whose causal class is inconsistent with the regime ranges.
    #[error("covector inconsistent with regime: {0}")]
    ClassRangeViolation(String),

    /// The derived control falls outside the admissible cone.
    #[error("control outside the admissible cone: cone value = {cone_value:.6e}")]
    ControlOutsideCone { cone_value: f64 },

    /// A root bracket without a sign change.
    #[error("no sign change on bracket [{lo}, {hi}]: f = ({flo:.6e}, {fhi:.6e})")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },

    /// A reflection Maxwell pair was requested for a covector fixed by the reflection.
    #[error("covector is fixed by the reflection; no distinct Maxwell partner")]
    FixedCovector,

    /// Abnormal concatenation requires arc parameters of opposite signs.
    #[error("abnormal arcs require opposite signs, got w1 = {w1}, w2 = {w2}")]
    SameSignArcs { w1: f64, w2: f64 },

    /// Invalid caller-supplied input (grids, tolerances, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An internal invariant that should be unreachable was violated.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
