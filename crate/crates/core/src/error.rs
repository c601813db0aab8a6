//! Unified error type for the whole crate.
//!
//! Variants are grouped by how a caller should react:
//! input/validation problems (fix the arguments), numerical failures
//! (retry with different tolerances or report non-convergence), and
//! domain-contamination failures (enlarge the simulation window).

use thiserror::Error;

/// Every fallible public operation in this crate returns this error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    // ---- validation / input errors -------------------------------------
    /// Arguments violate a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// The initial relay state is incompatible with the initial input
    /// value (e.g. input already above the upper threshold while the relay
    /// is asked to start on the descending branch's forbidden side).
    #[error("inconsistent initial relay state: {0}")]
    InconsistentInitialData(String),

    /// Two objects that must share parameters (grids, thresholds, lattice
    /// constants) disagree.
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),

    /// An analysis routine was given too few samples to produce a
    /// meaningful answer.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Spatial grids do not line up.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A superposition/replay was requested beyond the recorded history.
    #[error("incomplete switching history: {0}")]
    IncompleteHistory(String),

    // ---- numerical failures --------------------------------------------
    /// An adaptive routine could not reach the requested tolerance.
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// Root solving could not bracket a sign change.
    #[error("no bracket: {0}")]
    NoBracket(String),

    /// An iteration failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A tracked free boundary stopped crossing its level transversally.
    #[error("transversality lost: {0}")]
    TransversalityLost(String),

    /// An explicit scheme left its stability region.
    #[error("stability violated: {0}")]
    StabilityViolation(String),

    /// A nonlinearity has no stable equilibrium branch anywhere in the
    /// scanned range.
    #[error("no stable root: {0}")]
    NoStableRoot(String),

    /// State became non-finite.
    #[error("solution blow-up: {0}")]
    BlowUp(String),

    /// State violates a physical invariant (e.g. a switched node rising
    /// back above the switching level by more than the allowed slack).
    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    /// An event that must occur (by monotonicity arguments) was not found
    /// within the integration horizon.
    #[error("missing switch: {0}")]
    MissingSwitch(String),

    // ---- domain contamination -------------------------------------------
    /// The truncated simulation window became too small: boundary effects
    /// reached the reported region beyond the configured margin.
    #[error("boundary contamination: {0}")]
    BoundaryContamination(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line frontend.
    ///
    /// * `2` — validation / input errors,
    /// * `3` — numerical failures,
    /// * `4` — boundary contamination.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::InconsistentInitialData(_)
            | Error::ParamMismatch(_)
            | Error::InsufficientData(_)
            | Error::GridMismatch(_)
            | Error::IncompleteHistory(_) => 2,
            Error::ToleranceNotMet(_)
            | Error::QuadratureFailure(_)
            | Error::NoBracket(_)
            | Error::NoConvergence(_)
            | Error::TransversalityLost(_)
            | Error::StabilityViolation(_)
            | Error::NoStableRoot(_)
            | Error::BlowUp(_)
            | Error::NonPhysicalState(_)
            | Error::MissingSwitch(_) => 3,
            Error::BoundaryContamination(_) => 4,
        }
    }
}
