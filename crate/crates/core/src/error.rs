//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A quaternion that must be unit-norm is not.
    #[error("quaternion norm {norm} differs from 1 by more than {tol}")]
    NotUnitQuaternion { norm: f64, tol: f64 },

    /// A matrix that must be orthogonal fails the O(4) check.
    #[error("matrix is not orthogonal: |M^T M - I| = {defect:.3e}")]
    NotOrthogonal { defect: f64 },

    /// Group closure did not terminate below the element cap.
    #[error("group closure exceeded {max_order} elements; generators do not span a small finite group")]
    GroupClosureOverflow { max_order: usize },

    /// A product of group elements fell outside the closed set.
    #[error("group is not closed: product of elements {i} and {j} is {defect:.3e} away from the table")]
    GroupNotClosed { i: usize, j: usize, defect: f64 },

    /// A coefficient set violates a structural constraint of its family.
    #[error("coefficient constraint violated: {0}")]
    CoefficientConstraint(String),

    /// A state vector has the wrong length for the field family.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A subspace offered for restriction is not flow-invariant.
    #[error("subspace is not flow-invariant: residual {residual:.3e}")]
    NotFlowInvariant { residual: f64 },

    /// A closed-form eigenvalue is absent from the numeric spectrum.
    #[error("closed-form eigenvalue {analytic} misses the numeric spectrum by {defect:.3e}")]
    SpectrumMismatch { analytic: f64, defect: f64 },

    /// A parameter is outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// An equilibrium required by the construction does not exist.
    #[error("equilibrium not available: {0}")]
    MissingEquilibrium(String),

    /// Newton polish failed to converge on an equilibrium.
    #[error("equilibrium refinement stalled at residual {residual:.3e}")]
    EquilibriumNotConverged { residual: f64 },

    /// The adaptive integrator drove the step size below the floor.
    #[error("integration step underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// The integrator hit its step budget before reaching the end time.
    #[error("integration exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    /// The trajectory left the trapping region.
    #[error("trajectory unbounded: |x| = {norm:.3e} at t = {t}")]
    Unbounded { t: f64, norm: f64 },

    /// An event (section crossing, radius crossing) was never bracketed.
    #[error("event not reached before t = {t_end}")]
    EventNotReached { t_end: f64 },

    /// A saddle-sink connection required by the cycle could not be found.
    #[error("heteroclinic connection missing: {0}")]
    MissingConnection(String),

    /// The global-map rotation angle sits on a symmetry ray.
    #[error("rotation angle {theta} is resonant with the order-{k} symmetry; no instability margin")]
    ResonantAngle { theta: f64, k: u32 },

    /// Catch-all for malformed scenario input.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
