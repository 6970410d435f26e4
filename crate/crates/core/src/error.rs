use thiserror::Error;

use crate::poisson::EllipticReport;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular derivative: {0}")]
    SingularDerivative(String),

    #[error("field length {found} does not match mesh with {expected} cells")]
    LengthMismatch { expected: usize, found: usize },

    #[error("Neumann compatibility violated: |integral of rhs| = {defect:.3e}")]
    Compatibility { defect: f64 },

    #[error("nonlinear elliptic solve did not converge after {} iterations (residual {:.3e})", report.iterations, report.final_residual)]
    Nonconvergence { report: EllipticReport },

    #[error("time step collapsed to {dt:.3e}")]
    TimestepCollapse { dt: f64 },

    #[error("vacuum: {0}")]
    Vacuum(String),

    #[error("vacuum formation: {floored} floored cells for {steps} consecutive steps")]
    VacuumFormation { floored: usize, steps: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("misaligned histories: {0}")]
    Misaligned(String),
}

pub type Result<T> = std::result::Result<T, Error>;
