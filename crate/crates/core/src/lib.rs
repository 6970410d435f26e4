//! One-dimensional finite-volume laboratory for the bipolar Euler-Poisson
//! system, its adiabatic-electron and compressible-Euler limits, and the
//! relative-energy diagnostics used to measure convergence towards them.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected; stencils index several arrays at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod experiments;
pub mod hyperbolic;
pub mod io;
pub mod mesh;
pub mod poisson;
pub mod state;
pub mod verify;

pub use eos::{EosSpec, RelativeKind};
pub use error::{Error, Result};
pub use mesh::Mesh1D;
pub use poisson::EllipticReport;
pub use state::{AeState, EulerState, LiftedReference, PlasmaState, SpeciesState, Velocities};
