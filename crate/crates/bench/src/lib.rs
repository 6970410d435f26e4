//! Benchmark fixtures shared by the criterion targets.

use eplab_core::experiments::{well_prepared_init, WellPrepared};
use eplab_core::hyperbolic::{SchemeConfig, Stepper};
use eplab_core::{EosSpec, Mesh1D};

/// Stepper on the unit interval with `gamma = 2`, `k = 1` for both species.
pub fn stepper(ncells: usize) -> Stepper {
    let eos = EosSpec::new(2.0, 1.0).expect("valid eos");
    let mesh = Mesh1D::new(1.0, ncells).expect("valid mesh");
    Stepper::new(mesh, eos, eos, SchemeConfig::default()).expect("valid stepper")
}

/// Well-prepared data with amplitude 0.05.
pub fn initial(stepper: &Stepper, eps: f64, delta: f64) -> WellPrepared {
    well_prepared_init(&stepper.mesh, eps, delta, stepper.ion_eos, stepper.electron_eos, 0.05).expect("valid data")
}
