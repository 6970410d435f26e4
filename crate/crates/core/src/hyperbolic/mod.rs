//! Explicit finite-volume steppers for the two-fluid, adiabatic-electron and
//! Euler systems.
//!
//! All three share one kernel: first-order Rusanov fluxes with mirror-ghost
//! walls, advanced by the two-stage SSP Runge-Kutta (Heun) method. Elliptic
//! constraints are re-solved at every stage.

mod flux;
pub mod mms;

pub use flux::rusanov_flux;
pub use mms::{mms_source, Manufactured, ManufacturedProblem, ModeField, PointSource, SourceTerms, Spatial, Temporal};

use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;
use crate::poisson::{solve_ae_elliptic_with_guess, solve_poisson};
use crate::state::{AeState, EulerState, PlasmaState, SpeciesState, DEFAULT_DENSITY_FLOOR};
use flux::flux_divergence;

pub const MIN_TIMESTEP: f64 = 1e-14;
/// Fraction of cells allowed below the density floor ...
pub const FLOOR_CELL_FRACTION: f64 = 0.01;
/// ... for at most this many consecutive steps.
pub const FLOOR_STEP_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub density_floor: f64,
    pub end_time: f64,
    pub output_stride: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { cfl: 0.8, density_floor: DEFAULT_DENSITY_FLOOR, end_time: 0.2, output_stride: 10 }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Domain(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.end_time > 0.0) {
            return Err(Error::Domain(format!("end time must be positive, got {}", self.end_time)));
        }
        if !(self.density_floor > 0.0) {
            return Err(Error::Domain("density floor must be positive".into()));
        }
        if self.output_stride == 0 {
            return Err(Error::Domain("output stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub dt: f64,
    pub max_speed_ion: f64,
    /// Zero for the single-fluid systems.
    pub max_speed_electron: f64,
    pub floored_cells: usize,
    /// The plasma-oscillation bound `sqrt(εδ / max density)` set the step.
    pub oscillation_bound_active: bool,
}

/// Which governing system a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum System {
    Bep,
    Ae,
    Euler,
}

impl std::str::FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bep" => Ok(Self::Bep),
            "ae" => Ok(Self::Ae),
            "euler" => Ok(Self::Euler),
            other => Err(Error::Domain(format!("unknown system '{other}'"))),
        }
    }
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Bep => "bep",
            Self::Ae => "ae",
            Self::Euler => "euler",
        })
    }
}

/// External source terms evaluated at cell centres, e.g. from a manufactured solution.
pub trait Forcing {
    fn sources(&self, mesh: &Mesh1D, t: f64) -> SourceTerms;
}

/// Time derivatives of the conserved variables of one fluid.
struct Rates {
    mass: Vec<f64>,
    momentum: Vec<f64>,
}

impl Rates {
    fn zeros(n: usize) -> Self {
        Self { mass: vec![0.0; n], momentum: vec![0.0; n] }
    }
}

fn euler_update(s: &SpeciesState, dt: f64, k: &Rates) -> SpeciesState {
    SpeciesState {
        density: s.density.iter().zip(&k.mass).map(|(u, r)| u + dt * r).collect(),
        momentum: s.momentum.iter().zip(&k.momentum).map(|(u, r)| u + dt * r).collect(),
    }
}

/// Second Heun stage: `½ u0 + ½ (u1 + dt k1)`.
fn heun_combine(u0: &SpeciesState, u1: &SpeciesState, dt: f64, k1: &Rates) -> SpeciesState {
    let combine = |a: &[f64], b: &[f64], r: &[f64]| -> Vec<f64> {
        a.iter().zip(b).zip(r).map(|((a, b), r)| 0.5 * a + 0.5 * (b + dt * r)).collect()
    };
    SpeciesState {
        density: combine(&u0.density, &u1.density, &k1.mass),
        momentum: combine(&u0.momentum, &u1.momentum, &k1.momentum),
    }
}

fn add_source(target: &mut [f64], source: &[f64]) {
    if !source.is_empty() {
        target.iter_mut().zip(source).for_each(|(t, s)| *t += s);
    }
}

/// Mesh, pressure laws and scheme parameters shared by all steppers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepper {
    pub mesh: Mesh1D,
    pub ion_eos: EosSpec,
    pub electron_eos: EosSpec,
    pub config: SchemeConfig,
}

impl Stepper {
    pub fn new(mesh: Mesh1D, ion_eos: EosSpec, electron_eos: EosSpec, config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { mesh, ion_eos, electron_eos, config })
    }

    fn floor(&self) -> f64 {
        self.config.density_floor
    }

    fn max_signal(&self, s: &SpeciesState, sound: impl Fn(f64) -> f64) -> f64 {
        s.density.iter().zip(&s.momentum).map(|(&r, &m)| (m / r.max(self.floor())).abs() + sound(r)).fold(0.0, f64::max)
    }

    fn combined_sound(&self, rho: f64, n: f64) -> f64 {
        (self.ion_eos.pressure_prime_unchecked(rho.max(0.0)) + self.electron_eos.pressure_prime_unchecked(n.max(0.0)))
            .sqrt()
    }

    /// Stable step for the two-fluid system: ion CFL, ε-scaled electron CFL and
    /// the plasma-oscillation period `sqrt(εδ / max(ρ, n))`.
    pub fn compute_dt(&self, state: &PlasmaState) -> Result<f64> {
        Ok(self.bep_dt_parts(state)?.0)
    }

    fn bep_dt_parts(&self, state: &PlasmaState) -> Result<(f64, bool)> {
        let dx = self.mesh.dx();
        let ion = self.max_signal(&state.ion, |r| self.ion_eos.sound_speed(r));
        let inv_sqrt_eps = 1.0 / state.eps.sqrt();
        let electron = self.max_signal(&state.electron, |r| self.electron_eos.sound_speed(r) * inv_sqrt_eps);
        let max_density = state.ion.density.iter().chain(&state.electron.density).fold(0.0_f64, |a, &b| a.max(b));
        let oscillation =
            if max_density > 0.0 { (state.eps * state.delta / max_density).sqrt() } else { f64::INFINITY };
        let transport = (dx / ion).min(dx / electron);
        let dt = self.config.cfl * transport.min(oscillation);
        if !(dt >= MIN_TIMESTEP) {
            return Err(Error::TimestepCollapse { dt });
        }
        Ok((dt, oscillation < transport))
    }

    /// Stable step for the adiabatic-electron system.
    pub fn compute_dt_ae(&self, state: &AeState) -> Result<f64> {
        let speed = state
            .ion
            .density
            .iter()
            .zip(&state.ion.momentum)
            .zip(&state.n)
            .map(|((&r, &m), &n)| (m / r.max(self.floor())).abs() + self.combined_sound(r, n))
            .fold(0.0, f64::max);
        self.checked_dt(self.config.cfl * self.mesh.dx() / speed)
    }

    /// Stable step for the Euler system with pressure `P₁ + P₂`.
    pub fn compute_dt_euler(&self, state: &EulerState) -> Result<f64> {
        let speed = self.max_signal(&state.ion, |r| self.combined_sound(r, r));
        self.checked_dt(self.config.cfl * self.mesh.dx() / speed)
    }

    fn checked_dt(&self, dt: f64) -> Result<f64> {
        if dt >= MIN_TIMESTEP {
            Ok(dt)
        } else {
            Err(Error::TimestepCollapse { dt })
        }
    }

    fn check_step(&self, dt: f64, limit: f64) -> Result<()> {
        if !(dt >= MIN_TIMESTEP) {
            return Err(Error::TimestepCollapse { dt });
        }
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!("dt = {dt:.6e} exceeds the stable step {limit:.6e}")));
        }
        Ok(())
    }

    // ---------------------------------------------------------------- BEP

    fn poisson_rhs(&self, ion: &SpeciesState, electron: &SpeciesState, src: Option<&SourceTerms>) -> Vec<f64> {
        let mut rhs: Vec<f64> = ion.density.iter().zip(&electron.density).map(|(r, n)| r - n).collect();
        if let Some(s) = src {
            add_source(&mut rhs, &s.elliptic);
        }
        rhs
    }

    fn bep_rates(
        &self,
        ion: &SpeciesState,
        electron: &SpeciesState,
        eps: f64,
        delta: f64,
        src: Option<&SourceTerms>,
    ) -> Result<(Rates, Rates, f64, f64)> {
        let n = self.mesh.ncells();
        let (phi, _) = solve_poisson(&self.mesh, &self.poisson_rhs(ion, electron, src), delta)?;
        let grad_phi = self.mesh.gradient(&phi)?;

        let mut ki = Rates::zeros(n);
        let ion_p: Vec<f64> = ion.density.iter().map(|&r| self.ion_eos.pressure_unchecked(r.max(0.0))).collect();
        let ion_c: Vec<f64> = ion.density.iter().map(|&r| self.ion_eos.sound_speed(r)).collect();
        let si = flux_divergence(
            &self.mesh,
            &ion.density,
            &ion.momentum,
            &ion_p,
            &ion_c,
            self.floor(),
            &mut ki.mass,
            &mut ki.momentum,
        );

        let mut ke = Rates::zeros(n);
        let inv_eps = 1.0 / eps;
        let ele_p: Vec<f64> =
            electron.density.iter().map(|&r| self.electron_eos.pressure_unchecked(r.max(0.0)) * inv_eps).collect();
        let ele_c: Vec<f64> =
            electron.density.iter().map(|&r| self.electron_eos.sound_speed(r) * inv_eps.sqrt()).collect();
        let se = flux_divergence(
            &self.mesh,
            &electron.density,
            &electron.momentum,
            &ele_p,
            &ele_c,
            self.floor(),
            &mut ke.mass,
            &mut ke.momentum,
        );

        for j in 0..n {
            ki.momentum[j] -= ion.density[j] * grad_phi[j];
            ke.momentum[j] += inv_eps * electron.density[j] * grad_phi[j];
        }
        if let Some(s) = src {
            add_source(&mut ki.mass, &s.ion_mass);
            add_source(&mut ki.momentum, &s.ion_momentum);
            add_source(&mut ke.mass, &s.electron_mass);
            add_source(&mut ke.momentum, &s.electron_momentum);
        }
        Ok((ki, ke, si, se))
    }

    /// One SSP-RK2 step of the two-fluid system.
    pub fn step_bep(&self, state: &PlasmaState, dt: f64) -> Result<(PlasmaState, StepReport)> {
        self.step_bep_forced(state, dt, None)
    }

    pub fn step_bep_forced(
        &self,
        state: &PlasmaState,
        dt: f64,
        forcing: Option<&dyn Forcing>,
    ) -> Result<(PlasmaState, StepReport)> {
        state.validate(&self.mesh)?;
        let (limit, oscillation) = self.bep_dt_parts(state)?;
        self.check_step(dt, limit)?;
        let t0 = state.time;
        let src0 = forcing.map(|f| f.sources(&self.mesh, t0));
        let src1 = forcing.map(|f| f.sources(&self.mesh, t0 + dt));

        let (ki0, ke0, si, se) = self.bep_rates(&state.ion, &state.electron, state.eps, state.delta, src0.as_ref())?;
        let ion1 = euler_update(&state.ion, dt, &ki0);
        let ele1 = euler_update(&state.electron, dt, &ke0);
        let (ki1, ke1, _, _) = self.bep_rates(&ion1, &ele1, state.eps, state.delta, src1.as_ref())?;
        let ion = heun_combine(&state.ion, &ion1, dt, &ki1);
        let electron = heun_combine(&state.electron, &ele1, dt, &ke1);

        let (phi, _) = solve_poisson(&self.mesh, &self.poisson_rhs(&ion, &electron, src1.as_ref()), state.delta)?;
        let floored = ion.floored_cells(self.floor()) + electron.floored_cells(self.floor());
        let next = PlasmaState { ion, electron, phi, eps: state.eps, delta: state.delta, time: t0 + dt };
        Ok((
            next,
            StepReport {
                dt,
                max_speed_ion: si,
                max_speed_electron: se,
                floored_cells: floored,
                oscillation_bound_active: oscillation,
            },
        ))
    }

    // ----------------------------------------------------------------- AE

    /// Ion rates for the adiabatic-electron system, given the slaved density `n`.
    ///
    /// The forcing `-ρ ∂ₓH₂'(n)` is applied in the equivalent conservative form
    /// `-∂ₓ(P₂(n) - δ/2 (∂ₓH₂'(n))²)`, which follows from the elliptic constraint.
    fn ae_rates(&self, ion: &SpeciesState, n: &[f64], delta: f64, src: Option<&SourceTerms>) -> Result<(Rates, f64)> {
        let cells = self.mesh.ncells();
        let w: Vec<f64> = n.iter().map(|&v| self.electron_eos.h_prime_unchecked(v)).collect();
        let grad_w = self.mesh.gradient(&w)?;
        let pressure: Vec<f64> = (0..cells)
            .map(|j| {
                self.ion_eos.pressure_unchecked(ion.density[j].max(0.0)) + self.electron_eos.pressure_unchecked(n[j])
                    - 0.5 * delta * grad_w[j] * grad_w[j]
            })
            .collect();
        let sound: Vec<f64> = (0..cells).map(|j| self.combined_sound(ion.density[j], n[j])).collect();
        let mut k = Rates::zeros(cells);
        let speed = flux_divergence(
            &self.mesh,
            &ion.density,
            &ion.momentum,
            &pressure,
            &sound,
            self.floor(),
            &mut k.mass,
            &mut k.momentum,
        );
        if let Some(s) = src {
            add_source(&mut k.mass, &s.ion_mass);
            add_source(&mut k.momentum, &s.ion_momentum);
            // n solves the constraint with ρ + s, so ρ ∂ₓw picks up -s ∂ₓw.
            if !s.elliptic.is_empty() {
                for j in 0..cells {
                    k.momentum[j] += s.elliptic[j] * grad_w[j];
                }
            }
        }
        Ok((k, speed))
    }

    fn solve_electrons(
        &self,
        ion: &SpeciesState,
        delta: f64,
        guess: &[f64],
        src: Option<&SourceTerms>,
    ) -> Result<Vec<f64>> {
        let mut rhs = ion.density.clone();
        if let Some(s) = src {
            add_source(&mut rhs, &s.elliptic);
        }
        Ok(solve_ae_elliptic_with_guess(&self.mesh, &rhs, delta, &self.electron_eos, Some(guess))?.0)
    }

    /// Completes an AE state from `(ρ, m)` by solving the elliptic constraint.
    pub fn ae_state(&self, ion: SpeciesState, delta: f64, time: f64) -> Result<AeState> {
        let n = solve_ae_elliptic_with_guess(&self.mesh, &ion.density, delta, &self.electron_eos, None)?.0;
        Ok(AeState { ion, n, delta, time })
    }

    /// Mass and momentum rates of the AE system at `state` (used for `∂ₜρ` at start-up).
    pub fn ae_mass_rate(&self, state: &AeState) -> Result<Vec<f64>> {
        Ok(self.ae_rates(&state.ion, &state.n, state.delta, None)?.0.mass)
    }

    /// One SSP-RK2 step of the adiabatic-electron system.
    pub fn step_ae(&self, state: &AeState, dt: f64) -> Result<(AeState, StepReport)> {
        self.step_ae_forced(state, dt, None)
    }

    pub fn step_ae_forced(
        &self,
        state: &AeState,
        dt: f64,
        forcing: Option<&dyn Forcing>,
    ) -> Result<(AeState, StepReport)> {
        self.mesh.check_len(&state.n)?;
        self.mesh.check_len(&state.ion.density)?;
        self.check_step(dt, self.compute_dt_ae(state)?)?;
        let t0 = state.time;
        let src0 = forcing.map(|f| f.sources(&self.mesh, t0));
        let src1 = forcing.map(|f| f.sources(&self.mesh, t0 + dt));

        let (k0, speed) = self.ae_rates(&state.ion, &state.n, state.delta, src0.as_ref())?;
        let ion1 = euler_update(&state.ion, dt, &k0);
        let n1 = self.solve_electrons(&ion1, state.delta, &state.n, src1.as_ref())?;
        let (k1, _) = self.ae_rates(&ion1, &n1, state.delta, src1.as_ref())?;
        let ion = heun_combine(&state.ion, &ion1, dt, &k1);
        let n = self.solve_electrons(&ion, state.delta, &n1, src1.as_ref())?;
        let floored = ion.floored_cells(self.floor());
        Ok((
            AeState { ion, n, delta: state.delta, time: t0 + dt },
            StepReport { dt, max_speed_ion: speed, floored_cells: floored, ..Default::default() },
        ))
    }

    // -------------------------------------------------------------- Euler

    fn euler_rates(&self, ion: &SpeciesState, src: Option<&SourceTerms>) -> (Rates, f64) {
        let pressure: Vec<f64> = ion
            .density
            .iter()
            .map(|&r| {
                let r = r.max(0.0);
                self.ion_eos.pressure_unchecked(r) + self.electron_eos.pressure_unchecked(r)
            })
            .collect();
        let sound: Vec<f64> = ion.density.iter().map(|&r| self.combined_sound(r, r)).collect();
        let mut k = Rates::zeros(self.mesh.ncells());
        let speed = flux_divergence(
            &self.mesh,
            &ion.density,
            &ion.momentum,
            &pressure,
            &sound,
            self.floor(),
            &mut k.mass,
            &mut k.momentum,
        );
        if let Some(s) = src {
            add_source(&mut k.mass, &s.ion_mass);
            add_source(&mut k.momentum, &s.ion_momentum);
        }
        (k, speed)
    }

    /// Mass rate of the Euler system at `state`.
    pub fn euler_mass_rate(&self, state: &EulerState) -> Vec<f64> {
        self.euler_rates(&state.ion, None).0.mass
    }

    /// One SSP-RK2 step of the Euler system with pressure `P₁ + P₂`.
    pub fn step_euler(&self, state: &EulerState, dt: f64) -> Result<(EulerState, StepReport)> {
        self.step_euler_forced(state, dt, None)
    }

    pub fn step_euler_forced(
        &self,
        state: &EulerState,
        dt: f64,
        forcing: Option<&dyn Forcing>,
    ) -> Result<(EulerState, StepReport)> {
        self.mesh.check_len(&state.ion.density)?;
        self.check_step(dt, self.compute_dt_euler(state)?)?;
        let t0 = state.time;
        let src0 = forcing.map(|f| f.sources(&self.mesh, t0));
        let src1 = forcing.map(|f| f.sources(&self.mesh, t0 + dt));
        let (k0, speed) = self.euler_rates(&state.ion, src0.as_ref());
        let ion1 = euler_update(&state.ion, dt, &k0);
        let (k1, _) = self.euler_rates(&ion1, src1.as_ref());
        let ion = heun_combine(&state.ion, &ion1, dt, &k1);
        let floored = ion.floored_cells(self.floor());
        Ok((
            EulerState { ion, time: t0 + dt },
            StepReport { dt, max_speed_ion: speed, floored_cells: floored, ..Default::default() },
        ))
    }
}

/// Tracks consecutive steps with too many floored cells.
#[derive(Debug, Clone, Default)]
pub struct FloorMonitor {
    streak: usize,
}

impl FloorMonitor {
    pub fn observe(&mut self, report: &StepReport, ncells: usize) -> Result<()> {
        if report.floored_cells as f64 > FLOOR_CELL_FRACTION * ncells as f64 {
            self.streak += 1;
            if self.streak > FLOOR_STEP_LIMIT {
                return Err(Error::VacuumFormation { floored: report.floored_cells, steps: self.streak });
            }
        } else {
            self.streak = 0;
        }
        Ok(())
    }
}

/// Advances a state to `end_time`, shortening the final step to land on it.
/// `observe` sees every accepted state.
pub fn advance<S, D, F, O>(
    mut state: S,
    ncells: usize,
    end_time: f64,
    time_of: impl Fn(&S) -> f64,
    dt_of: D,
    step: F,
    mut observe: O,
) -> Result<S>
where
    D: Fn(&S) -> Result<f64>,
    F: Fn(&S, f64) -> Result<(S, StepReport)>,
    O: FnMut(&S, &StepReport),
{
    let mut monitor = FloorMonitor::default();
    while time_of(&state) < end_time * (1.0 - 1e-14) {
        let remaining = end_time - time_of(&state);
        let dt = dt_of(&state)?.min(remaining);
        let (next, report) = step(&state, dt)?;
        monitor.observe(&report, ncells)?;
        observe(&next, &report);
        state = next;
    }
    Ok(state)
}
