//! Energies, lifted references, relative energy and its production terms.
//!
//! The relative energy between a two-fluid state `(ρ, u, n, v, φ)` and a
//! reference `(ρ̄, ū, n̄, v̄, φ̄)` is
//!
//! ```text
//! Φ = ∫ ½ρ|u-ū|² + H₁(ρ|ρ̄) + ε½n|v-v̄|² + H₂(n|n̄) + δ½|∂ₓ(φ-φ̄)|² dx
//! ```
//!
//! and for smooth solutions it evolves according to
//! `dΦ/dt = ∫ Σ̂₁ + Σ̂₂ + Σ̂₃ + Σ̂* dx`, with `Σ̂₃` carrying the residual `ē`
//! of the lifted reference.

use crate::eos::{EosSpec, RelativeKind};
use crate::error::{Error, Result};
use crate::hyperbolic::{Stepper, System};
use crate::mesh::Mesh1D;
use crate::poisson::elliptic_time_derivative;
use crate::state::{AeState, EulerState, LiftedReference, PlasmaState, DEFAULT_DENSITY_FLOOR};

/// Mesh, pressure laws and density floor: everything the diagnostics need
/// besides the states themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Context {
    pub mesh: Mesh1D,
    pub ion_eos: EosSpec,
    pub electron_eos: EosSpec,
    pub floor: f64,
}

impl Context {
    pub fn new(mesh: Mesh1D, ion_eos: EosSpec, electron_eos: EosSpec) -> Self {
        Self { mesh, ion_eos, electron_eos, floor: DEFAULT_DENSITY_FLOOR }
    }
}

impl From<&Stepper> for Context {
    fn from(s: &Stepper) -> Self {
        Self { mesh: s.mesh, ion_eos: s.ion_eos, electron_eos: s.electron_eos, floor: s.config.density_floor }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub kin_ion: f64,
    pub int_ion: f64,
    pub kin_ele: f64,
    pub int_ele: f64,
    pub field: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn from_parts(kin_ion: f64, int_ion: f64, kin_ele: f64, int_ele: f64, field: f64) -> Self {
        Self { kin_ion, int_ion, kin_ele, int_ele, field, total: kin_ion + int_ion + kin_ele + int_ele + field }
    }
}

/// A state of any of the three systems.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Bep(&'a PlasmaState),
    Ae(&'a AeState),
    Euler(&'a EulerState),
}

impl StateRef<'_> {
    pub fn system(&self) -> System {
        match self {
            Self::Bep(_) => System::Bep,
            Self::Ae(_) => System::Ae,
            Self::Euler(_) => System::Euler,
        }
    }
}

fn integrate_map(mesh: &Mesh1D, n: usize, f: impl Fn(usize) -> f64) -> f64 {
    mesh.dx() * (0..n).map(f).sum::<f64>()
}

/// Total energy of the given state, split into its parts.
pub fn total_energy(ctx: &Context, state: StateRef<'_>) -> EnergyBreakdown {
    let mesh = &ctx.mesh;
    let cells = mesh.ncells();
    let (e1, e2) = (&ctx.ion_eos, &ctx.electron_eos);
    let kinetic = |density: &[f64], momentum: &[f64]| {
        integrate_map(mesh, cells, |j| 0.5 * momentum[j] * momentum[j] / density[j].max(ctx.floor))
    };
    let internal = |eos: &EosSpec, density: &[f64]| {
        integrate_map(mesh, cells, |j| eos.internal_energy_unchecked(density[j].max(0.0)))
    };
    match state {
        StateRef::Bep(s) => {
            let grad = mesh.gradient(&s.phi).expect("state validated against mesh");
            EnergyBreakdown::from_parts(
                kinetic(&s.ion.density, &s.ion.momentum),
                internal(e1, &s.ion.density),
                s.eps * kinetic(&s.electron.density, &s.electron.momentum),
                internal(e2, &s.electron.density),
                integrate_map(mesh, cells, |j| 0.5 * s.delta * grad[j] * grad[j]),
            )
        }
        StateRef::Ae(s) => {
            let w: Vec<f64> = s.n.iter().map(|&n| e2.h_prime_unchecked(n.max(0.0))).collect();
            let grad = mesh.gradient(&w).expect("state validated against mesh");
            EnergyBreakdown::from_parts(
                kinetic(&s.ion.density, &s.ion.momentum),
                internal(e1, &s.ion.density),
                0.0,
                internal(e2, &s.n),
                integrate_map(mesh, cells, |j| 0.5 * s.delta * grad[j] * grad[j]),
            )
        }
        StateRef::Euler(s) => EnergyBreakdown::from_parts(
            kinetic(&s.ion.density, &s.ion.momentum),
            internal(e1, &s.ion.density),
            0.0,
            internal(e2, &s.ion.density),
            0.0,
        ),
    }
}

// ------------------------------------------------------------------ lifts

/// AE reference lifted to five fields, with the continuity defect of `(n̄, v̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AeLift {
    pub reference: LiftedReference,
    /// `∫ |∂ₜn̄ + ∂ₓ(n̄ v̄)| dx` with the same backward difference in time.
    pub continuity_defect: f64,
}

fn ae_lift_from_derivative(ctx: &Context, state: &AeState, dphi_dt: Vec<f64>) -> Result<LiftedReference> {
    let mesh = &ctx.mesh;
    let phibar: Vec<f64> = state.n.iter().map(|&n| ctx.electron_eos.h_prime_unchecked(n)).collect();
    let grad_dphi = mesh.gradient(&dphi_dt)?;
    let ubar = state.ion.velocity(ctx.floor).values;
    let vbar = (0..mesh.ncells()).map(|j| (state.ion.momentum[j] - state.delta * grad_dphi[j]) / state.n[j]).collect();
    let reference = LiftedReference {
        rhobar: state.ion.density.clone(),
        ubar,
        nbar: state.n.clone(),
        vbar,
        phibar,
        dphibar_dt: dphi_dt,
        time: state.time,
    };
    reference.check_vacuum(ctx.floor)?;
    Ok(reference)
}

/// Lifts the newer of two consecutive AE states:
/// `φ̄ = H₂'(n̄)`, `v̄ = (ρ̄ū - δ ∂ₓ∂ₜφ̄) / n̄`, with `∂ₜφ̄` a backward difference.
pub fn lift_ae_solution(ctx: &Context, previous: &AeState, current: &AeState) -> Result<AeLift> {
    let dt = current.time - previous.time;
    if !(dt > 0.0) {
        return Err(Error::Misaligned(format!("AE states must advance in time, got dt = {dt}")));
    }
    for n in [&previous.n, &current.n] {
        if let Some(bad) = n.iter().find(|&&v| !(v >= ctx.floor)) {
            return Err(Error::Vacuum(format!("electron density {bad:.3e} below floor")));
        }
    }
    let e2 = &ctx.electron_eos;
    let dphi: Vec<f64> = previous
        .n
        .iter()
        .zip(&current.n)
        .map(|(&a, &b)| (e2.h_prime_unchecked(b) - e2.h_prime_unchecked(a)) / dt)
        .collect();
    let reference = ae_lift_from_derivative(ctx, current, dphi)?;
    let flux: Vec<f64> = reference.nbar.iter().zip(&reference.vbar).map(|(n, v)| n * v).collect();
    let div = ctx.mesh.divergence(&flux)?;
    let continuity_defect =
        integrate_map(&ctx.mesh, ctx.mesh.ncells(), |j| ((current.n[j] - previous.n[j]) / dt + div[j]).abs());
    Ok(AeLift { reference, continuity_defect })
}

/// Lift of a single AE state using the instantaneous `∂ₜH₂'(n̄)` implied by the
/// elliptic constraint and the discrete `∂ₜρ̄`; used where no history exists yet.
pub fn lift_ae_instantaneous(stepper: &Stepper, state: &AeState) -> Result<LiftedReference> {
    let ctx = Context::from(stepper);
    let drho_dt = stepper.ae_mass_rate(state)?;
    let dphi = elliptic_time_derivative(&ctx.mesh, &state.n, state.delta, &ctx.electron_eos, &drho_dt)?;
    ae_lift_from_derivative(&ctx, state, dphi)
}

/// `n̄ = ρ̄`, `v̄ = ū`, `φ̄ = H₂'(ρ̄)`.
pub fn lift_euler_solution(ctx: &Context, state: &EulerState) -> Result<LiftedReference> {
    let rho = &state.ion.density;
    if let Some(bad) = rho.iter().find(|&&v| !(v > 0.0) || v < ctx.floor) {
        return Err(Error::Vacuum(format!("density {bad:.3e} is not bounded away from vacuum")));
    }
    let ubar = state.ion.velocity(ctx.floor).values;
    Ok(LiftedReference {
        rhobar: rho.clone(),
        ubar: ubar.clone(),
        nbar: rho.clone(),
        vbar: ubar,
        phibar: rho.iter().map(|&r| ctx.electron_eos.h_prime_unchecked(r)).collect(),
        dphibar_dt: vec![0.0; rho.len()],
        time: state.time,
    })
}

// --------------------------------------------------------- relative energy

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelativeEnergy {
    pub rel_kin_ion: f64,
    pub rel_int_ion: f64,
    pub rel_kin_ele: f64,
    pub rel_int_ele: f64,
    pub field: f64,
    /// Φ, the sum of the five parts.
    pub total: f64,
}

fn check_reference(ctx: &Context, reference: &LiftedReference) -> Result<()> {
    for f in [&reference.rhobar, &reference.ubar, &reference.nbar, &reference.vbar, &reference.phibar] {
        ctx.mesh.check_len(f)?;
    }
    reference.check_vacuum(ctx.floor)
}

/// Φ and its five nonnegative parts.
pub fn relative_energy(ctx: &Context, state: &PlasmaState, reference: &LiftedReference) -> Result<RelativeEnergy> {
    state.validate(&ctx.mesh)?;
    check_reference(ctx, reference)?;
    let mesh = &ctx.mesh;
    let cells = mesh.ncells();
    let u = state.ion.velocity(ctx.floor).values;
    let v = state.electron.velocity(ctx.floor).values;
    let dphi: Vec<f64> = state.phi.iter().zip(&reference.phibar).map(|(a, b)| a - b).collect();
    let grad = mesh.gradient(&dphi)?;
    let (e1, e2) = (&ctx.ion_eos, &ctx.electron_eos);
    let rho = &state.ion.density;
    let n = &state.electron.density;

    // Convexity makes the relative internal energies nonnegative; clamping
    // only removes cancellation noise when ρ ≈ ρ̄.
    let rel_kin_ion = integrate_map(mesh, cells, |j| 0.5 * rho[j] * (u[j] - reference.ubar[j]).powi(2));
    let rel_int_ion = integrate_map(mesh, cells, |j| {
        e1.relative_unchecked(RelativeKind::InternalEnergy, rho[j].max(0.0), reference.rhobar[j]).max(0.0)
    });
    let rel_kin_ele = state.eps * integrate_map(mesh, cells, |j| 0.5 * n[j] * (v[j] - reference.vbar[j]).powi(2));
    let rel_int_ele = integrate_map(mesh, cells, |j| {
        e2.relative_unchecked(RelativeKind::InternalEnergy, n[j].max(0.0), reference.nbar[j]).max(0.0)
    });
    let field = state.delta * integrate_map(mesh, cells, |j| 0.5 * grad[j] * grad[j]);
    Ok(RelativeEnergy {
        rel_kin_ion,
        rel_int_ion,
        rel_kin_ele,
        rel_int_ele,
        field,
        total: rel_kin_ion + rel_int_ion + rel_kin_ele + rel_int_ele + field,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SigmaTerms {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma_star: f64,
}

/// Integrals of `Σ̂₁`, `Σ̂₂` and `Σ̂*`.
pub fn sigma_terms(ctx: &Context, state: &PlasmaState, reference: &LiftedReference) -> Result<SigmaTerms> {
    state.validate(&ctx.mesh)?;
    check_reference(ctx, reference)?;
    let mesh = &ctx.mesh;
    let cells = mesh.ncells();
    let u = state.ion.velocity(ctx.floor).values;
    let v = state.electron.velocity(ctx.floor).values;
    let dubar = mesh.divergence(&reference.ubar)?;
    let dvbar = mesh.divergence(&reference.vbar)?;
    let dphi: Vec<f64> = state.phi.iter().zip(&reference.phibar).map(|(a, b)| a - b).collect();
    let grad = mesh.gradient(&dphi)?;
    let (e1, e2) = (&ctx.ion_eos, &ctx.electron_eos);
    let rho = &state.ion.density;
    let n = &state.electron.density;

    let sigma1 = integrate_map(mesh, cells, |j| {
        -rho[j] * dubar[j] * (u[j] - reference.ubar[j]).powi(2)
            - state.eps * n[j] * dvbar[j] * (v[j] - reference.vbar[j]).powi(2)
    });
    let sigma2 = integrate_map(mesh, cells, |j| {
        -dubar[j] * e1.relative_unchecked(RelativeKind::Pressure, rho[j].max(0.0), reference.rhobar[j])
            - dvbar[j] * e2.relative_unchecked(RelativeKind::Pressure, n[j].max(0.0), reference.nbar[j])
    });
    let sigma_star = integrate_map(mesh, cells, |j| {
        ((rho[j] - reference.rhobar[j]) * reference.ubar[j] - (n[j] - reference.nbar[j]) * reference.vbar[j]) * grad[j]
    });
    Ok(SigmaTerms { sigma1, sigma2, sigma_star })
}

/// Residuals of a lifted reference in the two-fluid equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResidual {
    /// `ē = n̄ (∂ₜv̄ + v̄ ∂ₓv̄)`.
    pub ebar: Vec<f64>,
    /// `ē₀ = -Δφ̄`, present for the Euler lift only.
    pub ebar0: Option<Vec<f64>>,
    pub ebar_sup: f64,
    pub ebar_l1: f64,
    pub ebar0_sup: Option<f64>,
    pub ebar0_l1: Option<f64>,
}

/// Evaluates `ē` (and `ē₀`) for the newer of two consecutive lifted references.
pub fn approx_residual(
    ctx: &Context,
    system: System,
    previous: &LiftedReference,
    current: &LiftedReference,
) -> Result<ApproxResidual> {
    if system == System::Bep {
        return Err(Error::Precondition("approximate residuals are defined for the ae and euler lifts".into()));
    }
    let dt = current.time - previous.time;
    if !(dt > 0.0) {
        return Err(Error::Misaligned(format!("references must advance in time, got dt = {dt}")));
    }
    let mesh = &ctx.mesh;
    let dv = mesh.divergence(&current.vbar)?;
    let ebar: Vec<f64> = (0..mesh.ncells())
        .map(|j| {
            let dvdt = (current.vbar[j] - previous.vbar[j]) / dt;
            current.nbar[j] * (dvdt + current.vbar[j] * dv[j])
        })
        .collect();
    let sup = |f: &[f64]| f.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let l1 = |f: &[f64]| mesh.dx() * f.iter().map(|v| v.abs()).sum::<f64>();
    let ebar0 = match system {
        System::Euler => Some(mesh.laplacian(&current.phibar)?.into_iter().map(|v| -v).collect::<Vec<f64>>()),
        _ => None,
    };
    Ok(ApproxResidual {
        ebar_sup: sup(&ebar),
        ebar_l1: l1(&ebar),
        ebar0_sup: ebar0.as_deref().map(sup),
        ebar0_l1: ebar0.as_deref().map(l1),
        ebar,
        ebar0,
    })
}

/// `∫ -ε (n/n̄) ē (v - v̄) dx`.
pub fn sigma3(ctx: &Context, state: &PlasmaState, reference: &LiftedReference, ebar: &[f64]) -> Result<f64> {
    ctx.mesh.check_len(ebar)?;
    let v = state.electron.velocity(ctx.floor).values;
    let n = &state.electron.density;
    Ok(-state.eps
        * integrate_map(&ctx.mesh, ctx.mesh.ncells(), |j| {
            n[j] / reference.nbar[j] * ebar[j] * (v[j] - reference.vbar[j])
        }))
}

// ----------------------------------------------------------------- series

/// One aligned sample of the relative-energy budget.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelEnergySample {
    pub t: f64,
    pub parts: RelativeEnergy,
    pub sigma: SigmaTerms,
    pub sigma3: f64,
}

impl RelEnergySample {
    pub fn phi(&self) -> f64 {
        self.parts.total
    }

    pub fn production(&self) -> f64 {
        self.sigma.sigma1 + self.sigma.sigma2 + self.sigma3 + self.sigma.sigma_star
    }
}

/// Builds a sample from a state and a reference lifted at the same time.
pub fn rel_energy_sample(
    ctx: &Context,
    state: &PlasmaState,
    reference: &LiftedReference,
    ebar: Option<&[f64]>,
) -> Result<RelEnergySample> {
    if (state.time - reference.time).abs() > 1e-12 * state.time.abs().max(1.0) {
        return Err(Error::Misaligned(format!(
            "state at t = {} paired with reference at t = {}",
            state.time, reference.time
        )));
    }
    let parts = relative_energy(ctx, state, reference)?;
    let sigma = sigma_terms(ctx, state, reference)?;
    let s3 = match ebar {
        Some(e) => sigma3(ctx, state, reference, e)?,
        None => 0.0,
    };
    Ok(RelEnergySample { t: state.time, parts, sigma, sigma3: s3 })
}

/// Time series of Φ, its parts, and the production integrals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelEnergySeries {
    pub samples: Vec<RelEnergySample>,
}

impl RelEnergySeries {
    pub fn push(&mut self, sample: RelEnergySample) {
        self.samples.push(sample);
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn phi(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.phi()).collect()
    }

    pub fn sup_phi(&self) -> f64 {
        self.samples.iter().map(|s| s.phi()).fold(0.0, f64::max)
    }
}

/// `dΦ/dt - (Σ̂₁ + Σ̂₂ + Σ̂₃ + Σ̂*)` between consecutive samples, with the
/// production averaged over each interval.
pub fn releng_identity_residual(series: &RelEnergySeries) -> Result<Vec<f64>> {
    series
        .samples
        .windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            if !(dt > 0.0) {
                return Err(Error::Misaligned(format!("sample times not increasing at t = {}", w[1].t)));
            }
            Ok((w[1].phi() - w[0].phi()) / dt - 0.5 * (w[1].production() + w[0].production()))
        })
        .collect()
}

// ------------------------------------------------------- leading order

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LeadingOrderReport {
    /// `max |φ₀ - H₂'(n₀)|`, zero by construction.
    pub closure_defect: f64,
    /// Largest `∫ |∂ₜn₀ + ∂ₓμ₀| dx` over the run.
    pub continuity_defect: f64,
    /// Largest `|μ₀ - m₀|`.
    pub momentum_correction: f64,
    /// `|E(T) - E(0)| / T` for the leading-order energy.
    pub energy_drift_rate: f64,
}

/// Checks the leading-order closure `φ₀ = H₂'(n₀)`, `μ₀ = m₀ - δ∂ₓ∂ₜφ₀` on an AE history.
pub fn leading_order_check(ctx: &Context, history: &[AeState]) -> Result<LeadingOrderReport> {
    if history.len() < 2 {
        return Err(Error::Precondition("leading-order check needs at least two states".into()));
    }
    let mesh = &ctx.mesh;
    let e2 = &ctx.electron_eos;
    let mut report = LeadingOrderReport::default();
    for pair in history.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let dt = b.time - a.time;
        if !(dt > 0.0) {
            return Err(Error::Misaligned(format!("AE history not increasing at t = {}", b.time)));
        }
        let phi_a: Vec<f64> = a.n.iter().map(|&n| e2.h_prime_unchecked(n)).collect();
        let phi_b: Vec<f64> = b.n.iter().map(|&n| e2.h_prime_unchecked(n)).collect();
        let closure = phi_b.iter().zip(&b.n).fold(0.0_f64, |acc, (p, &n)| acc.max((p - e2.h_prime_unchecked(n)).abs()));
        let dphi: Vec<f64> = phi_a.iter().zip(&phi_b).map(|(x, y)| (y - x) / dt).collect();
        let grad = mesh.gradient(&dphi)?;
        let mu0: Vec<f64> =
            (0..mesh.ncells()).map(|j| 0.5 * (a.ion.momentum[j] + b.ion.momentum[j]) - b.delta * grad[j]).collect();
        let correction = (0..mesh.ncells())
            .fold(0.0_f64, |acc, j| acc.max((mu0[j] - 0.5 * (a.ion.momentum[j] + b.ion.momentum[j])).abs()));
        let div = mesh.divergence(&mu0)?;
        let defect = integrate_map(mesh, mesh.ncells(), |j| ((b.n[j] - a.n[j]) / dt + div[j]).abs());
        report.closure_defect = report.closure_defect.max(closure);
        report.momentum_correction = report.momentum_correction.max(correction);
        report.continuity_defect = report.continuity_defect.max(defect);
    }
    let first = history.first().expect("nonempty");
    let last = history.last().expect("nonempty");
    let e0 = total_energy(ctx, StateRef::Ae(first)).total;
    let e1 = total_energy(ctx, StateRef::Ae(last)).total;
    report.energy_drift_rate = (e1 - e0).abs() / (last.time - first.time);
    Ok(report)
}

// ---------------------------------------------------------- dissipation

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationCheck {
    pub passed: bool,
    /// Largest `E(t_{k+1}) - E(t_k)` (negative when strictly decreasing).
    pub max_jump: f64,
    /// Jump minus its allowance, maximised over intervals.
    pub worst_excess: f64,
}

/// Passes iff every increment `E(t_{k+1}) - E(t_k)` is at most
/// `1e-10 E(0) + c dx (t_{k+1} - t_k)`.
pub fn check_energy_dissipation(times: &[f64], energies: &[f64], dx: f64, c: f64) -> Result<DissipationCheck> {
    if times.len() != energies.len() {
        return Err(Error::LengthMismatch { expected: times.len(), found: energies.len() });
    }
    let e0 = energies.first().copied().unwrap_or(0.0).abs();
    let mut max_jump = f64::NEG_INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 1..energies.len() {
        let jump = energies[k] - energies[k - 1];
        let allowance = 1e-10 * e0 + c * dx * (times[k] - times[k - 1]);
        max_jump = max_jump.max(jump);
        worst_excess = worst_excess.max(jump - allowance);
    }
    if energies.len() < 2 {
        return Ok(DissipationCheck { passed: true, max_jump: 0.0, worst_excess: 0.0 });
    }
    Ok(DissipationCheck { passed: worst_excess <= 0.0, max_jump, worst_excess })
}

#[cfg(test)]
mod tests;
