//! Well-prepared data, paired limit runs, rate sweeps and scaling.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::diagnostics::{
    approx_residual, lift_ae_instantaneous, lift_ae_solution, lift_euler_solution, rel_energy_sample, Context,
    RelEnergySeries,
};
use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::hyperbolic::{FloorMonitor, SchemeConfig, Stepper, System};
use crate::mesh::Mesh1D;
use crate::poisson::solve_poisson;
use crate::state::{AeState, EulerState, LiftedReference, PlasmaState, SpeciesState};

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

// ---------------------------------------------------------------- scaling

/// Dimensional reference scales, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingInputs {
    pub ion_mass: f64,
    pub electron_mass: f64,
    pub temperature: f64,
    pub density: f64,
    pub length: f64,
    pub time_scale: f64,
    pub boltzmann: f64,
    pub elementary_charge: f64,
    pub vacuum_permittivity: f64,
}

impl ScalingInputs {
    /// Scales with CODATA values for the physical constants.
    pub fn new(
        ion_mass: f64,
        electron_mass: f64,
        temperature: f64,
        density: f64,
        length: f64,
        time_scale: f64,
    ) -> Self {
        Self {
            ion_mass,
            electron_mass,
            temperature,
            density,
            length,
            time_scale,
            boltzmann: BOLTZMANN,
            elementary_charge: ELEMENTARY_CHARGE,
            vacuum_permittivity: VACUUM_PERMITTIVITY,
        }
    }

    pub fn velocity_scale(&self) -> f64 {
        self.length / self.time_scale
    }

    /// `λ_D = sqrt(ε₀ κ_B T₀ / (e² N₀))`.
    pub fn debye_length(&self) -> f64 {
        (self.vacuum_permittivity * self.boltzmann * self.temperature
            / (self.elementary_charge * self.elementary_charge * self.density))
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    pub zeta: f64,
    pub eps: f64,
    pub delta: f64,
}

/// `ζ = m_i v₀²/(κ_B T₀)`, `ε = m_e v₀²/(κ_B T₀)`, `δ = ε₀ κ_B T₀/(e² L² N₀)` with `v₀ = L/τ₀`.
pub fn nondimensionalize(inp: &ScalingInputs) -> Result<DimensionlessGroups> {
    let named = [
        ("ion_mass", inp.ion_mass),
        ("electron_mass", inp.electron_mass),
        ("temperature", inp.temperature),
        ("density", inp.density),
        ("length", inp.length),
        ("time_scale", inp.time_scale),
        ("boltzmann", inp.boltzmann),
        ("elementary_charge", inp.elementary_charge),
        ("vacuum_permittivity", inp.vacuum_permittivity),
    ];
    if let Some((name, v)) = named.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("{name} must be positive, got {v}")));
    }
    let v0 = inp.velocity_scale();
    let thermal = inp.boltzmann * inp.temperature;
    let debye = inp.debye_length();
    Ok(DimensionlessGroups {
        zeta: inp.ion_mass * v0 * v0 / thermal,
        eps: inp.electron_mass * v0 * v0 / thermal,
        delta: debye * debye / (inp.length * inp.length),
    })
}

// --------------------------------------------------------- initial data

/// Two-fluid data together with the matching limit-system states.
#[derive(Debug, Clone, PartialEq)]
pub struct WellPrepared {
    pub plasma: PlasmaState,
    pub ae: AeState,
    pub euler: EulerState,
}

/// `ρ₀ = 1 + a cos(πx/L)`, `u₀ = a sin(πx/L)`, electrons and potential slaved
/// to the adiabatic-electron limit so that `Φ(0)` is small.
pub fn well_prepared_init(
    mesh: &Mesh1D,
    eps: f64,
    delta: f64,
    ion_eos: EosSpec,
    electron_eos: EosSpec,
    amplitude: f64,
) -> Result<WellPrepared> {
    if !(eps > 0.0) || !(delta >= 0.0) {
        return Err(Error::Domain(format!("need eps > 0 and delta >= 0, got eps = {eps}, delta = {delta}")));
    }
    if !(amplitude.abs() <= 0.5) {
        return Err(Error::Vacuum(format!("amplitude {amplitude} lets the ion density drop below 1/2")));
    }
    let l = mesh.length();
    let k = std::f64::consts::PI / l;
    let rho = mesh.sample(|x| 1.0 + amplitude * (k * x).cos());
    let u = mesh.sample(|x| amplitude * (k * x).sin());
    let ion = SpeciesState::from_velocity(rho.clone(), &u)?;

    let stepper = Stepper::new(*mesh, ion_eos, electron_eos, SchemeConfig::default())?;
    let ae = stepper.ae_state(ion.clone(), delta, 0.0)?;
    if let Some(bad) = ae.n.iter().find(|&&n| n < 0.5) {
        return Err(Error::Vacuum(format!("electron density {bad} below 1/2")));
    }
    let lift = lift_ae_instantaneous(&stepper, &ae)?;
    let phi = if delta == 0.0 {
        let mean = mesh.integrate(&lift.phibar)? / l;
        lift.phibar.iter().map(|p| p - mean).collect()
    } else {
        let rhs: Vec<f64> = rho.iter().zip(&ae.n).map(|(r, n)| r - n).collect();
        solve_poisson(mesh, &rhs, delta)?.0
    };
    let electron = SpeciesState::from_velocity(ae.n.clone(), &lift.vbar)?;
    Ok(WellPrepared {
        plasma: PlasmaState { ion: ion.clone(), electron, phi, eps, delta, time: 0.0 },
        ae,
        euler: EulerState { ion, time: 0.0 },
    })
}

// ------------------------------------------------------------ paired runs

/// Which singular limit a sweep probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Limit {
    /// ε → 0 at fixed δ, against the adiabatic-electron system.
    ZeroElectronMass,
    /// ε = δ → 0, against the compressible Euler system.
    Joint,
}

impl Limit {
    pub fn reference_system(self) -> System {
        match self {
            Self::ZeroElectronMass => System::Ae,
            Self::Joint => System::Euler,
        }
    }
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ZeroElectronMass => "zem",
            Self::Joint => "joint",
        })
    }
}

impl FromStr for Limit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zem" => Ok(Self::ZeroElectronMass),
            "joint" => Ok(Self::Joint),
            other => Err(Error::Domain(format!("unknown limit '{other}', expected zem or joint"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub mesh: Mesh1D,
    pub ion_eos: EosSpec,
    pub electron_eos: EosSpec,
    pub cfl: f64,
    pub end_time: f64,
    pub amplitude: f64,
}

impl SweepConfig {
    /// Unit interval, `γ = 2`, `k = 1` for both species, `T = 0.2`, `a = 0.05`.
    pub fn with_ncells(ncells: usize) -> Result<Self> {
        Ok(Self {
            mesh: Mesh1D::new(1.0, ncells)?,
            ion_eos: EosSpec::new(2.0, 1.0)?,
            electron_eos: EosSpec::new(2.0, 1.0)?,
            cfl: 0.8,
            end_time: 0.2,
            amplitude: 0.05,
        })
    }

    fn stepper(&self) -> Result<Stepper> {
        let scheme = SchemeConfig { cfl: self.cfl, end_time: self.end_time, ..SchemeConfig::default() };
        Stepper::new(self.mesh, self.ion_eos, self.electron_eos, scheme)
    }
}

/// History of one two-fluid run against its limit reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRun {
    pub series: RelEnergySeries,
    pub steps: usize,
    /// Run-reported growth constant of the Gronwall bound.
    pub gronwall_c: f64,
    pub final_plasma: PlasmaState,
}

impl PairedRun {
    pub fn phi0(&self) -> f64 {
        self.series.samples.first().map_or(0.0, |s| s.phi())
    }

    pub fn phi_sup(&self) -> f64 {
        self.series.sup_phi()
    }
}

fn sup_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |a, b| a.max(b.abs()))
}

/// Growth-rate estimate for one sample: the pointwise bound
/// `|Σ̂₁ + Σ̂₂| ≤ max(2, γ₁-1, γ₂-1) ‖∂ₓ(ū, v̄)‖∞ Φ` (using `P(r|r̄) = (γ-1)H(r|r̄)`)
/// plus the measured ratio `Σ̂*/Φ` wherever `Φ` is resolved.
fn growth_estimate(
    ctx: &Context,
    reference: &LiftedReference,
    sigma_star: f64,
    phi: f64,
    phi_scale: f64,
) -> Result<f64> {
    let du = sup_abs(&ctx.mesh.divergence(&reference.ubar)?);
    let dv = sup_abs(&ctx.mesh.divergence(&reference.vbar)?);
    let factor = 2.0_f64.max(ctx.ion_eos.gamma() - 1.0).max(ctx.electron_eos.gamma() - 1.0);
    let star = if phi > 1e-3 * phi_scale && phi > 0.0 { (sigma_star / phi).max(0.0) } else { 0.0 };
    Ok(factor * du.max(dv) + star)
}

/// Runs the two-fluid system and the limit reference side by side with a
/// shared time step, sampling Φ and its production terms after every step.
pub fn run_paired(limit: Limit, eps: f64, delta: f64, cfg: &SweepConfig) -> Result<PairedRun> {
    if !(eps > 0.0) || !(delta > 0.0) {
        return Err(Error::Precondition(format!("two-fluid run needs eps, delta > 0, got ({eps}, {delta})")));
    }
    let stepper = cfg.stepper()?;
    let ctx = Context::from(&stepper);
    let init = well_prepared_init(&cfg.mesh, eps, delta, cfg.ion_eos, cfg.electron_eos, cfg.amplitude)?;
    let mut plasma = init.plasma;
    let mut ae = init.ae;
    let mut euler = init.euler;
    let mut reference = match limit {
        Limit::ZeroElectronMass => lift_ae_instantaneous(&stepper, &ae)?,
        Limit::Joint => lift_euler_solution(&ctx, &euler)?,
    };
    let mut series = RelEnergySeries::default();
    series.push(rel_energy_sample(&ctx, &plasma, &reference, None)?);
    let mut references = vec![reference.clone()];

    let ncells = cfg.mesh.ncells();
    let (mut mon_plasma, mut mon_ref) = (FloorMonitor::default(), FloorMonitor::default());
    let mut steps = 0;
    while plasma.time < cfg.end_time {
        let ref_dt = match limit {
            Limit::ZeroElectronMass => stepper.compute_dt_ae(&ae)?,
            Limit::Joint => stepper.compute_dt_euler(&euler)?,
        };
        let remaining = cfg.end_time - plasma.time;
        let dt = stepper.compute_dt(&plasma)?.min(ref_dt).min(remaining);
        let (next_plasma, rep) = stepper.step_bep(&plasma, dt)?;
        mon_plasma.observe(&rep, ncells)?;
        let next_ref = match limit {
            Limit::ZeroElectronMass => {
                let (next, rep) = stepper.step_ae(&ae, dt)?;
                mon_ref.observe(&rep, ncells)?;
                let lift = lift_ae_solution(&ctx, &ae, &next)?.reference;
                ae = next;
                lift
            }
            Limit::Joint => {
                let (next, rep) = stepper.step_euler(&euler, dt)?;
                mon_ref.observe(&rep, ncells)?;
                euler = next;
                lift_euler_solution(&ctx, &euler)?
            }
        };
        plasma = next_plasma;
        // the reference clock must agree with the two-fluid clock bit for bit
        let mut next_ref = next_ref;
        next_ref.time = plasma.time;
        let residual = approx_residual(&ctx, limit.reference_system(), &reference, &next_ref)?;
        series.push(rel_energy_sample(&ctx, &plasma, &next_ref, Some(&residual.ebar))?);
        references.push(next_ref.clone());
        reference = next_ref;
        steps += 1;
        if remaining <= dt {
            break;
        }
    }

    let scale = series.sup_phi();
    let mut gronwall_c = 0.0_f64;
    for (sample, r) in series.samples.iter().zip(&references) {
        gronwall_c = gronwall_c.max(growth_estimate(&ctx, r, sample.sigma.sigma_star, sample.phi(), scale)?);
    }
    Ok(PairedRun { series, steps, gronwall_c, final_plasma: plasma })
}

// ----------------------------------------------------------------- sweeps

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub eps: f64,
    pub delta: f64,
    pub ncells: usize,
    pub phi0: f64,
    pub phi_sup: f64,
    pub gronwall_c: f64,
    pub steps: usize,
    pub wall_clock: Duration,
}

impl SweepEntry {
    /// `sup Φ ≤ exp(C T) (Φ(0) + ε + δ)`.
    pub fn gronwall_consistent(&self, end_time: f64) -> bool {
        self.phi_sup <= (self.gronwall_c * end_time).exp() * (self.phi0 + self.eps + self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub eps: f64,
    pub delta: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub limit: Limit,
    pub end_time: f64,
    /// Completed entries in parameter order, up to the first failure.
    pub entries: Vec<SweepEntry>,
    /// `None` when fewer than two entries completed.
    pub fit: Option<RateFit>,
    pub failure: Option<SweepFailure>,
}

impl SweepResult {
    /// The small parameter the rate is fitted against.
    pub fn abscissa(&self, entry: &SweepEntry) -> f64 {
        match self.limit {
            Limit::ZeroElectronMass => entry.eps,
            Limit::Joint => entry.eps + entry.delta,
        }
    }

    /// `sup Φ` never grows by more than `tol` (relative) as the small parameter decreases.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.entries.windows(2).all(|w| w[1].phi_sup <= (1.0 + tol) * w[0].phi_sup)
    }
}

fn check_decreasing(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Precondition("parameter list is empty".into()));
    }
    if let Some(bad) = values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Precondition(format!("small parameters must be positive, got {bad}")));
    }
    if values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("parameter list must be strictly decreasing".into()));
    }
    Ok(())
}

fn run_sweep(limit: Limit, params: Vec<(f64, f64)>, cfg: &SweepConfig) -> SweepResult {
    let outcomes: Vec<Result<SweepEntry>> = params
        .par_iter()
        .map(|&(eps, delta)| {
            let start = Instant::now();
            let run = run_paired(limit, eps, delta, cfg)?;
            Ok(SweepEntry {
                eps,
                delta,
                ncells: cfg.mesh.ncells(),
                phi0: run.phi0(),
                phi_sup: run.phi_sup(),
                gronwall_c: run.gronwall_c,
                steps: run.steps,
                wall_clock: start.elapsed(),
            })
        })
        .collect();
    let mut entries = Vec::new();
    let mut failure = None;
    for (outcome, &(eps, delta)) in outcomes.into_iter().zip(&params) {
        match outcome {
            Ok(e) => entries.push(e),
            Err(error) => {
                failure = Some(SweepFailure { eps, delta, error });
                break;
            }
        }
    }
    let mut result = SweepResult { limit, end_time: cfg.end_time, entries, fit: None, failure };
    if result.entries.len() >= 2 {
        let xs: Vec<f64> = result.entries.iter().map(|e| result.abscissa(e)).collect();
        let ys: Vec<f64> = result.entries.iter().map(|e| e.phi_sup).collect();
        result.fit = fit_rate(&xs, &ys).ok();
    }
    result
}

/// ε → 0 at δ = 1 against the adiabatic-electron reference.
pub fn run_zem_sweep(eps_list: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    check_decreasing(eps_list)?;
    Ok(run_sweep(Limit::ZeroElectronMass, eps_list.iter().map(|&e| (e, 1.0)).collect(), cfg))
}

/// ε = δ → 0 against the Euler reference.
pub fn run_joint_sweep(eps_list: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    check_decreasing(eps_list)?;
    Ok(run_sweep(Limit::Joint, eps_list.iter().map(|&e| (e, e)).collect(), cfg))
}

/// Least squares on `(ln x, ln y)`.
pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::Precondition(format!("rate fit needs at least 2 points, got {}", xs.len())));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("rate fit needs positive data, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("rate fit needs at least two distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests;
