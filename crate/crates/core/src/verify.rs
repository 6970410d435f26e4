//! Measurement suites: each check runs its experiment, records the measured
//! quantities, and compares them against fixed thresholds.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    check_energy_dissipation, leading_order_check, releng_identity_residual, total_energy, Context, StateRef,
};
use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::experiments::{fit_rate, run_paired, well_prepared_init, Limit, SweepConfig};
use crate::hyperbolic::{
    advance, Forcing, Manufactured, ManufacturedProblem, ModeField, SchemeConfig, Spatial, Stepper, System, Temporal,
};
use crate::mesh::Mesh1D;
use crate::poisson::{solve_poisson, verify_ibp1, verify_ibp2};
use crate::state::{AeState, PlasmaState, SpeciesState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    Mms,
    Ibp,
    Energy,
    RelengIdentity,
    LeadingOrder,
}

impl Check {
    pub const ALL: [Check; 5] = [Check::Mms, Check::Ibp, Check::Energy, Check::RelengIdentity, Check::LeadingOrder];
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mms => "mms",
            Self::Ibp => "ibp",
            Self::Energy => "energy",
            Self::RelengIdentity => "releng-identity",
            Self::LeadingOrder => "leading-order",
        })
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.into_iter().find(|c| c.to_string() == s).ok_or_else(|| Error::Domain(format!("unknown check '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
    /// Exact equality with zero.
    Zero,
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::AtLeast(b) => v >= b,
            Bound::Within(lo, hi) => (lo..=hi).contains(&v),
            Bound::Zero => v == 0.0,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::AtMost(b) => write!(f, "<= {b:e}"),
            Bound::AtLeast(b) => write!(f, ">= {b}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
            Bound::Zero => f.write_str("== 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
}

impl Measurement {
    pub fn new(label: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self { label: label.into(), value, bound }
    }

    pub fn passed(&self) -> bool {
        self.bound.admits(self.value)
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {:.6e} (required {})", self.label, self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: Check,
    pub measurements: Vec<Measurement>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.measurements.iter().all(Measurement::passed)
    }
}

/// Physical setup shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub length: f64,
    pub ion_eos: EosSpec,
    pub electron_eos: EosSpec,
    pub cfl: f64,
    pub seed: u64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            length: 1.0,
            ion_eos: EosSpec::new(2.0, 1.0).expect("valid"),
            electron_eos: EosSpec::new(2.0, 1.0).expect("valid"),
            cfl: 0.8,
            seed: 0,
        }
    }
}

impl VerifySettings {
    fn stepper(&self, ncells: usize, end_time: f64) -> Result<Stepper> {
        let config = SchemeConfig { cfl: self.cfl, end_time, ..SchemeConfig::default() };
        Stepper::new(Mesh1D::new(self.length, ncells)?, self.ion_eos, self.electron_eos, config)
    }

    fn sweep_config(&self, ncells: usize, end_time: f64) -> Result<SweepConfig> {
        Ok(SweepConfig {
            mesh: Mesh1D::new(self.length, ncells)?,
            ion_eos: self.ion_eos,
            electron_eos: self.electron_eos,
            cfl: self.cfl,
            end_time,
            amplitude: 0.05,
        })
    }
}

pub fn run_check(check: Check, settings: &VerifySettings) -> Result<CheckReport> {
    let measurements = match check {
        Check::Mms => mms_measurements(settings)?,
        Check::Ibp => ibp_measurements(settings)?,
        Check::Energy => energy_measurements(settings)?,
        Check::RelengIdentity => releng_measurements(settings)?,
        Check::LeadingOrder => leading_order_measurements(settings)?,
    };
    Ok(CheckReport { check, measurements })
}

/// Slope of `ln y` against `ln dx`; `NaN` when any value is not positive.
fn refinement_slope(dx: &[f64], values: &[f64]) -> f64 {
    fit_rate(dx, values).map_or(f64::NAN, |f| f.slope)
}

// -------------------------------------------------------------------- mms

pub const MMS_GRIDS: [usize; 3] = [50, 100, 200];
pub const MMS_END_TIME: f64 = 0.1;

fn manufactured(system: System, s: &VerifySettings) -> Result<ManufacturedProblem> {
    let k = PI / s.length;
    let rho = ModeField::new(1.0, 0.1, k, Spatial::Cos, 2.0, Temporal::Cos);
    let u = ModeField::new(0.0, 0.1, k, Spatial::Sin, 2.0, Temporal::Sin);
    let fields = match system {
        System::Euler => Manufactured::Euler { rho, u },
        // small electron amplitude keeps ρ + s positive in the elliptic solve
        System::Ae => Manufactured::Ae { rho, u, n: ModeField::new(1.0, 0.005, k, Spatial::Cos, 2.0, Temporal::Cos) },
        System::Bep => Manufactured::Bep {
            rho,
            u,
            n: ModeField::new(1.0, 0.08, k, Spatial::Cos, 2.0, Temporal::Cos),
            v: ModeField::new(0.0, 0.1, k, Spatial::Sin, 2.0, Temporal::Cos),
            phi: ModeField::new(0.0, 0.05, k, Spatial::Cos, 2.0, Temporal::Cos),
        },
    };
    ManufacturedProblem::new(fields, s.ion_eos, s.electron_eos, 1.0, 1.0, s.length)
}

fn exact_species(mesh: &Mesh1D, density: &ModeField, velocity: &ModeField, t: f64) -> Result<SpeciesState> {
    let r = mesh.sample(|x| density.value(x, t));
    let v = mesh.sample(|x| velocity.value(x, t));
    SpeciesState::from_velocity(r, &v)
}

fn l1_distance(mesh: &Mesh1D, a: &[f64], b: &[f64]) -> f64 {
    mesh.dx() * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// L¹ error at the end time of a manufactured run, summed over conserved fields.
pub fn mms_error(system: System, ncells: usize, settings: &VerifySettings) -> Result<f64> {
    let problem = manufactured(system, settings)?;
    let stepper = settings.stepper(ncells, MMS_END_TIME)?;
    let mesh = stepper.mesh;
    let forcing: &dyn Forcing = &problem;
    let t_end = MMS_END_TIME;
    match problem.fields {
        Manufactured::Euler { rho, u } => {
            let init = crate::state::EulerState { ion: exact_species(&mesh, &rho, &u, 0.0)?, time: 0.0 };
            let end = advance(
                init,
                ncells,
                t_end,
                |s| s.time,
                |s| stepper.compute_dt_euler(s),
                |s, dt| stepper.step_euler_forced(s, dt, Some(forcing)),
                |_, _| {},
            )?;
            let exact = exact_species(&mesh, &rho, &u, end.time)?;
            Ok(l1_distance(&mesh, &end.ion.density, &exact.density)
                + l1_distance(&mesh, &end.ion.momentum, &exact.momentum))
        }
        Manufactured::Ae { rho, u, n } => {
            let init = AeState {
                ion: exact_species(&mesh, &rho, &u, 0.0)?,
                n: mesh.sample(|x| n.value(x, 0.0)),
                delta: problem.delta,
                time: 0.0,
            };
            let end = advance(
                init,
                ncells,
                t_end,
                |s| s.time,
                |s| stepper.compute_dt_ae(s),
                |s, dt| stepper.step_ae_forced(s, dt, Some(forcing)),
                |_, _| {},
            )?;
            let exact = exact_species(&mesh, &rho, &u, end.time)?;
            Ok(l1_distance(&mesh, &end.ion.density, &exact.density)
                + l1_distance(&mesh, &end.ion.momentum, &exact.momentum))
        }
        Manufactured::Bep { rho, u, n, v, phi } => {
            let init = PlasmaState {
                ion: exact_species(&mesh, &rho, &u, 0.0)?,
                electron: exact_species(&mesh, &n, &v, 0.0)?,
                phi: mesh.sample(|x| phi.value(x, 0.0)),
                eps: problem.eps,
                delta: problem.delta,
                time: 0.0,
            };
            let end = advance(
                init,
                ncells,
                t_end,
                |s| s.time,
                |s| stepper.compute_dt(s),
                |s, dt| stepper.step_bep_forced(s, dt, Some(forcing)),
                |_, _| {},
            )?;
            let ion = exact_species(&mesh, &rho, &u, end.time)?;
            let ele = exact_species(&mesh, &n, &v, end.time)?;
            Ok(l1_distance(&mesh, &end.ion.density, &ion.density)
                + l1_distance(&mesh, &end.ion.momentum, &ion.momentum)
                + l1_distance(&mesh, &end.electron.density, &ele.density)
                + l1_distance(&mesh, &end.electron.momentum, &ele.momentum))
        }
    }
}

fn mms_measurements(s: &VerifySettings) -> Result<Vec<Measurement>> {
    let dx: Vec<f64> = MMS_GRIDS.iter().map(|&n| s.length / n as f64).collect();
    let mut out = Vec::new();
    for system in [System::Euler, System::Bep] {
        let errors = MMS_GRIDS.iter().map(|&n| mms_error(system, n, s)).collect::<Result<Vec<f64>>>()?;
        out.push(Measurement::new(
            format!("{system} L1 order"),
            refinement_slope(&dx, &errors),
            Bound::Within(0.8, 1.2),
        ));
    }
    Ok(out)
}

// -------------------------------------------------------------------- ibp

pub const IBP2_GRIDS: [usize; 3] = [64, 128, 256];

fn ibp_measurements(s: &VerifySettings) -> Result<Vec<Measurement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mesh = Mesh1D::new(s.length, 64)?;
    let l = s.length;

    let mut ibp1 = 0.0_f64;
    for _ in 0..100 {
        let mut f: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = f.iter().sum::<f64>() / 64.0;
        f.iter_mut().for_each(|v| *v -= mean);
        let g: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ibp1 = ibp1.max(verify_ibp1(&mesh, &f, &g, rng.gen_range(0.1..2.0))?);
    }

    let mut ibp2 = Vec::new();
    let mut dx = Vec::new();
    for &n in &IBP2_GRIDS {
        let m = Mesh1D::new(l, n)?;
        let f = m.sample(|x| (PI * x / l).cos() + (2.0 * PI * x / l).cos());
        let ub: Vec<f64> = m.faces().iter().map(|&x| (PI * x / l).sin()).collect();
        let mut ub = ub;
        let last = ub.len() - 1;
        ub[0] = 0.0;
        ub[last] = 0.0;
        ibp2.push(verify_ibp2(&m, &f, &ub, 1.0)?);
        dx.push(m.dx());
    }

    let adjoint = poisson_adjointness_defect(&mesh, &mut rng, 100)?;
    Ok(vec![
        Measurement::new("ibp1 defect (max over 100 random pairs)", ibp1, Bound::AtMost(1e-10)),
        Measurement::new("ibp2 defect order", refinement_slope(&dx, &ibp2), Bound::Within(1.7, 2.3)),
        Measurement::new("poisson self-adjointness defect", adjoint, Bound::AtMost(1e-12)),
    ])
}

/// `max |∫ f S(g) - ∫ S(f) g|` over random zero-mean pairs, `S` the Poisson solve.
pub fn poisson_adjointness_defect(mesh: &Mesh1D, rng: &mut impl Rng, pairs: usize) -> Result<f64> {
    let n = mesh.ncells();
    let mut worst = 0.0_f64;
    for _ in 0..pairs {
        let mut draw = || {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|x| *x -= mean);
            v
        };
        let (f, g) = (draw(), draw());
        let (sf, _) = solve_poisson(mesh, &f, 1.0)?;
        let (sg, _) = solve_poisson(mesh, &g, 1.0)?;
        let a: f64 = f.iter().zip(&sg).map(|(x, y)| x * y).sum::<f64>() * mesh.dx();
        let b: f64 = sf.iter().zip(&g).map(|(x, y)| x * y).sum::<f64>() * mesh.dx();
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

// ----------------------------------------------------------------- energy

pub const ENERGY_GRIDS: [usize; 3] = [100, 200, 400];
pub const ENERGY_END_TIME: f64 = 0.2;
const ENERGY_EPS: f64 = 0.1;
const ENERGY_DELTA: f64 = 0.1;
/// Allowance for energy increase per unit time and cell width.
const UPHILL_CONSTANT: f64 = 1.0;

/// Energy history `(t, E)` of one solver from smooth data.
pub fn energy_history(system: System, ncells: usize, s: &VerifySettings) -> Result<(Vec<f64>, Vec<f64>)> {
    let stepper = s.stepper(ncells, ENERGY_END_TIME)?;
    let ctx = Context::from(&stepper);
    let init = well_prepared_init(&stepper.mesh, ENERGY_EPS, ENERGY_DELTA, s.ion_eos, s.electron_eos, 0.05)?;
    let mut times = Vec::new();
    let mut energies = Vec::new();
    let mut record = |t: f64, e: f64| {
        times.push(t);
        energies.push(e);
    };
    match system {
        System::Bep => {
            record(0.0, total_energy(&ctx, StateRef::Bep(&init.plasma)).total);
            advance(
                init.plasma,
                ncells,
                ENERGY_END_TIME,
                |st| st.time,
                |st| stepper.compute_dt(st),
                |st, dt| stepper.step_bep(st, dt),
                |st, _| record(st.time, total_energy(&ctx, StateRef::Bep(st)).total),
            )?;
        }
        System::Ae => {
            record(0.0, total_energy(&ctx, StateRef::Ae(&init.ae)).total);
            advance(
                init.ae,
                ncells,
                ENERGY_END_TIME,
                |st| st.time,
                |st| stepper.compute_dt_ae(st),
                |st, dt| stepper.step_ae(st, dt),
                |st, _| record(st.time, total_energy(&ctx, StateRef::Ae(st)).total),
            )?;
        }
        System::Euler => {
            record(0.0, total_energy(&ctx, StateRef::Euler(&init.euler)).total);
            advance(
                init.euler,
                ncells,
                ENERGY_END_TIME,
                |st| st.time,
                |st| stepper.compute_dt_euler(st),
                |st, dt| stepper.step_euler(st, dt),
                |st, _| record(st.time, total_energy(&ctx, StateRef::Euler(st)).total),
            )?;
        }
    }
    Ok((times, energies))
}

fn energy_measurements(s: &VerifySettings) -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for system in [System::Bep, System::Ae, System::Euler] {
        let mut drifts = Vec::new();
        let mut worst_excess = f64::NEG_INFINITY;
        for &n in &ENERGY_GRIDS {
            let (t, e) = energy_history(system, n, s)?;
            let dx = s.length / n as f64;
            let check = check_energy_dissipation(&t, &e, dx, UPHILL_CONSTANT)?;
            worst_excess = worst_excess.max(check.worst_excess);
            let span = t.last().copied().unwrap_or(0.0) - t[0];
            drifts.push((e.last().copied().unwrap_or(e[0]) - e[0]).abs() / span);
        }
        out.push(Measurement::new(
            format!("{system} energy increase beyond c*dx*dt"),
            worst_excess,
            Bound::AtMost(0.0),
        ));
        for (i, w) in drifts.windows(2).enumerate() {
            out.push(Measurement::new(
                format!("{system} drift ratio {}->{}", ENERGY_GRIDS[i], ENERGY_GRIDS[i + 1]),
                w[0] / w[1],
                Bound::Within(1.4, 2.6),
            ));
        }
    }
    Ok(out)
}

// --------------------------------------------------------- releng identity

pub const RELENG_GRIDS: [usize; 3] = [100, 200, 400];
const RELENG_EPS: f64 = 1e-2;

/// Largest excess of the finite-difference `dΦ/dt` over the sampled production.
pub fn releng_drift(ncells: usize, s: &VerifySettings) -> Result<f64> {
    let cfg = s.sweep_config(ncells, 0.2)?;
    let run = run_paired(Limit::ZeroElectronMass, RELENG_EPS, 1.0, &cfg)?;
    let residual = releng_identity_residual(&run.series)?;
    Ok(residual.iter().fold(0.0_f64, |a, &r| a.max(r)))
}

fn releng_measurements(s: &VerifySettings) -> Result<Vec<Measurement>> {
    let drifts = RELENG_GRIDS.iter().map(|&n| releng_drift(n, s)).collect::<Result<Vec<f64>>>()?;
    let dx: Vec<f64> = RELENG_GRIDS.iter().map(|&n| s.length / n as f64).collect();
    let mut out: Vec<Measurement> = RELENG_GRIDS
        .iter()
        .zip(&drifts)
        .map(|(n, d)| Measurement::new(format!("max(dPhi/dt - sigma) at ncells={n}"), *d, Bound::AtMost(f64::INFINITY)))
        .collect();
    // a drift that is identically zero trivially satisfies the inequality
    let slope = if drifts.iter().all(|&d| d == 0.0) { f64::INFINITY } else { refinement_slope(&dx, &drifts) };
    out.push(Measurement::new("relative-energy drift order", slope, Bound::AtLeast(0.8)));
    Ok(out)
}

// ----------------------------------------------------------- leading order

pub const LEADING_ORDER_GRIDS: [usize; 3] = [100, 200, 400];
const LEADING_ORDER_DELTA: f64 = 0.1;
const LEADING_ORDER_END_TIME: f64 = 0.2;

/// Continuity defect and momentum correction of the leading-order closure on one AE run.
pub fn leading_order_defect(ncells: usize, delta: f64, s: &VerifySettings) -> Result<(f64, f64)> {
    let stepper = s.stepper(ncells, LEADING_ORDER_END_TIME)?;
    let ctx = Context::from(&stepper);
    let init = well_prepared_init(&stepper.mesh, 1.0, delta, s.ion_eos, s.electron_eos, 0.05)?;
    let mut history = vec![init.ae.clone()];
    advance(
        init.ae,
        ncells,
        LEADING_ORDER_END_TIME,
        |st| st.time,
        |st| stepper.compute_dt_ae(st),
        |st, dt| stepper.step_ae(st, dt),
        |st, _| history.push(st.clone()),
    )?;
    let report = leading_order_check(&ctx, &history)?;
    Ok((report.continuity_defect, report.momentum_correction))
}

fn leading_order_measurements(s: &VerifySettings) -> Result<Vec<Measurement>> {
    let defects = LEADING_ORDER_GRIDS
        .iter()
        .map(|&n| leading_order_defect(n, LEADING_ORDER_DELTA, s).map(|d| d.0))
        .collect::<Result<Vec<f64>>>()?;
    let dx: Vec<f64> = LEADING_ORDER_GRIDS.iter().map(|&n| s.length / n as f64).collect();
    let (_, correction) = leading_order_defect(LEADING_ORDER_GRIDS[0], 0.0, s)?;
    Ok(vec![
        Measurement::new("leading-order continuity defect order", refinement_slope(&dx, &defects), Bound::AtLeast(0.8)),
        Measurement::new("|mu0 - m0| at delta = 0", correction, Bound::Zero),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.to_string().parse::<Check>().unwrap(), c);
        }
        assert!("bogus".parse::<Check>().is_err());
    }

    #[test]
    fn bounds() {
        assert!(Bound::Within(0.8, 1.2).admits(1.0));
        assert!(!Bound::Within(0.8, 1.2).admits(f64::NAN));
        assert!(Bound::AtLeast(0.8).admits(f64::INFINITY));
        assert!(!Bound::Zero.admits(1e-300));
        let m = Measurement::new("x", 2.0, Bound::AtMost(1.0));
        assert!(m.to_string().starts_with("FAIL x"));
    }

    #[test]
    fn manufactured_error_shrinks() {
        let s = VerifySettings::default();
        for system in [System::Euler, System::Ae, System::Bep] {
            let a = mms_error(system, 25, &s).unwrap();
            let b = mms_error(system, 50, &s).unwrap();
            assert!(b < a, "{system}: {a} {b}");
        }
    }
}
