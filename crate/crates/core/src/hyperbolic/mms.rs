//! Manufactured solutions: closed-form fields and the source terms that make
//! them exact solutions of the forced systems.

use std::f64::consts::FRAC_PI_2;

use super::{Forcing, System};
use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spatial {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Temporal {
    Cos,
    Sin,
    Frozen,
}

/// `mean + amplitude · S(k x) · T(ω t)` with `S`, `T` trigonometric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeField {
    pub mean: f64,
    pub amplitude: f64,
    pub wavenumber: f64,
    pub spatial: Spatial,
    pub omega: f64,
    pub temporal: Temporal,
}

fn trig_derivative(cosine: bool, freq: f64, order: u32, arg: f64) -> f64 {
    let shifted = arg + order as f64 * FRAC_PI_2;
    let base = if cosine { shifted.cos() } else { shifted.sin() };
    freq.powi(order as i32) * base
}

impl ModeField {
    pub fn constant(value: f64) -> Self {
        Self {
            mean: value,
            amplitude: 0.0,
            wavenumber: 0.0,
            spatial: Spatial::Cos,
            omega: 0.0,
            temporal: Temporal::Frozen,
        }
    }

    pub fn new(mean: f64, amplitude: f64, wavenumber: f64, spatial: Spatial, omega: f64, temporal: Temporal) -> Self {
        Self { mean, amplitude, wavenumber, spatial, omega, temporal }
    }

    /// Mixed derivative `∂ₓ^nx ∂ₜ^nt` at `(x, t)`.
    pub fn derivative(&self, nx: u32, nt: u32, x: f64, t: f64) -> f64 {
        let space = trig_derivative(self.spatial == Spatial::Cos, self.wavenumber, nx, self.wavenumber * x);
        let time = match self.temporal {
            Temporal::Frozen => {
                if nt == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Temporal::Cos => trig_derivative(true, self.omega, nt, self.omega * t),
            Temporal::Sin => trig_derivative(false, self.omega, nt, self.omega * t),
        };
        let mean = if nx == 0 && nt == 0 { self.mean } else { 0.0 };
        mean + self.amplitude * space * time
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.derivative(0, 0, x, t)
    }

    /// Vanishes at `x = 0` and `x = L` for all times.
    fn vanishes_at_walls(&self, length: f64) -> bool {
        self.amplitude == 0.0 && self.mean == 0.0
            || self.mean == 0.0 && self.spatial == Spatial::Sin && is_wall_mode(self.wavenumber, length)
    }

    /// Zero normal derivative at both walls.
    fn neumann_at_walls(&self, length: f64) -> bool {
        self.amplitude == 0.0 || self.spatial == Spatial::Cos && is_wall_mode(self.wavenumber, length)
    }
}

fn is_wall_mode(k: f64, length: f64) -> bool {
    let m = k * length / std::f64::consts::PI;
    (m - m.round()).abs() < 1e-12 && m.round() >= 1.0
}

/// Closed-form fields for one of the three systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Manufactured {
    Bep { rho: ModeField, u: ModeField, n: ModeField, v: ModeField, phi: ModeField },
    Ae { rho: ModeField, u: ModeField, n: ModeField },
    Euler { rho: ModeField, u: ModeField },
}

/// Per-cell source terms; empty vectors mean "no source".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceTerms {
    pub ion_mass: Vec<f64>,
    pub ion_momentum: Vec<f64>,
    pub electron_mass: Vec<f64>,
    pub electron_momentum: Vec<f64>,
    /// Added to the elliptic right-hand side (`ρ - n` or `ρ`).
    pub elliptic: Vec<f64>,
}

/// Pointwise residual of the manufactured fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointSource {
    pub ion_mass: f64,
    pub ion_momentum: f64,
    pub electron_mass: f64,
    pub electron_momentum: f64,
    pub elliptic: f64,
}

/// Everything needed to evaluate manufactured sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub fields: Manufactured,
    pub ion_eos: EosSpec,
    pub electron_eos: EosSpec,
    pub eps: f64,
    pub delta: f64,
}

impl Manufactured {
    pub fn system(&self) -> System {
        match self {
            Self::Bep { .. } => System::Bep,
            Self::Ae { .. } => System::Ae,
            Self::Euler { .. } => System::Euler,
        }
    }

    /// Velocities must vanish at the walls and scalars must satisfy the Neumann condition.
    pub fn check_wall_compatible(&self, length: f64) -> Result<()> {
        let (velocities, scalars): (Vec<&ModeField>, Vec<&ModeField>) = match self {
            Self::Bep { rho, u, n, v, phi } => (vec![u, v], vec![rho, n, phi]),
            Self::Ae { rho, u, n } => (vec![u], vec![rho, n]),
            Self::Euler { rho, u } => (vec![u], vec![rho]),
        };
        if !velocities.iter().all(|f| f.vanishes_at_walls(length)) {
            return Err(Error::Precondition("manufactured velocity must vanish at x = 0 and x = L".into()));
        }
        if !scalars.iter().all(|f| f.neumann_at_walls(length)) {
            return Err(Error::Precondition("manufactured scalar fields must have zero slope at the walls".into()));
        }
        Ok(())
    }
}

/// Residual of `∂ₜ(ρu) + ∂ₓ(ρu² + p) + force` given the pressure slope `dp/dρ`.
fn momentum_residual(rho: &ModeField, u: &ModeField, x: f64, t: f64, pressure_slope: f64) -> f64 {
    let (r, rx, rt) = (rho.value(x, t), rho.derivative(1, 0, x, t), rho.derivative(0, 1, x, t));
    let (w, wx, wt) = (u.value(x, t), u.derivative(1, 0, x, t), u.derivative(0, 1, x, t));
    rt * w + r * wt + rx * w * w + 2.0 * r * w * wx + pressure_slope * rx
}

fn mass_residual(rho: &ModeField, u: &ModeField, x: f64, t: f64) -> f64 {
    rho.derivative(0, 1, x, t) + rho.derivative(1, 0, x, t) * u.value(x, t) + rho.value(x, t) * u.derivative(1, 0, x, t)
}

fn h_triple_prime(eos: &EosSpec, r: f64) -> f64 {
    eos.k() * eos.gamma() * (eos.gamma() - 2.0) * r.powf(eos.gamma() - 3.0)
}

impl ManufacturedProblem {
    pub fn new(
        fields: Manufactured,
        ion_eos: EosSpec,
        electron_eos: EosSpec,
        eps: f64,
        delta: f64,
        length: f64,
    ) -> Result<Self> {
        fields.check_wall_compatible(length)?;
        Ok(Self { fields, ion_eos, electron_eos, eps, delta })
    }

    pub fn residual_at(&self, x: f64, t: f64) -> PointSource {
        let (e1, e2) = (&self.ion_eos, &self.electron_eos);
        match &self.fields {
            Manufactured::Euler { rho, u } => {
                let r = rho.value(x, t);
                let slope = e1.pressure_prime_unchecked(r) + e2.pressure_prime_unchecked(r);
                PointSource {
                    ion_mass: mass_residual(rho, u, x, t),
                    ion_momentum: momentum_residual(rho, u, x, t, slope),
                    ..Default::default()
                }
            }
            Manufactured::Ae { rho, u, n } => {
                let (r, nv) = (rho.value(x, t), n.value(x, t));
                let (nx, nxx) = (n.derivative(1, 0, x, t), n.derivative(2, 0, x, t));
                let wx = e2.h_double_prime_unchecked(nv) * nx;
                let wxx = h_triple_prime(e2, nv) * nx * nx + e2.h_double_prime_unchecked(nv) * nxx;
                PointSource {
                    ion_mass: mass_residual(rho, u, x, t),
                    ion_momentum: momentum_residual(rho, u, x, t, e1.pressure_prime_unchecked(r)) + r * wx,
                    elliptic: nv - self.delta * wxx - r,
                    ..Default::default()
                }
            }
            Manufactured::Bep { rho, u, n, v, phi } => {
                let (r, nv) = (rho.value(x, t), n.value(x, t));
                let phix = phi.derivative(1, 0, x, t);
                let inv_eps = 1.0 / self.eps;
                PointSource {
                    ion_mass: mass_residual(rho, u, x, t),
                    ion_momentum: momentum_residual(rho, u, x, t, e1.pressure_prime_unchecked(r)) + r * phix,
                    electron_mass: mass_residual(n, v, x, t),
                    electron_momentum: momentum_residual(n, v, x, t, e2.pressure_prime_unchecked(nv) * inv_eps)
                        - inv_eps * nv * phix,
                    elliptic: -self.delta * phi.derivative(2, 0, x, t) - (r - nv),
                }
            }
        }
    }
}

/// Source arrays at cell centres that make the manufactured fields exact at time `t`.
pub fn mms_source(problem: &ManufacturedProblem, mesh: &Mesh1D, t: f64) -> SourceTerms {
    let points: Vec<PointSource> = mesh.centers().iter().map(|&x| problem.residual_at(x, t)).collect();
    let pick = |f: fn(&PointSource) -> f64| points.iter().map(f).collect::<Vec<f64>>();
    let system = problem.fields.system();
    SourceTerms {
        ion_mass: pick(|p| p.ion_mass),
        ion_momentum: pick(|p| p.ion_momentum),
        electron_mass: if system == System::Bep { pick(|p| p.electron_mass) } else { Vec::new() },
        electron_momentum: if system == System::Bep { pick(|p| p.electron_momentum) } else { Vec::new() },
        elliptic: if system == System::Euler { Vec::new() } else { pick(|p| p.elliptic) },
    }
}

impl Forcing for ManufacturedProblem {
    fn sources(&self, mesh: &Mesh1D, t: f64) -> SourceTerms {
        mms_source(self, mesh, t)
    }
}
