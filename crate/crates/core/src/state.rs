//! Field storage for the three systems and the lifted reference.

use crate::error::{Error, Result};
use crate::mesh::Mesh1D;

pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-12;

/// Conserved variables of one fluid: density and momentum per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesState {
    pub density: Vec<f64>,
    pub momentum: Vec<f64>,
}

/// Velocities recovered from conserved variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocities {
    pub values: Vec<f64>,
    pub floored_cells: usize,
}

impl Velocities {
    pub fn floor_activated(&self) -> bool {
        self.floored_cells > 0
    }
}

impl SpeciesState {
    pub fn new(density: Vec<f64>, momentum: Vec<f64>) -> Result<Self> {
        if density.len() != momentum.len() {
            return Err(Error::LengthMismatch { expected: density.len(), found: momentum.len() });
        }
        if let Some(bad) = density.iter().find(|r| !(**r >= 0.0)) {
            return Err(Error::Domain(format!("density must be nonnegative, found {bad}")));
        }
        Ok(Self { density, momentum })
    }

    pub fn at_rest(density: Vec<f64>) -> Self {
        let momentum = vec![0.0; density.len()];
        Self { density, momentum }
    }

    /// Builds the state from density and velocity, `m = ρ u`.
    pub fn from_velocity(density: Vec<f64>, velocity: &[f64]) -> Result<Self> {
        let momentum = density.iter().zip(velocity).map(|(r, u)| r * u).collect();
        Self::new(density, momentum)
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn mass(&self, mesh: &Mesh1D) -> f64 {
        mesh.integrate_unchecked(&self.density)
    }

    /// `u_j = m_j / max(ρ_j, floor)`.
    pub fn velocity(&self, floor: f64) -> Velocities {
        primitive_from_conserved(self, floor)
    }

    pub(crate) fn floored_cells(&self, floor: f64) -> usize {
        self.density.iter().filter(|&&r| r < floor).count()
    }
}

pub fn primitive_from_conserved(species: &SpeciesState, floor: f64) -> Velocities {
    let mut floored_cells = 0;
    let values = species
        .density
        .iter()
        .zip(&species.momentum)
        .map(|(&r, &m)| {
            if r < floor {
                floored_cells += 1;
            }
            m / r.max(floor)
        })
        .collect();
    Velocities { values, floored_cells }
}

/// Full two-fluid state: ions `(ρ, m)`, electrons `(n, μ)`, potential `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlasmaState {
    pub ion: SpeciesState,
    pub electron: SpeciesState,
    /// Zero-mean potential.
    pub phi: Vec<f64>,
    pub eps: f64,
    pub delta: f64,
    pub time: f64,
}

impl PlasmaState {
    pub fn validate(&self, mesh: &Mesh1D) -> Result<()> {
        mesh.check_len(&self.ion.density)?;
        mesh.check_len(&self.ion.momentum)?;
        mesh.check_len(&self.electron.density)?;
        mesh.check_len(&self.electron.momentum)?;
        mesh.check_len(&self.phi)?;
        if !(self.eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Domain(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Adiabatic-electron state: ions `(ρ, m)` and the slaved electron density `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AeState {
    pub ion: SpeciesState,
    pub n: Vec<f64>,
    pub delta: f64,
    pub time: f64,
}

/// Single-fluid compressible Euler state.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerState {
    pub ion: SpeciesState,
    pub time: f64,
}

/// A limit-system solution written in the five fields of the two-fluid system.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedReference {
    pub rhobar: Vec<f64>,
    pub ubar: Vec<f64>,
    pub nbar: Vec<f64>,
    pub vbar: Vec<f64>,
    pub phibar: Vec<f64>,
    /// Time derivative of `φ̄` used to build `v̄` (zero for the Euler lift).
    pub dphibar_dt: Vec<f64>,
    pub time: f64,
}

impl LiftedReference {
    /// Checks the vacuum bound `min(ρ̄, n̄) >= floor`.
    pub fn check_vacuum(&self, floor: f64) -> Result<()> {
        let min = self.rhobar.iter().chain(&self.nbar).fold(f64::INFINITY, |a, &b| a.min(b));
        if min >= floor {
            Ok(())
        } else {
            Err(Error::Vacuum(format!("reference density {min:.3e} below floor {floor:.3e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_examples() {
        let s = SpeciesState::new(vec![2.0, 0.0, 1e-15], vec![4.0, 0.0, 1e-15]).unwrap();
        let v = primitive_from_conserved(&s, 1e-12);
        assert_eq!(v.values[0], 2.0);
        assert_eq!(v.values[1], 0.0);
        assert!((v.values[2] - 1e-3).abs() < 1e-18);
        assert_eq!(v.floored_cells, 2);
        assert!(v.floor_activated());

        let s = SpeciesState::new(vec![2.0], vec![4.0]).unwrap();
        assert!(!primitive_from_conserved(&s, 1e-12).floor_activated());
    }

    #[test]
    fn species_validation() {
        assert!(SpeciesState::new(vec![1.0, -1.0], vec![0.0, 0.0]).is_err());
        assert!(SpeciesState::new(vec![1.0], vec![0.0, 0.0]).is_err());
        let s = SpeciesState::from_velocity(vec![2.0, 3.0], &[0.5, -1.0]).unwrap();
        assert_eq!(s.momentum, vec![1.0, -3.0]);
    }

    #[test]
    fn vacuum_check() {
        let r = LiftedReference {
            rhobar: vec![1.0, 0.5],
            ubar: vec![0.0; 2],
            nbar: vec![1.0, 1e-20],
            vbar: vec![0.0; 2],
            phibar: vec![0.0; 2],
            dphibar_dt: vec![0.0; 2],
            time: 0.0,
        };
        assert!(matches!(r.check_vacuum(1e-12), Err(Error::Vacuum(_))));
    }
}
