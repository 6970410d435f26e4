//! Uniform cell-centred grid on `[0, L]` with reflecting walls, and the
//! discrete operators shared by the solvers and the diagnostics.
//!
//! Two ghost-cell parities are used at the walls:
//!
//! * even (mirror) ghosts for scalar fields obeying a homogeneous Neumann
//!   condition: densities, potentials, `H'(n)`;
//! * odd (reflected) ghosts for fields whose normal component vanishes at the
//!   wall: velocities, momenta, mass fluxes.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    length: f64,
    ncells: usize,
}

impl Mesh1D {
    pub fn new(length: f64, ncells: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Domain(format!("domain length must be positive, got {length}")));
        }
        if ncells < 2 {
            return Err(Error::Domain(format!("need at least 2 cells, got {ncells}")));
        }
        Ok(Self { length, ncells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn ncells(&self) -> usize {
        self.ncells
    }

    pub fn dx(&self) -> f64 {
        self.length / self.ncells as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.ncells).map(|j| self.center(j)).collect()
    }

    /// Face positions `x_{j-1/2}` for `j = 0..=ncells`, walls included.
    pub fn faces(&self) -> Vec<f64> {
        (0..=self.ncells).map(|j| j as f64 * self.dx()).collect()
    }

    /// Samples `f` at the cell centres.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.ncells).map(|j| f(self.center(j))).collect()
    }

    pub fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() == self.ncells {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.ncells, found: field.len() })
        }
    }

    /// Midpoint rule `dx Σ f_j`.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field)?;
        Ok(self.integrate_unchecked(field))
    }

    /// Central-difference gradient of a Neumann scalar (even ghosts); the
    /// gradient of a constant is exactly zero.
    pub fn gradient(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.check_len(field)?;
        Ok(central_difference(field, self.dx(), 1.0))
    }

    /// Central-difference derivative of a wall-vanishing field (odd ghosts).
    /// Its integral telescopes to exactly zero for any input.
    pub fn divergence(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.check_len(field)?;
        Ok(central_difference(field, self.dx(), -1.0))
    }

    /// Compact three-point Laplacian with homogeneous Neumann closure.
    pub fn laplacian(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.check_len(field)?;
        Ok(self.laplacian_unchecked(field))
    }

    /// Differences across the `ncells - 1` interior faces, `(f_{j+1} - f_j) / dx`.
    pub fn face_gradient(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.check_len(field)?;
        let dx = self.dx();
        Ok(field.windows(2).map(|w| (w[1] - w[0]) / dx).collect())
    }

    pub(crate) fn integrate_unchecked(&self, field: &[f64]) -> f64 {
        self.dx() * field.iter().sum::<f64>()
    }

    pub(crate) fn laplacian_unchecked(&self, field: &[f64]) -> Vec<f64> {
        let n = field.len();
        let inv = 1.0 / (self.dx() * self.dx());
        (0..n)
            .map(|j| {
                let left = if j == 0 { field[0] } else { field[j - 1] };
                let right = if j + 1 == n { field[n - 1] } else { field[j + 1] };
                (left - 2.0 * field[j] + right) * inv
            })
            .collect()
    }
}

fn central_difference(field: &[f64], dx: f64, parity: f64) -> Vec<f64> {
    let n = field.len();
    let inv = 0.5 / dx;
    (0..n)
        .map(|j| {
            let left = if j == 0 { parity * field[0] } else { field[j - 1] };
            let right = if j + 1 == n { parity * field[n - 1] } else { field[j + 1] };
            (right - left) * inv
        })
        .collect()
}
