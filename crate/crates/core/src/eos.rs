//! Power-law barotropic equation of state.
//!
//! Pressure `P(r) = k r^γ` and internal energy `H(r) = k r^γ / (γ - 1)`,
//! linked by `r H''(r) = P'(r)` and `r H'(r) = H(r) + P(r)`.

use crate::error::{Error, Result};

/// Pressure law `P(r) = k r^γ` for one species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosSpec {
    gamma: f64,
    k: f64,
}

/// Which function a relative quantity `F(r | r̄)` is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeKind {
    InternalEnergy,
    Pressure,
}

impl EosSpec {
    pub fn new(gamma: f64, k: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!("k must be positive, got {k}")));
        }
        Ok(Self { gamma, k })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// The constant `k̂` in `|r P''(r)| <= k̂ P'(r)`; for the power law it is `γ - 1`.
    pub fn k_hat(&self) -> f64 {
        self.gamma - 1.0
    }

    pub fn pressure(&self, r: f64) -> Result<f64> {
        check_density(r)?;
        Ok(self.pressure_unchecked(r))
    }

    pub fn internal_energy(&self, r: f64) -> Result<f64> {
        check_density(r)?;
        Ok(self.internal_energy_unchecked(r))
    }

    /// `P'(r) = k γ r^{γ-1}`.
    pub fn pressure_prime(&self, r: f64) -> Result<f64> {
        check_density(r)?;
        Ok(self.pressure_prime_unchecked(r))
    }

    /// `P''(r) = k γ (γ-1) r^{γ-2}`; singular at vacuum for `γ < 2`.
    pub fn pressure_double_prime(&self, r: f64) -> Result<f64> {
        check_density(r)?;
        if r == 0.0 && self.gamma < 2.0 {
            return Err(Error::SingularDerivative(format!("P'' is unbounded at r = 0 for gamma = {}", self.gamma)));
        }
        Ok(self.k * self.gamma * (self.gamma - 1.0) * r.powf(self.gamma - 2.0))
    }

    /// `H'(r) = k γ r^{γ-1} / (γ-1)`.
    pub fn h_prime(&self, r: f64) -> Result<f64> {
        check_density(r)?;
        Ok(self.h_prime_unchecked(r))
    }

    /// `H''(r) = k γ r^{γ-2}`.
    pub fn h_double_prime(&self, r: f64) -> Result<f64> {
        check_density(r)?;
        if r == 0.0 && self.gamma < 2.0 {
            return Err(Error::SingularDerivative(format!("H'' is unbounded at r = 0 for gamma = {}", self.gamma)));
        }
        Ok(self.h_double_prime_unchecked(r))
    }

    /// Inverse of `H'` on `(0, ∞)`.
    pub fn h_prime_inverse(&self, w: f64) -> Result<f64> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::Domain(format!("H' maps onto (0, inf); cannot invert w = {w}")));
        }
        Ok(self.h_prime_inverse_unchecked(w))
    }

    /// `F(r | r̄) = F(r) - F(r̄) - F'(r̄)(r - r̄)`.
    pub fn relative(&self, kind: RelativeKind, r: f64, rbar: f64) -> Result<f64> {
        check_density(r)?;
        if !(rbar > 0.0) {
            return Err(Error::Domain(format!("reference density must be positive, got {rbar}")));
        }
        Ok(self.relative_unchecked(kind, r, rbar))
    }

    // The unchecked variants below are used in inner loops where densities
    // have already been validated or floored.

    #[inline]
    pub(crate) fn pressure_unchecked(&self, r: f64) -> f64 {
        self.k * r.powf(self.gamma)
    }

    #[inline]
    pub(crate) fn internal_energy_unchecked(&self, r: f64) -> f64 {
        self.k * r.powf(self.gamma) / (self.gamma - 1.0)
    }

    #[inline]
    pub(crate) fn pressure_prime_unchecked(&self, r: f64) -> f64 {
        self.k * self.gamma * r.powf(self.gamma - 1.0)
    }

    #[inline]
    pub(crate) fn h_prime_unchecked(&self, r: f64) -> f64 {
        self.k * self.gamma * r.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }

    #[inline]
    pub(crate) fn h_double_prime_unchecked(&self, r: f64) -> f64 {
        self.k * self.gamma * r.powf(self.gamma - 2.0)
    }

    #[inline]
    pub(crate) fn h_prime_inverse_unchecked(&self, w: f64) -> f64 {
        (w * (self.gamma - 1.0) / (self.k * self.gamma)).powf(1.0 / (self.gamma - 1.0))
    }

    #[inline]
    pub(crate) fn relative_unchecked(&self, kind: RelativeKind, r: f64, rbar: f64) -> f64 {
        match kind {
            RelativeKind::InternalEnergy => {
                self.internal_energy_unchecked(r)
                    - self.internal_energy_unchecked(rbar)
                    - self.h_prime_unchecked(rbar) * (r - rbar)
            }
            RelativeKind::Pressure => {
                self.pressure_unchecked(r)
                    - self.pressure_unchecked(rbar)
                    - self.pressure_prime_unchecked(rbar) * (r - rbar)
            }
        }
    }

    /// Sound speed `sqrt(P'(r))`, with negative densities treated as vacuum.
    #[inline]
    pub(crate) fn sound_speed(&self, r: f64) -> f64 {
        self.pressure_prime_unchecked(r.max(0.0)).sqrt()
    }
}

fn check_density(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("density must be nonnegative, got {r}")))
    }
}
