//! Deformation parameters of the noncommutative phase space.

use crate::error::{Error, Result};
use crate::scalar::Coeff;

/// The antisymmetric 2x2 structure constant: epsilon[0][1] = 1.
pub const EPSILON: [[i64; 2]; 2] = [[0, 1], [-1, 0]];

/// The triple (hbar, mu, nu): hbar couples positions to momenta, mu makes
/// the two positions noncommuting, nu the two momenta.
///
/// All three are real. hbar must be positive and hbar^2 > mu*nu must hold;
/// the latter keeps both spectral constants of the coupled-oscillator
/// decomposition positive.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationParams<S: Coeff> {
    hbar: S,
    mu: S,
    nu: S,
}

impl<S: Coeff> DeformationParams<S> {
    pub fn new(hbar: S, mu: S, nu: S) -> Result<Self> {
        for (name, v) in [("hbar", &hbar), ("mu", &mu), ("nu", &nu)] {
            if !v.is_real() || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be a finite real scalar")));
            }
        }
        if hbar.re_sign() <= 0 {
            return Err(Error::Config(format!("hbar > 0 violated: hbar = {hbar}")));
        }
        let gap = hbar.mul(&hbar).sub(&mu.mul(&nu));
        if gap.re_sign() <= 0 {
            return Err(Error::Config(format!(
                "hbar^2 > mu*nu violated: hbar = {hbar}, mu = {mu}, nu = {nu}"
            )));
        }
        Ok(DeformationParams { hbar, mu, nu })
    }

    /// Degenerate limits (hbar = 0 included) for internal verification of
    /// the classical product; bypasses the invariants on purpose.
    #[cfg(test)]
    pub(crate) fn new_unchecked(hbar: S, mu: S, nu: S) -> Self {
        DeformationParams { hbar, mu, nu }
    }

    /// The commutative-limit parameters (mu = nu = 0) at the same hbar.
    pub fn commutative(&self) -> Self {
        DeformationParams {
            hbar: self.hbar.clone(),
            mu: S::zero(),
            nu: S::zero(),
        }
    }

    pub fn hbar(&self) -> &S {
        &self.hbar
    }

    pub fn mu(&self) -> &S {
        &self.mu
    }

    pub fn nu(&self) -> &S {
        &self.nu
    }

    pub fn hbar_f64(&self) -> f64 {
        self.hbar.re_f64()
    }

    pub fn mu_f64(&self) -> f64 {
        self.mu.re_f64()
    }

    pub fn nu_f64(&self) -> f64 {
        self.nu.re_f64()
    }
}
