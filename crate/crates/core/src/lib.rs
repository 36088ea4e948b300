//! Symbolic and numeric toolkit for a 4D noncommutative phase space.
//!
//! The library provides exact (complex-rational) and float polynomial
//! algebra over the phase-space coordinates, the generalized star product
//! deformed by (hbar, mu, nu), star exponentials and Wigner functions of
//! perfect-square Hamiltonians, and the complete normal-form solution of
//! two coupled harmonic oscillators on that phase space: spectra, Wigner
//! states, time evolution and the reductions to known special cases.

pub mod coupled;
pub mod error;
pub mod linmap;
pub mod params;
pub mod poly;
pub mod quadratic;
pub mod report;
pub mod scalar;
pub mod star;

pub use error::{Error, Result};
pub use linmap::LinearMap;
pub use params::DeformationParams;
pub use poly::{GaussLagFn, PhaseFn, PhasePoint, PhasePoly, Var};
pub use quadratic::{PerfectSquareHamiltonian, SpectralData};
pub use scalar::{C64, Coeff, CoeffExp, ExactC};
pub use star::{StarContext, StarExponential};
