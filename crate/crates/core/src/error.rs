use num::complex::Complex64;
use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("matrix is singular and cannot define a change of variables")]
    SingularMatrix,

    #[error("star product of two Gaussian-Laguerre functions leaves the representable class")]
    BothGaussLag,

    #[error("Gaussian exponent must have total degree <= 2, got {0}")]
    ExponentDegree(usize),

    #[error("non-finite value encountered during evaluation")]
    NonFinite,

    #[error("degenerate Hamiltonian: the spectral constant k vanishes")]
    DegenerateHamiltonian,

    #[error("spectrum requires a nonzero spectral constant, got k = {0}")]
    NonPositiveK(f64),

    #[error("caustic: cos(k t / hbar) vanishes at t = {t} for k = {k}")]
    Caustic { k: f64, t: Complex64 },

    #[error("unstable potential: 4*c1*c2 > c3^2 violated (4*c1*c2 = {lhs}, c3^2 = {rhs})")]
    UnstablePotential { lhs: f64, rhs: f64 },

    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("branch search for the decomposition angles failed: {0}")]
    BranchSearch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
