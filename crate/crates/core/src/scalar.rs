//! Coefficient backends.
//!
//! Two backends implement [`Coeff`]: exact complex rationals (`ExactC`,
//! arbitrary precision, decidable equality) and complex 64-bit floats
//! (`C64`). Algebraic identities are checked on the exact backend with zero
//! rounding; anything involving irrational constants runs on the float
//! backend with explicit tolerances.

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use num::Complex;
use std::fmt::{Debug, Display};

/// Exact complex-rational scalar.
pub type ExactC = Complex<BigRational>;

/// Complex double-precision scalar.
pub type C64 = Complex64;

/// Field operations shared by the two coefficient backends.
///
/// Arithmetic takes references so the exact backend avoids needless clones
/// of big integers in polynomial inner loops.
pub trait Coeff: Clone + PartialEq + Debug + Display + Send + Sync + 'static {
    /// True when arithmetic carries no rounding and equality is decidable.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Embed a float. Every finite f64 is a rational, so this is exact on
    /// both backends. Panics on non-finite input.
    fn from_f64(x: f64) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;

    fn is_zero(&self) -> bool;
    /// Magnitude as f64. Approximate on the exact backend; used only for
    /// pivoting, chopping and residual reporting, never for algebra.
    fn abs(&self) -> f64;
    fn re_f64(&self) -> f64;
    fn im_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// True when the imaginary part is exactly zero.
    fn is_real(&self) -> bool;
    /// Sign of the real part: -1, 0 or 1. Exact on the exact backend.
    fn re_sign(&self) -> i8;

    fn add_assign(&mut self, other: &Self) {
        *self = self.add(other);
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Scalars that support the complex exponential. Only the float backend:
/// `exp` of a rational is irrational, so the exact backend stays out.
pub trait CoeffExp: Coeff {
    fn exp(&self) -> Self;
}

impl Coeff for ExactC {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(1)), BigRational::zero())
    }

    fn i() -> Self {
        Complex::new(BigRational::zero(), BigRational::from_integer(BigInt::from(1)))
    }

    fn from_int(n: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Complex::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    fn from_f64(x: f64) -> Self {
        let r = BigRational::from_float(x).expect("non-finite float has no rational value");
        Complex::new(r, BigRational::zero())
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn neg(&self) -> Self {
        -self.clone()
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn abs(&self) -> f64 {
        self.re_f64().hypot(self.im_f64())
    }

    fn re_f64(&self) -> f64 {
        self.re.to_f64().unwrap_or(f64::NAN)
    }

    fn im_f64(&self) -> f64 {
        self.im.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn re_sign(&self) -> i8 {
        if self.re.is_zero() {
            0
        } else if self.re.is_positive() {
            1
        } else {
            -1
        }
    }
}

impl Coeff for C64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }

    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite float");
        Complex64::new(x, 0.0)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn conj(&self) -> Self {
        Complex64::new(self.re, -self.im)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn abs(&self) -> f64 {
        self.norm()
    }

    fn re_f64(&self) -> f64 {
        self.re
    }

    fn im_f64(&self) -> f64 {
        self.im
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn is_real(&self) -> bool {
        self.im == 0.0
    }

    fn re_sign(&self) -> i8 {
        if self.re == 0.0 {
            0
        } else if self.re > 0.0 {
            1
        } else {
            -1
        }
    }
}

impl CoeffExp for C64 {
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
}
