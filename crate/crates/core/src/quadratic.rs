//! Hamiltonians that split into two squared real linear forms.
//!
//! For `H = (a.x + b.p)^2 + (c.x + d.p)^2` the whole spectral problem is
//! governed by one constant `k`: the levels are `E_n = (2n+1) k` and the
//! eigenfunctions are `exp(-H/k) L_n(2H/k)`.

use crate::error::{Error, Result};
use crate::params::DeformationParams;
use crate::poly::{GaussLagFn, PhasePoly, Var};
use crate::scalar::Coeff;

/// Coefficient vectors of the two linear forms; all entries are real.
#[derive(Clone, Debug, PartialEq)]
pub struct PerfectSquareHamiltonian<S: Coeff> {
    a: [S; 2],
    b: [S; 2],
    c: [S; 2],
    d: [S; 2],
}

fn wedge<S: Coeff>(u: &[S; 2], v: &[S; 2]) -> S {
    u[0].mul(&v[1]).sub(&u[1].mul(&v[0]))
}

fn dot<S: Coeff>(u: &[S; 2], v: &[S; 2]) -> S {
    u[0].mul(&v[0]).add(&u[1].mul(&v[1]))
}

impl<S: Coeff> PerfectSquareHamiltonian<S> {
    pub fn new(a: [S; 2], b: [S; 2], c: [S; 2], d: [S; 2]) -> Result<Self> {
        for v in a.iter().chain(&b).chain(&c).chain(&d) {
            if !v.is_real() || !v.is_finite() {
                return Err(Error::Config(
                    "perfect-square coefficients must be finite reals".into(),
                ));
            }
        }
        Ok(PerfectSquareHamiltonian { a, b, c, d })
    }

    pub fn from_f64(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Result<Self> {
        let lift = |v: [f64; 2]| -> Result<[S; 2]> {
            if !v[0].is_finite() || !v[1].is_finite() {
                return Err(Error::NonFinite);
            }
            Ok([S::from_f64(v[0]), S::from_f64(v[1])])
        };
        Self::new(lift(a)?, lift(b)?, lift(c)?, lift(d)?)
    }

    /// Swap the two squared forms. Leaves the polynomial unchanged and
    /// flips the sign of the spectral constant.
    pub fn swapped(&self) -> Self {
        PerfectSquareHamiltonian {
            a: self.c.clone(),
            b: self.d.clone(),
            c: self.a.clone(),
            d: self.b.clone(),
        }
    }

    /// The first linear form `a.x + b.p` as a polynomial.
    fn form(u: &[S; 2], v: &[S; 2]) -> PhasePoly<S> {
        let mut f = PhasePoly::zero();
        f.add_scaled(&PhasePoly::var(Var::X1), &u[0]);
        f.add_scaled(&PhasePoly::var(Var::X2), &u[1]);
        f.add_scaled(&PhasePoly::var(Var::P1), &v[0]);
        f.add_scaled(&PhasePoly::var(Var::P2), &v[1]);
        f
    }

    /// Expand to the degree-2 polynomial `(a.x + b.p)^2 + (c.x + d.p)^2`.
    pub fn expand(&self) -> PhasePoly<S> {
        let f1 = Self::form(&self.a, &self.b);
        let f2 = Self::form(&self.c, &self.d);
        f1.mul(&f1).add(&f2.mul(&f2))
    }

    /// The spectral constant
    /// `k = (a.d - b.c) hbar + (a ^ c) mu + (b ^ d) nu`.
    pub fn spectral_constant(&self, params: &DeformationParams<S>) -> S {
        let t1 = dot(&self.a, &self.d).sub(&dot(&self.b, &self.c)).mul(params.hbar());
        let t2 = wedge(&self.a, &self.c).mul(params.mu());
        let t3 = wedge(&self.b, &self.d).mul(params.nu());
        t1.add(&t2).add(&t3)
    }
}

/// Laguerre polynomial L_n evaluated by the three-term recurrence.
pub fn laguerre(n: u32, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 - z;
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 - z) * cur - mf * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// L_n with a polynomial argument, by the same recurrence. Exact when the
/// coefficients are exact.
pub fn laguerre_poly<S: Coeff>(n: u32, z: &PhasePoly<S>) -> PhasePoly<S> {
    if n == 0 {
        return PhasePoly::one();
    }
    let mut prev = PhasePoly::one();
    let mut cur = PhasePoly::one().sub(z);
    for m in 1..n {
        let mf = S::from_int(m as i64);
        let two_m_plus_1 = S::from_int(2 * m as i64 + 1);
        let inv_next = S::one().div(&S::from_int(m as i64 + 1));
        // (m+1) L_{m+1} = (2m+1 - z) L_m - m L_{m-1}
        let mut next = cur.scale(&two_m_plus_1).sub(&z.mul(&cur));
        next = next.sub(&prev.scale(&mf));
        let next = next.scale(&inv_next);
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalize the spectral constant to be positive, swapping the roles of
/// the two squares when necessary. Errors when k vanishes.
fn positive_constant<S: Coeff>(
    h: &PerfectSquareHamiltonian<S>,
    params: &DeformationParams<S>,
) -> Result<S> {
    let k = h.spectral_constant(params);
    if k.is_zero() {
        return Err(Error::DegenerateHamiltonian);
    }
    if k.re_sign() < 0 {
        log::info!("spectral constant is negative; swapping the squared forms to flip its sign");
        Ok(k.neg())
    } else {
        Ok(k)
    }
}

/// Wigner function of level n: `exp(-H/k) L_n(2H/k)`, unnormalized.
pub fn wigner_function<S: Coeff>(
    h: &PerfectSquareHamiltonian<S>,
    params: &DeformationParams<S>,
    n: u32,
) -> Result<GaussLagFn<S>> {
    let k = positive_constant(h, params)?;
    let h_poly = h.expand();
    let exponent = h_poly.scale(&S::one().neg().div(&k));
    let z = h_poly.scale(&S::from_int(2).div(&k));
    let prefactor = laguerre_poly(n, &z);
    GaussLagFn::new(exponent, prefactor)
}

/// Equally spaced spectrum `E_n = (2n+1) k` for n = 0..=n_max.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData<S: Coeff> {
    pub k: S,
    pub levels: Vec<S>,
}

pub fn spectrum<S: Coeff>(
    h: &PerfectSquareHamiltonian<S>,
    params: &DeformationParams<S>,
    n_max: u32,
) -> Result<SpectralData<S>> {
    let k = positive_constant(h, params)?;
    let levels = (0..=n_max)
        .map(|n| S::from_int(2 * n as i64 + 1).mul(&k))
        .collect();
    Ok(SpectralData { k, levels })
}
