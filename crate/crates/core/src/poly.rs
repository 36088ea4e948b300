//! Sparse multivariate polynomials over the four phase-space coordinates
//! (x1, x2, p1, p2).
//!
//! Terms are kept in a `BTreeMap` keyed by exponent 4-tuples so iteration
//! order, printing and serialization are deterministic. Coefficients that
//! are exactly zero are never stored; the float backend additionally offers
//! a relative chop for cleaning up rounding dust.

use crate::error::{Error, Result};
use crate::scalar::{Coeff, CoeffExp};
use std::collections::BTreeMap;
use std::fmt;

/// Relative chop threshold for float-backend polynomial cleanup.
pub const CHOP_REL: f64 = 1e-13;

/// Exponent 4-tuple, indexed as (x1, x2, p1, p2).
pub type Expo = [u16; 4];

/// One of the four phase-space coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X1,
    X2,
    P1,
    P2,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X1, Var::X2, Var::P1, Var::P2];

    pub fn index(self) -> usize {
        match self {
            Var::X1 => 0,
            Var::X2 => 1,
            Var::P1 => 2,
            Var::P2 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::P1 => "p1",
            Var::P2 => "p2",
        }
    }
}

/// A point of the 4D phase space, with finite coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn new(x1: f64, x2: f64, p1: f64, p2: f64) -> Result<Self> {
        let pt = PhasePoint { x1, x2, p1, p2 };
        if pt.coords().iter().all(|c| c.is_finite()) {
            Ok(pt)
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.x1, self.x2, self.p1, self.p2]
    }

    pub fn scalars<S: Coeff>(&self) -> [S; 4] {
        let c = self.coords();
        [
            S::from_f64(c[0]),
            S::from_f64(c[1]),
            S::from_f64(c[2]),
            S::from_f64(c[3]),
        ]
    }
}

fn total(e: &Expo) -> usize {
    e.iter().map(|&k| k as usize).sum()
}

/// Sparse polynomial in the four phase-space coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoly<S: Coeff> {
    terms: BTreeMap<Expo, S>,
}

impl<S: Coeff> PhasePoly<S> {
    pub fn zero() -> Self {
        PhasePoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        let mut p = Self::zero();
        p.insert_add([0, 0, 0, 0], c);
        p
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0u16; 4];
        e[v.index()] = 1;
        Self::monomial(e, S::one())
    }

    pub fn monomial(expo: Expo, coeff: S) -> Self {
        let mut p = Self::zero();
        p.insert_add(expo, coeff);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Expo, S)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.insert_add(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Maximum total exponent; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(total).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &S)> {
        self.terms.iter()
    }

    pub fn coeff(&self, expo: &Expo) -> S {
        self.terms.get(expo).cloned().unwrap_or_else(S::zero)
    }

    fn insert_add(&mut self, expo: Expo, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&expo) {
            Some(c) => {
                c.add_assign(&coeff);
                if c.is_zero() {
                    self.terms.remove(&expo);
                }
            }
            None => {
                self.terms.insert(expo, coeff);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.insert_add(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.insert_add(*e, c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            out.terms.insert(*e, c.neg());
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            out.insert_add(*e, c.mul(s));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        out.add_scaled_product(self, other, &S::one());
        out
    }

    /// `self += s * (f * g)` without building intermediates.
    pub fn add_scaled_product(&mut self, f: &Self, g: &Self, s: &S) {
        if s.is_zero() {
            return;
        }
        for (ef, cf) in f.terms() {
            let cfs = cf.mul(s);
            for (eg, cg) in g.terms() {
                let e = [
                    ef[0] + eg[0],
                    ef[1] + eg[1],
                    ef[2] + eg[2],
                    ef[3] + eg[3],
                ];
                self.insert_add(e, cfs.mul(cg));
            }
        }
    }

    pub fn add_scaled(&mut self, f: &Self, s: &S) {
        if s.is_zero() {
            return;
        }
        for (e, c) in f.terms() {
            self.insert_add(*e, c.mul(s));
        }
    }

    /// Ordinary (pointwise) n-th power.
    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, v: Var) -> Self {
        let k = v.index();
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = *e;
            e2[k] -= 1;
            out.insert_add(e2, c.mul(&S::from_int(e[k] as i64)));
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            out.terms.insert(*e, c.conj());
        }
        out
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Drop coefficients below `rel * max_abs`. Identity on the exact backend.
    pub fn chopped(&self, rel: f64) -> Self {
        if S::EXACT {
            return self.clone();
        }
        let cut = rel * self.max_abs();
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            if c.abs() > cut {
                out.terms.insert(*e, c.clone());
            }
        }
        out
    }

    pub fn eval_at(&self, coords: &[S; 4]) -> S {
        if self.is_zero() {
            return S::zero();
        }
        let mut maxe = [0u16; 4];
        for e in self.terms.keys() {
            for k in 0..4 {
                maxe[k] = maxe[k].max(e[k]);
            }
        }
        // Power tables per variable keep evaluation linear in term count.
        let pows: Vec<Vec<S>> = (0..4)
            .map(|k| {
                let mut v = Vec::with_capacity(maxe[k] as usize + 1);
                v.push(S::one());
                for j in 1..=maxe[k] as usize {
                    let prev = v[j - 1].mul(&coords[k]);
                    v.push(prev);
                }
                v
            })
            .collect();
        let mut acc = S::zero();
        for (e, c) in self.terms() {
            let mut t = c.clone();
            for k in 0..4 {
                if e[k] > 0 {
                    t = t.mul(&pows[k][e[k] as usize]);
                }
            }
            acc.add_assign(&t);
        }
        acc
    }

    pub fn eval(&self, pt: &PhasePoint) -> Result<S> {
        let v = self.eval_at(&pt.scalars::<S>());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }
}

/// `|f - g|_inf / |reference|_inf`, with an absolute fallback when the
/// reference vanishes.
pub fn rel_residual<S: Coeff>(diff: &PhasePoly<S>, reference: &PhasePoly<S>) -> f64 {
    let scale = reference.max_abs();
    if scale == 0.0 {
        diff.max_abs()
    } else {
        diff.max_abs() / scale
    }
}

impl<S: Coeff> fmt::Display for PhasePoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for v in Var::ALL {
                let k = e[v.index()];
                if k == 1 {
                    write!(f, "*{}", v.name())?;
                } else if k > 1 {
                    write!(f, "*{}^{}", v.name(), k)?;
                }
            }
        }
        Ok(())
    }
}

/// A function of the form `exp(q) * p` with `q` a polynomial of total degree
/// at most 2 and `p` an arbitrary polynomial. Wigner functions and their
/// images under linear changes of variables live here.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLagFn<S: Coeff> {
    exponent: PhasePoly<S>,
    prefactor: PhasePoly<S>,
}

impl<S: Coeff> GaussLagFn<S> {
    pub fn new(exponent: PhasePoly<S>, prefactor: PhasePoly<S>) -> Result<Self> {
        let d = exponent.degree();
        if d > 2 {
            return Err(Error::ExponentDegree(d));
        }
        Ok(GaussLagFn { exponent, prefactor })
    }

    pub fn exponent(&self) -> &PhasePoly<S> {
        &self.exponent
    }

    pub fn prefactor(&self) -> &PhasePoly<S> {
        &self.prefactor
    }

    pub fn into_parts(self) -> (PhasePoly<S>, PhasePoly<S>) {
        (self.exponent, self.prefactor)
    }

    /// d/dv (e^q p) = e^q (p dq/dv + dp/dv).
    pub fn derivative(&self, v: Var) -> Self {
        let mut pre = self.prefactor.derivative(v);
        pre.add_scaled_product(&self.exponent.derivative(v), &self.prefactor, &S::one());
        GaussLagFn {
            exponent: self.exponent.clone(),
            prefactor: pre,
        }
    }

    pub fn mul_poly(&self, f: &PhasePoly<S>) -> Self {
        GaussLagFn {
            exponent: self.exponent.clone(),
            prefactor: self.prefactor.mul(f),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        GaussLagFn {
            exponent: self.exponent.clone(),
            prefactor: self.prefactor.scale(s),
        }
    }

    /// Ordinary pointwise product; exponents add, so the class is closed.
    pub fn product(&self, other: &Self) -> Self {
        GaussLagFn {
            exponent: self.exponent.add(&other.exponent),
            prefactor: self.prefactor.mul(&other.prefactor),
        }
    }

    pub fn conj(&self) -> Self {
        GaussLagFn {
            exponent: self.exponent.conj(),
            prefactor: self.prefactor.conj(),
        }
    }
}

impl<S: CoeffExp> GaussLagFn<S> {
    pub fn eval(&self, pt: &PhasePoint) -> Result<S> {
        let q = self.exponent.eval(pt)?;
        let v = q.exp().mul(&self.prefactor.eval(pt)?);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }
}

/// Union of the two representable function kinds, for callers that dispatch
/// dynamically (the star product accepts either side).
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseFn<S: Coeff> {
    Poly(PhasePoly<S>),
    Gauss(GaussLagFn<S>),
}

impl<S: Coeff> PhaseFn<S> {
    pub fn as_poly(&self) -> Option<&PhasePoly<S>> {
        match self {
            PhaseFn::Poly(p) => Some(p),
            PhaseFn::Gauss(_) => None,
        }
    }

    pub fn as_gauss(&self) -> Option<&GaussLagFn<S>> {
        match self {
            PhaseFn::Gauss(g) => Some(g),
            PhaseFn::Poly(_) => None,
        }
    }
}

impl<S: CoeffExp> PhaseFn<S> {
    pub fn eval(&self, pt: &PhasePoint) -> Result<S> {
        match self {
            PhaseFn::Poly(p) => p.eval(pt),
            PhaseFn::Gauss(g) => g.eval(pt),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{C64, ExactC};

    fn x1<S: Coeff>() -> PhasePoly<S> {
        PhasePoly::var(Var::X1)
    }

    fn p1<S: Coeff>() -> PhasePoly<S> {
        PhasePoly::var(Var::P1)
    }

    #[test]
    fn eval_monomial_product() {
        // f = x1*p1 at (2, 0, 3, 0) is 6
        let f = x1::<C64>().mul(&p1());
        let pt = PhasePoint::new(2.0, 0.0, 3.0, 0.0).unwrap();
        assert_eq!(f.eval(&pt).unwrap(), C64::from_int(6));
    }

    #[test]
    fn eval_zero_poly() {
        let f = PhasePoly::<C64>::zero();
        let pt = PhasePoint::new(1.0, -2.0, 0.5, 3.0).unwrap();
        assert_eq!(f.eval(&pt).unwrap(), C64::zero());
    }

    #[test]
    fn eval_sum_of_squares() {
        // f = x1^2 + p2^2 at (1, 5, 7, 2) is 5
        let f = x1::<ExactC>().pow(2).add(&PhasePoly::var(Var::P2).pow(2));
        let pt = PhasePoint::new(1.0, 5.0, 7.0, 2.0).unwrap();
        assert_eq!(f.eval(&pt).unwrap(), ExactC::from_int(5));
    }

    #[test]
    fn zero_coefficients_never_stored() {
        let f = x1::<ExactC>().sub(&x1());
        assert!(f.is_zero());
        assert_eq!(f.num_terms(), 0);
        assert_eq!(f.degree(), 0);
    }

    #[test]
    fn derivative_drops_degree() {
        let f = x1::<ExactC>().pow(3);
        let d = f.derivative(Var::X1);
        assert_eq!(d, x1::<ExactC>().pow(2).scale(&ExactC::from_int(3)));
        assert!(f.derivative(Var::P2).is_zero());
    }

    #[test]
    fn chop_drops_dust_relative_to_largest() {
        let f = PhasePoly::<C64>::from_terms([
            ([1, 0, 0, 0], C64::from_f64(1.0)),
            ([0, 1, 0, 0], C64::from_f64(1e-16)),
        ]);
        let g = f.chopped(CHOP_REL);
        assert_eq!(g.num_terms(), 1);
    }

    #[test]
    fn gauss_eval_unit_at_origin() {
        // exp(-x1^2) * 1 at the origin is 1
        let w = GaussLagFn::new(x1::<C64>().pow(2).neg(), PhasePoly::one()).unwrap();
        let pt = PhasePoint::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(w.eval(&pt).unwrap(), C64::one());
    }

    #[test]
    fn gauss_eval_degenerate_gaussian() {
        // exp(0) * (x1 + p1) at (1, 0, 2, 0) is 3
        let w = GaussLagFn::new(PhasePoly::zero(), x1::<C64>().add(&p1())).unwrap();
        let pt = PhasePoint::new(1.0, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(w.eval(&pt).unwrap(), C64::from_int(3));
    }

    #[test]
    fn gauss_eval_standard_gaussian() {
        // exp(-(x1^2 + p1^2)) at (1, 0, 1, 0) is e^-2; oracle value frozen
        // from the scalar exponential.
        let q = x1::<C64>().pow(2).add(&p1().pow(2)).neg();
        let w = GaussLagFn::new(q, PhasePoly::one()).unwrap();
        let pt = PhasePoint::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let got = w.eval(&pt).unwrap();
        assert!((got.re - 0.1353352832366127).abs() < 1e-15);
        assert_eq!(got.im, 0.0);
    }

    #[test]
    fn gauss_exponent_degree_guard() {
        let cubic = x1::<C64>().pow(3);
        assert!(matches!(
            GaussLagFn::new(cubic, PhasePoly::one()),
            Err(Error::ExponentDegree(3))
        ));
    }

    #[test]
    fn gauss_derivative_matches_product_rule() {
        // d/dx1 exp(-x1^2)*x1 = exp(-x1^2)*(1 - 2 x1^2)
        let q = x1::<ExactC>().pow(2).neg();
        let w = GaussLagFn::new(q, x1::<ExactC>()).unwrap();
        let d = w.derivative(Var::X1);
        let expect = PhasePoly::one().sub(&x1::<ExactC>().pow(2).scale(&ExactC::from_int(2)));
        assert_eq!(d.prefactor(), &expect);
    }

    #[test]
    fn non_finite_point_rejected() {
        assert!(PhasePoint::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(PhasePoint::new(0.0, f64::INFINITY, 0.0, 0.0).is_err());
    }
}
