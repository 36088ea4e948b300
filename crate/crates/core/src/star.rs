//! The generalized star product and everything built directly on it:
//! Moyal brackets, star powers, the star exponential as a truncated series
//! and in closed form, and the reduction of `H *` to a one-variable
//! operator for perfect-square Hamiltonians.
//!
//! The product is an exponential of a bidifferential operator with three
//! pieces: the symplectic hbar pairing between conjugate coordinates, a mu
//! pairing between the two positions and a nu pairing between the two
//! momenta. Acting on a polynomial side of total degree d, every term with
//! more than d derivative pairs annihilates that side, so the expansion is
//! a finite sum and needs no series tolerance.

use crate::error::{Error, Result};
use crate::params::DeformationParams;
use crate::poly::{CHOP_REL, GaussLagFn, PhaseFn, PhasePoint, PhasePoly, Var};
use crate::quadratic::PerfectSquareHamiltonian;
use crate::scalar::{C64, Coeff};

/// Immutable star-product context: deformation parameters plus the residual
/// tolerance used by float-backend checks.
#[derive(Clone, Debug)]
pub struct StarContext<S: Coeff> {
    params: DeformationParams<S>,
    tolerance: f64,
    generators: Vec<(Var, Var, S)>,
}

fn generators<S: Coeff>(params: &DeformationParams<S>) -> Vec<(Var, Var, S)> {
    let half_i = S::i().mul(&S::from_ratio(1, 2));
    let mut gens = Vec::new();
    let h = half_i.mul(params.hbar());
    if !h.is_zero() {
        for (x, p) in [(Var::X1, Var::P1), (Var::X2, Var::P2)] {
            gens.push((x, p, h.clone()));
            gens.push((p, x, h.neg()));
        }
    }
    let xs = [Var::X1, Var::X2];
    let ps = [Var::P1, Var::P2];
    for (i, row) in crate::params::EPSILON.iter().enumerate() {
        for (j, &eps) in row.iter().enumerate() {
            if eps == 0 {
                continue;
            }
            let factor = half_i.mul(&S::from_int(eps));
            let mu_term = factor.mul(params.mu());
            if !mu_term.is_zero() {
                gens.push((xs[i], xs[j], mu_term));
            }
            let nu_term = factor.mul(params.nu());
            if !nu_term.is_zero() {
                gens.push((ps[i], ps[j], nu_term));
            }
        }
    }
    gens
}

/// One side of a star product: either a bare polynomial or the polynomial
/// prefactor of a Gaussian (whose exponent is untouched by derivatives of
/// the other side and factors out of every term).
trait Side<S: Coeff>: Sized {
    fn derive(&self, v: Var) -> Self;
    fn vanished(&self) -> bool;
    fn poly(&self) -> &PhasePoly<S>;
}

impl<S: Coeff> Side<S> for PhasePoly<S> {
    fn derive(&self, v: Var) -> Self {
        self.derivative(v)
    }

    fn vanished(&self) -> bool {
        self.is_zero()
    }

    fn poly(&self) -> &PhasePoly<S> {
        self
    }
}

struct GaussSide<'a, S: Coeff> {
    exponent: &'a PhasePoly<S>,
    prefactor: PhasePoly<S>,
}

impl<S: Coeff> Side<S> for GaussSide<'_, S> {
    fn derive(&self, v: Var) -> Self {
        let mut pre = self.prefactor.derivative(v);
        pre.add_scaled_product(&self.exponent.derivative(v), &self.prefactor, &S::one());
        GaussSide { exponent: self.exponent, prefactor: pre }
    }

    fn vanished(&self) -> bool {
        self.prefactor.is_zero()
    }

    fn poly(&self) -> &PhasePoly<S> {
        &self.prefactor
    }
}

/// Lazily filled table of iterated derivatives keyed by multi-degree.
/// Derivatives commute, so every multi-index of generator actions that
/// lands on the same multi-degree shares one computation. A `None` entry
/// marks an annihilated state.
struct DerivativeMemo<S: Coeff, T: Side<S>> {
    states: std::collections::HashMap<[u16; 4], Option<T>>,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Coeff, T: Side<S>> DerivativeMemo<S, T> {
    fn new(root: T) -> Self {
        let mut states = std::collections::HashMap::new();
        let root = if root.vanished() { None } else { Some(root) };
        states.insert([0u16; 4], root);
        DerivativeMemo { states, _marker: std::marker::PhantomData }
    }

    fn ensure(&mut self, key: [u16; 4]) {
        if self.states.contains_key(&key) {
            return;
        }
        let v = Var::ALL
            .into_iter()
            .find(|v| key[v.index()] > 0)
            .expect("root is preinserted");
        let mut parent = key;
        parent[v.index()] -= 1;
        self.ensure(parent);
        let child = match &self.states[&parent] {
            None => None,
            Some(state) => {
                let d = state.derive(v);
                if d.vanished() { None } else { Some(d) }
            }
        };
        self.states.insert(key, child);
    }

    fn get(&mut self, key: [u16; 4]) -> Option<&T> {
        self.ensure(key);
        self.states[&key].as_ref()
    }

    fn vanished(&mut self, key: [u16; 4]) -> bool {
        self.get(key).is_none()
    }
}

/// Walk the multi-indices over the generator terms. Each generator can act
/// any number of times; its coefficient enters as c^n / n!. A chain stops
/// as soon as either side is annihilated, which bounds the total order by
/// the degree of the polynomial side.
#[allow(clippy::too_many_arguments)]
fn accumulate<S: Coeff, L: Side<S>, R: Side<S>>(
    gens: &[(Var, Var, S)],
    idx: usize,
    l_deg: [u16; 4],
    r_deg: [u16; 4],
    coeff: S,
    left: &mut DerivativeMemo<S, L>,
    right: &mut DerivativeMemo<S, R>,
    out: &mut PhasePoly<S>,
) {
    if idx == gens.len() {
        left.ensure(l_deg);
        right.ensure(r_deg);
        if let (Some(l), Some(r)) = (&left.states[&l_deg], &right.states[&r_deg]) {
            out.add_scaled_product(l.poly(), r.poly(), &coeff);
        }
        return;
    }
    let (lv, rv, c) = &gens[idx];
    accumulate(gens, idx + 1, l_deg, r_deg, coeff.clone(), left, right, out);
    let mut ld = l_deg;
    let mut rd = r_deg;
    let mut scaled = coeff;
    let mut n: i64 = 0;
    loop {
        ld[lv.index()] += 1;
        rd[rv.index()] += 1;
        n += 1;
        scaled = scaled.mul(c).div(&S::from_int(n));
        if left.vanished(ld) || right.vanished(rd) {
            return;
        }
        accumulate(gens, idx + 1, ld, rd, scaled.clone(), left, right, out);
    }
}

fn star_sides<S: Coeff, L: Side<S>, R: Side<S>>(
    gens: &[(Var, Var, S)],
    left: L,
    right: R,
) -> PhasePoly<S> {
    let mut lmemo = DerivativeMemo::new(left);
    let mut rmemo = DerivativeMemo::new(right);
    let mut out = PhasePoly::zero();
    accumulate(gens, 0, [0; 4], [0; 4], S::one(), &mut lmemo, &mut rmemo, &mut out);
    out
}

impl<S: Coeff> StarContext<S> {
    pub fn new(params: DeformationParams<S>) -> Self {
        let generators = generators(&params);
        StarContext { params, tolerance: 1e-10, generators }
    }

    pub fn with_tolerance(params: DeformationParams<S>, tolerance: f64) -> Result<Self> {
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::Config(format!(
                "tolerance > 0 violated: tolerance = {tolerance}"
            )));
        }
        let mut ctx = Self::new(params);
        ctx.tolerance = tolerance;
        Ok(ctx)
    }

    pub fn params(&self) -> &DeformationParams<S> {
        &self.params
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn cleanup(&self, p: PhasePoly<S>) -> PhasePoly<S> {
        if S::EXACT { p } else { p.chopped(CHOP_REL) }
    }

    /// Star product of two polynomials. Exact truncation at the smaller of
    /// the two degrees.
    pub fn star_polys(&self, f: &PhasePoly<S>, g: &PhasePoly<S>) -> PhasePoly<S> {
        let out = star_sides(&self.generators, f.clone(), g.clone());
        self.cleanup(out)
    }

    /// Polynomial on the left, Gaussian-Laguerre function on the right.
    /// The Gaussian exponent passes through; only the prefactor evolves.
    pub fn star_poly_gauss(&self, f: &PhasePoly<S>, w: &GaussLagFn<S>) -> GaussLagFn<S> {
        let right = GaussSide { exponent: w.exponent(), prefactor: w.prefactor().clone() };
        let out = star_sides(&self.generators, f.clone(), right);
        GaussLagFn::new(w.exponent().clone(), self.cleanup(out))
            .expect("exponent is unchanged by the star product")
    }

    /// Gaussian-Laguerre function on the left, polynomial on the right.
    pub fn star_gauss_poly(&self, w: &GaussLagFn<S>, f: &PhasePoly<S>) -> GaussLagFn<S> {
        let left = GaussSide { exponent: w.exponent(), prefactor: w.prefactor().clone() };
        let out = star_sides(&self.generators, left, f.clone());
        GaussLagFn::new(w.exponent().clone(), self.cleanup(out))
            .expect("exponent is unchanged by the star product")
    }

    /// Dispatching star product; at least one side must be a polynomial.
    pub fn star(&self, f: &PhaseFn<S>, g: &PhaseFn<S>) -> Result<PhaseFn<S>> {
        match (f, g) {
            (PhaseFn::Poly(a), PhaseFn::Poly(b)) => Ok(PhaseFn::Poly(self.star_polys(a, b))),
            (PhaseFn::Poly(a), PhaseFn::Gauss(b)) => {
                Ok(PhaseFn::Gauss(self.star_poly_gauss(a, b)))
            }
            (PhaseFn::Gauss(a), PhaseFn::Poly(b)) => {
                Ok(PhaseFn::Gauss(self.star_gauss_poly(a, b)))
            }
            (PhaseFn::Gauss(_), PhaseFn::Gauss(_)) => Err(Error::BothGaussLag),
        }
    }

    /// `[f, g] = f * g - g * f` for polynomials.
    pub fn moyal_bracket_polys(&self, f: &PhasePoly<S>, g: &PhasePoly<S>) -> PhasePoly<S> {
        self.star_polys(f, g).sub(&self.star_polys(g, f))
    }

    /// Dispatching Moyal bracket.
    pub fn moyal_bracket(&self, f: &PhaseFn<S>, g: &PhaseFn<S>) -> Result<PhaseFn<S>> {
        let fg = self.star(f, g)?;
        let gf = self.star(g, f)?;
        match (fg, gf) {
            (PhaseFn::Poly(a), PhaseFn::Poly(b)) => Ok(PhaseFn::Poly(a.sub(&b))),
            (PhaseFn::Gauss(a), PhaseFn::Gauss(b)) => {
                debug_assert_eq!(a.exponent(), b.exponent());
                Ok(PhaseFn::Gauss(GaussLagFn::new(
                    a.exponent().clone(),
                    a.prefactor().sub(b.prefactor()),
                )?))
            }
            _ => unreachable!("star preserves the result kind"),
        }
    }

    /// n-fold star power; the empty product is the constant 1.
    pub fn star_power(&self, h: &PhasePoly<S>, n: u32) -> PhasePoly<S> {
        let mut acc = PhasePoly::one();
        for _ in 0..n {
            acc = self.star_polys(h, &acc);
        }
        acc
    }

    /// Taylor pieces of the star exponential: element n holds
    /// `(1/n!) (1/(i hbar))^n (H*)^n`, so the series in t is
    /// `sum_n t^n terms[n]`.
    pub fn star_exp_terms(&self, h: &PhasePoly<S>, n_max: u32) -> Vec<PhasePoly<S>> {
        let i_hbar = S::i().mul(self.params.hbar());
        let mut terms = vec![PhasePoly::one()];
        for n in 1..=n_max {
            let prev = terms.last().unwrap();
            let factor = S::one().div(&i_hbar.mul(&S::from_int(n as i64)));
            let next = self.star_polys(h, prev).scale(&factor);
            terms.push(next);
        }
        terms
    }

    /// Partial sum of the star exponential up to order n_max at scalar t.
    pub fn star_exp_series(&self, h: &PhasePoly<S>, t: &S, n_max: u32) -> PhasePoly<S> {
        let mut acc = PhasePoly::zero();
        let mut t_pow = S::one();
        for term in self.star_exp_terms(h, n_max) {
            acc.add_scaled(&term, &t_pow);
            t_pow = t_pow.mul(t);
        }
        acc
    }
}

/// For a perfect-square Hamiltonian, `H * G(H)` collapses to the
/// one-variable operator `H G - k^2 G' - k^2 H G''`. Returns the largest
/// coefficient of the difference between the two routes; exactly zero on
/// the exact backend.
pub fn operator_reduction_residual<S: Coeff>(
    ctx: &StarContext<S>,
    h: &PerfectSquareHamiltonian<S>,
    g_coeffs: &[S],
) -> f64 {
    fn compose<S: Coeff>(coeffs: &[S], h: &PhasePoly<S>) -> PhasePoly<S> {
        let mut acc = PhasePoly::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul(h);
            acc = acc.add(&PhasePoly::constant(c.clone()));
        }
        acc
    }
    fn derive_coeffs<S: Coeff>(coeffs: &[S]) -> Vec<S> {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c.mul(&S::from_int(j as i64)))
            .collect()
    }

    let h_poly = h.expand();
    let k = h.spectral_constant(ctx.params());
    let k2 = k.mul(&k);
    let g0 = compose(g_coeffs, &h_poly);
    let g1 = derive_coeffs(g_coeffs);
    let g2 = derive_coeffs(&g1);

    let lhs = ctx.star_polys(&h_poly, &g0);
    let rhs = h_poly
        .mul(&g0)
        .sub(&compose(&g1, &h_poly).scale(&k2))
        .sub(&h_poly.mul(&compose(&g2, &h_poly)).scale(&k2));
    lhs.sub(&rhs).max_abs()
}

/// Closed-form star exponential of a perfect-square Hamiltonian:
/// `1/cos(k t / hbar) exp(H tan(k t / hbar) / (i k))`, evaluated pointwise
/// at complex time. Times where the cosine vanishes are caustics and raise
/// an explicit error instead of propagating infinities.
#[derive(Clone, Debug)]
pub struct StarExponential {
    h: PhasePoly<C64>,
    k: f64,
    hbar: f64,
}

const CAUSTIC_EPS: f64 = 1e-12;

impl StarExponential {
    pub fn new(
        h: &PerfectSquareHamiltonian<C64>,
        params: &DeformationParams<C64>,
    ) -> Result<Self> {
        let k = h.spectral_constant(params).re_f64();
        if k == 0.0 {
            return Err(Error::DegenerateHamiltonian);
        }
        Ok(StarExponential { h: h.expand(), k, hbar: params.hbar_f64() })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn hamiltonian(&self) -> &PhasePoly<C64> {
        &self.h
    }

    pub fn eval(&self, t: C64, pt: &PhasePoint) -> Result<C64> {
        let u = t * C64::new(self.k / self.hbar, 0.0);
        let cos_u = u.cos();
        if cos_u.norm() < CAUSTIC_EPS {
            return Err(Error::Caustic { k: self.k, t });
        }
        let h_val = self.h.eval(pt)?;
        let arg = h_val / (C64::i() * C64::new(self.k, 0.0)) * u.tan();
        let v = arg.exp() / cos_u;
        if Coeff::is_finite(&v) {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Wick-rotated evaluation at t = -i tau; real and positive for tau > 0.
    pub fn eval_wick(&self, tau: f64, pt: &PhasePoint) -> Result<C64> {
        self.eval(C64::new(0.0, -tau), pt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::laguerre;
    use crate::scalar::ExactC;

    type EPoly = PhasePoly<ExactC>;

    fn exact_params(hbar: (i64, i64), mu: (i64, i64), nu: (i64, i64)) -> DeformationParams<ExactC> {
        DeformationParams::new(
            ExactC::from_ratio(hbar.0, hbar.1),
            ExactC::from_ratio(mu.0, mu.1),
            ExactC::from_ratio(nu.0, nu.1),
        )
        .unwrap()
    }

    fn moyal_ctx() -> StarContext<ExactC> {
        StarContext::new(exact_params((1, 1), (0, 1), (0, 1)))
    }

    fn deformed_ctx() -> StarContext<ExactC> {
        StarContext::new(exact_params((1, 1), (1, 2), (-1, 3)))
    }

    fn v(var: Var) -> EPoly {
        PhasePoly::var(var)
    }

    fn c(num: i64, den: i64) -> ExactC {
        ExactC::from_ratio(num, den)
    }

    fn i_times(s: ExactC) -> ExactC {
        ExactC::i().mul(&s)
    }

    /// Independent order-by-order expansion of the bidifferential series,
    /// structured as repeated application of the first-order operator to a
    /// list of (left, right) pairs. Exponentially slower than the engine
    /// but shares none of its code path.
    fn oracle_star(
        params: &DeformationParams<ExactC>,
        f: &EPoly,
        g: &EPoly,
    ) -> EPoly {
        let half_i = i_times(c(1, 2));
        let gens = [
            (Var::X1, Var::P1, half_i.mul(params.hbar())),
            (Var::X2, Var::P2, half_i.mul(params.hbar())),
            (Var::P1, Var::X1, half_i.mul(params.hbar()).neg()),
            (Var::P2, Var::X2, half_i.mul(params.hbar()).neg()),
            (Var::X1, Var::X2, half_i.mul(params.mu())),
            (Var::X2, Var::X1, half_i.mul(params.mu()).neg()),
            (Var::P1, Var::P2, half_i.mul(params.nu())),
            (Var::P2, Var::P1, half_i.mul(params.nu()).neg()),
        ];
        let mut layer: Vec<(EPoly, EPoly, ExactC)> =
            vec![(f.clone(), g.clone(), ExactC::one())];
        let mut acc = EPoly::zero();
        let mut factorial = ExactC::one();
        let mut order: i64 = 0;
        while !layer.is_empty() {
            let inv_fact = ExactC::one().div(&factorial);
            for (l, r, coeff) in &layer {
                acc.add_scaled_product(l, r, &coeff.mul(&inv_fact));
            }
            let mut next = Vec::new();
            for (l, r, coeff) in &layer {
                for (lv, rv, gc) in &gens {
                    if gc.is_zero() {
                        continue;
                    }
                    let ld = l.derivative(*lv);
                    if ld.is_zero() {
                        continue;
                    }
                    let rd = r.derivative(*rv);
                    if rd.is_zero() {
                        continue;
                    }
                    next.push((ld, rd, coeff.mul(gc)));
                }
            }
            layer = next;
            order += 1;
            factorial = factorial.mul(&ExactC::from_int(order));
        }
        acc
    }

    #[test]
    fn x1_star_p1_gains_half_i() {
        let got = moyal_ctx().star_polys(&v(Var::X1), &v(Var::P1));
        let expect = v(Var::X1).mul(&v(Var::P1)).add(&EPoly::constant(i_times(c(1, 2))));
        assert_eq!(got, expect);
    }

    #[test]
    fn coordinate_relations_hold_exactly() {
        // All six pairwise brackets of the coordinates.
        let ctx = deformed_ctx();
        let hbar = ctx.params().hbar().clone();
        let mu = ctx.params().mu().clone();
        let nu = ctx.params().nu().clone();
        let cases: Vec<(EPoly, EPoly, ExactC)> = vec![
            (v(Var::X1), v(Var::X2), i_times(mu)),
            (v(Var::P1), v(Var::P2), i_times(nu)),
            (v(Var::X1), v(Var::P1), i_times(hbar.clone())),
            (v(Var::X2), v(Var::P2), i_times(hbar)),
            (v(Var::X1), v(Var::P2), ExactC::zero()),
            (v(Var::X2), v(Var::P1), ExactC::zero()),
        ];
        for (f, g, expect) in cases {
            let got = ctx.moyal_bracket_polys(&f, &g);
            assert_eq!(got, EPoly::constant(expect));
        }
    }

    #[test]
    fn classical_limit_star_is_pointwise_product() {
        // With all three deformation parameters zero every derivative term
        // carries a vanishing factor.
        let params = DeformationParams::new_unchecked(
            ExactC::zero(),
            ExactC::zero(),
            ExactC::zero(),
        );
        let ctx = StarContext::new(params);
        let f = v(Var::X1)
            .pow(2)
            .mul(&v(Var::P2))
            .add(&v(Var::X2).scale(&c(3, 4)))
            .sub(&EPoly::constant(c(1, 7)));
        let g = v(Var::P1).pow(3).add(&v(Var::X1).mul(&v(Var::X2)));
        assert_eq!(ctx.star_polys(&f, &g), f.mul(&g));
    }

    #[test]
    fn bracket_of_conjugate_pair_is_i_hbar() {
        let ctx = exact_params((3, 2), (0, 1), (0, 1));
        let ctx = StarContext::new(ctx);
        let got = ctx.moyal_bracket_polys(&v(Var::X1), &v(Var::P1));
        assert_eq!(got, EPoly::constant(i_times(c(3, 2))));
    }

    #[test]
    fn bracket_with_itself_vanishes() {
        let ctx = deformed_ctx();
        let f = v(Var::X1).pow(2).add(&v(Var::P2).mul(&v(Var::X2)));
        assert!(ctx.moyal_bracket_polys(&f, &f).is_zero());
    }

    #[test]
    fn bracket_x1_squared_with_p1() {
        // Expanding the kernel to second order by hand gives 2 i x1.
        let ctx = moyal_ctx();
        let got = ctx.moyal_bracket_polys(&v(Var::X1).pow(2), &v(Var::P1));
        assert_eq!(got, v(Var::X1).scale(&i_times(c(2, 1))));
    }

    #[test]
    fn star_power_trivial_orders() {
        let ctx = deformed_ctx();
        let h = v(Var::X1).pow(2).add(&v(Var::P1).pow(2));
        assert_eq!(ctx.star_power(&h, 0), EPoly::one());
        assert_eq!(ctx.star_power(&h, 1), h);
    }

    #[test]
    fn star_power_two_matches_independent_expansion() {
        let ctx = moyal_ctx();
        let h = v(Var::X1).pow(2).add(&v(Var::P1).pow(2));
        let got = ctx.star_power(&h, 2);
        let oracle = oracle_star(ctx.params(), &h, &h);
        assert_eq!(got, oracle);
        // Frozen value from the oracle: H*H = H^2 - 1 at hbar = 1.
        let expect = h.mul(&h).sub(&EPoly::one());
        assert_eq!(got, expect);
    }

    #[test]
    fn star_matches_independent_expansion_on_deformed_space() {
        let ctx = deformed_ctx();
        let f = v(Var::X1).mul(&v(Var::X2)).add(&v(Var::P1).pow(2));
        let g = v(Var::P2).pow(2).add(&v(Var::X1).scale(&c(2, 3)));
        assert_eq!(ctx.star_polys(&f, &g), oracle_star(ctx.params(), &f, &g));
    }

    #[test]
    fn exp_series_trivial_orders() {
        let ctx = moyal_ctx();
        let h = v(Var::X1).pow(2).add(&v(Var::P1).mul(&v(Var::X2)));
        let t = c(2, 5);
        assert_eq!(ctx.star_exp_series(&h, &t, 0), EPoly::one());
        // Order 1: 1 + (t / (i hbar)) h.
        let expect = EPoly::one().add(&h.scale(&t.div(&i_times(ExactC::one()))));
        assert_eq!(ctx.star_exp_series(&h, &t, 1), expect);
    }

    #[test]
    fn exp_series_order_two_matches_star_power() {
        let ctx = moyal_ctx();
        let h = v(Var::X1).pow(2).add(&v(Var::P1).pow(2));
        let terms = ctx.star_exp_terms(&h, 2);
        let i_sq_inv = ExactC::one().div(&i_times(ExactC::one()).powi(2));
        let expect = ctx.star_power(&h, 2).scale(&i_sq_inv.mul(&c(1, 2)));
        assert_eq!(terms[2], expect);
    }

    #[test]
    fn exp_series_satisfies_evolution_equation_termwise() {
        // i hbar (n+1) terms[n+1] = h * terms[n] for every order.
        let ctx = deformed_ctx();
        let h = v(Var::X1).pow(2).add(&v(Var::P2).pow(2)).add(&v(Var::X2).mul(&v(Var::P1)));
        let terms = ctx.star_exp_terms(&h, 5);
        let i_hbar = i_times(ctx.params().hbar().clone());
        for n in 0..5 {
            let lhs = terms[n + 1].scale(&i_hbar.mul(&ExactC::from_int(n as i64 + 1)));
            let rhs = ctx.star_polys(&h, &terms[n]);
            assert!(lhs.sub(&rhs).is_zero(), "order {n}");
        }
    }

    #[test]
    fn conjugation_reverses_the_order() {
        let ctx = deformed_ctx();
        let f = v(Var::X1)
            .pow(2)
            .scale(&i_times(c(1, 3)))
            .add(&v(Var::P2).scale(&c(5, 2)));
        let g = v(Var::X2).mul(&v(Var::P1)).sub(&EPoly::constant(i_times(c(2, 1))));
        let lhs = ctx.star_polys(&f, &g).conj();
        let rhs = ctx.star_polys(&g.conj(), &f.conj());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_identity_sample() {
        let ctx = deformed_ctx();
        let f = v(Var::X1).pow(2);
        let g = v(Var::P1).mul(&v(Var::X2));
        let h = v(Var::P2).pow(2).add(&v(Var::X1));
        let term = |a: &EPoly, b: &EPoly, c: &EPoly| {
            ctx.moyal_bracket_polys(a, &ctx.moyal_bracket_polys(b, c))
        };
        let sum = term(&f, &g, &h).add(&term(&g, &h, &f)).add(&term(&h, &f, &g));
        assert!(sum.is_zero());
    }

    #[test]
    fn rational_rotation_commutes_with_star() {
        // A 3-4-5 rotation of both pairs keeps every structure constant, so
        // substitution commutes with the product exactly.
        use crate::linmap::LinearMap;
        let ctx = deformed_ctx();
        let m = LinearMap::block_rotation(c(3, 5), c(4, 5));
        let f = v(Var::X1).pow(2).add(&v(Var::P2).mul(&v(Var::X2)));
        let g = v(Var::P1).pow(2).add(&v(Var::X2).scale(&c(7, 2)));
        let lhs = m.substitute_poly(&ctx.star_polys(&f, &g));
        let rhs = ctx.star_polys(&m.substitute_poly(&f), &m.substitute_poly(&g));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn both_gauss_sides_are_rejected() {
        let ctx = moyal_ctx();
        let w = GaussLagFn::new(v(Var::X1).pow(2).neg(), EPoly::one()).unwrap();
        let a = PhaseFn::Gauss(w.clone());
        let b = PhaseFn::Gauss(w);
        assert!(matches!(ctx.star(&a, &b), Err(Error::BothGaussLag)));
    }

    #[test]
    fn dispatching_bracket_handles_mixed_kinds() {
        let ctx = moyal_ctx();
        let h = v(Var::X1).pow(2).add(&v(Var::P1).pow(2));
        let w = GaussLagFn::new(h.neg(), EPoly::one()).unwrap();
        let got = ctx
            .moyal_bracket(&PhaseFn::Poly(h), &PhaseFn::Gauss(w))
            .unwrap();
        // H and its own star eigenfunction commute.
        match got {
            PhaseFn::Gauss(g) => assert!(g.prefactor().is_zero()),
            PhaseFn::Poly(_) => panic!("bracket with a Gaussian side stays Gaussian"),
        }
    }

    #[test]
    fn ground_state_is_a_star_eigenfunction() {
        // H = x1^2 + p1^2 with hbar = 1: H * exp(-H) = exp(-H) on the nose,
        // from both sides.
        let ctx = moyal_ctx();
        let h = v(Var::X1).pow(2).add(&v(Var::P1).pow(2));
        let w = GaussLagFn::new(h.neg(), EPoly::one()).unwrap();
        let left = ctx.star_poly_gauss(&h, &w);
        assert_eq!(left.prefactor(), &EPoly::one());
        let right = ctx.star_gauss_poly(&w, &h);
        assert_eq!(right.prefactor(), &EPoly::one());
    }

    #[test]
    fn operator_reduction_constant_and_linear() {
        let ctx = moyal_ctx();
        let h = PerfectSquareHamiltonian::new(
            [ExactC::one(), ExactC::zero()],
            [ExactC::zero(), ExactC::zero()],
            [ExactC::zero(), ExactC::zero()],
            [ExactC::one(), ExactC::zero()],
        )
        .unwrap();
        // G = 1: both routes give H.
        assert_eq!(operator_reduction_residual(&ctx, &h, &[ExactC::one()]), 0.0);
        // G = H: both routes give H^2 - k^2.
        assert_eq!(
            operator_reduction_residual(&ctx, &h, &[ExactC::zero(), ExactC::one()]),
            0.0
        );
    }

    #[test]
    fn operator_reduction_random_rational_hamiltonians() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for trial in 0..20 {
            let params = exact_params((1, 1), (1, rng.gen_range(2..5)), (-1, rng.gen_range(2..5)));
            let ctx = StarContext::new(params);
            let mut entry = || ExactC::from_int(rng.gen_range(-2..=2));
            let h = PerfectSquareHamiltonian::new(
                [entry(), entry()],
                [entry(), entry()],
                [entry(), entry()],
                [entry(), entry()],
            )
            .unwrap();
            // G = H^2 with a lower-order tail.
            let g = [c(1, 3), c(-1, 2), ExactC::one()];
            assert_eq!(operator_reduction_residual(&ctx, &h, &g), 0.0, "trial {trial}");
        }
    }

    fn float_params(hbar: f64, mu: f64, nu: f64) -> DeformationParams<C64> {
        DeformationParams::new(C64::from_f64(hbar), C64::from_f64(mu), C64::from_f64(nu)).unwrap()
    }

    fn unit_float_psh() -> PerfectSquareHamiltonian<C64> {
        PerfectSquareHamiltonian::from_f64([1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]).unwrap()
    }

    #[test]
    fn closed_form_is_one_at_zero_time() {
        let params = float_params(1.0, 0.0, 0.0);
        let e = StarExponential::new(&unit_float_psh(), &params).unwrap();
        for pt in [
            PhasePoint::new(0.0, 0.0, 0.0, 0.0).unwrap(),
            PhasePoint::new(1.5, -0.5, 2.0, 0.25).unwrap(),
        ] {
            let v = e.eval(C64::zero(), &pt).unwrap();
            assert!((v - C64::one()).norm() < 1e-15);
        }
    }

    #[test]
    fn closed_form_quarter_period_value() {
        // t = pi hbar / (4k) at a point where H = k gives sqrt(2) e^{-i}.
        let params = float_params(1.0, 0.0, 0.0);
        let e = StarExponential::new(&unit_float_psh(), &params).unwrap();
        let pt = PhasePoint::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let t = C64::new(std::f64::consts::FRAC_PI_4, 0.0);
        let got = e.eval(t, &pt).unwrap();
        let expect = C64::new(2.0f64.sqrt(), 0.0) * C64::new(0.0, -1.0).exp();
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn caustic_time_raises_explicit_error() {
        let params = float_params(1.0, 0.0, 0.0);
        let e = StarExponential::new(&unit_float_psh(), &params).unwrap();
        let pt = PhasePoint::new(0.5, 0.0, 0.0, 0.0).unwrap();
        let t = C64::new(std::f64::consts::FRAC_PI_2, 0.0);
        match e.eval(t, &pt) {
            Err(Error::Caustic { k, .. }) => assert_eq!(k, 1.0),
            other => panic!("expected caustic error, got {other:?}"),
        }
    }

    #[test]
    fn wick_rotated_closed_form_matches_partial_sums() {
        // tau = 0.5, hbar = k = 1, H = 1: the closed form equals
        // (1/cosh 0.5) exp(-tanh 0.5); 25 alternating terms of the level
        // expansion reproduce it to better than 1e-6.
        let params = float_params(1.0, 0.0, 0.0);
        let e = StarExponential::new(&unit_float_psh(), &params).unwrap();
        let pt = PhasePoint::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let tau = 0.5;
        let closed = e.eval_wick(tau, &pt).unwrap();
        let expect = 1.0 / 0.5f64.cosh() * (-0.5f64.tanh()).exp();
        assert!((closed.re - expect).abs() < 1e-14);
        assert!(closed.im.abs() < 1e-14);

        let h_val = 1.0;
        let k = 1.0;
        let mut sum = 0.0;
        for m in 0..25u32 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sum += 2.0
                * sign
                * (-(k) * (2.0 * m as f64 + 1.0) * tau).exp()
                * (-h_val / k).exp()
                * laguerre(m, 2.0 * h_val / k);
        }
        assert!((closed.re - sum).abs() < 1e-6);
    }

    #[test]
    fn closed_form_taylor_matches_star_series() {
        // Pointwise Taylor coefficients of the closed form, produced by an
        // independent truncated power-series oracle (series division,
        // composition with exp), must match the star-series pieces.
        let params = float_params(1.0, 0.1, -0.2);
        let ctx = StarContext::new(params.clone());
        let h = PerfectSquareHamiltonian::from_f64(
            [1.0, 0.5],
            [0.0, 0.25],
            [-0.5, 1.0],
            [1.0, 0.0],
        )
        .unwrap();
        let h_poly = h.expand();
        let k = h.spectral_constant(&params).re_f64();
        let hbar = params.hbar_f64();
        let n = 8usize;
        let terms = ctx.star_exp_terms(&h_poly, n as u32);

        // cos and sin of (k t / hbar) as truncated series in t.
        let mut cos_s = vec![0.0f64; n + 1];
        let mut sin_s = vec![0.0f64; n + 1];
        let mut pw = 1.0;
        let mut fact = 1.0;
        for (j, (c_j, s_j)) in cos_s.iter_mut().zip(sin_s.iter_mut()).enumerate() {
            if j > 0 {
                pw *= k / hbar;
                fact *= j as f64;
            }
            match j % 4 {
                0 => *c_j = pw / fact,
                1 => *s_j = pw / fact,
                2 => *c_j = -pw / fact,
                _ => *s_j = -pw / fact,
            }
        }
        let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; n + 1];
            for (i, ai) in a.iter().enumerate() {
                for (j, bj) in b.iter().enumerate() {
                    if i + j <= n {
                        out[i + j] += ai * bj;
                    }
                }
            }
            out
        };
        // 1/cos by series inversion.
        let mut inv_cos = vec![0.0f64; n + 1];
        inv_cos[0] = 1.0;
        for j in 1..=n {
            let mut s = 0.0;
            for i in 1..=j {
                s += cos_s[i] * inv_cos[j - i];
            }
            inv_cos[j] = -s;
        }
        let tan_s = mul(&sin_s, &inv_cos);

        for pt in [
            PhasePoint::new(0.4, -0.3, 0.2, 0.6).unwrap(),
            PhasePoint::new(1.0, 0.5, -0.8, 0.1).unwrap(),
        ] {
            let h_val = h_poly.eval(&pt).unwrap();
            // exp(w * tan_series) with complex w, term-recursive.
            let w = h_val / (C64::i() * C64::new(k, 0.0));
            let arg: Vec<C64> = tan_s.iter().map(|&a| w * C64::new(a, 0.0)).collect();
            let mut ex = vec![C64::zero(); n + 1];
            ex[0] = C64::one();
            for j in 1..=n {
                let mut s = C64::zero();
                for i in 1..=j {
                    s += C64::new(i as f64, 0.0) * arg[i] * ex[j - i];
                }
                ex[j] = s / C64::new(j as f64, 0.0);
            }
            let inv_cos_c: Vec<C64> = inv_cos.iter().map(|&a| C64::new(a, 0.0)).collect();
            let mut closed = vec![C64::zero(); n + 1];
            for (i, ei) in ex.iter().enumerate() {
                for (j, cj) in inv_cos_c.iter().enumerate() {
                    if i + j <= n {
                        closed[i + j] += ei * cj;
                    }
                }
            }
            for (order, closed_coeff) in closed.iter().enumerate() {
                let series_coeff = terms[order].eval(&pt).unwrap();
                let scale = closed_coeff.norm().max(1.0);
                assert!(
                    (closed_coeff - series_coeff).norm() / scale < 1e-9,
                    "order {order}: closed {closed_coeff} vs series {series_coeff}"
                );
            }
        }
    }
}
