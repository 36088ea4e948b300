//! Two coupled harmonic oscillators on the noncommutative phase space.
//!
//! The pipeline runs from the physical Hamiltonian
//! `P1^2/(2 m1) + P2^2/(2 m2) + (C1 X1^2 + C2 X2^2 + C3 X1 X2)/2`
//! to closed-form spectra and Wigner states. Steps: rescale to a common
//! mass, rotate away the coupling term, split the normal-form Hamiltonian
//! into two perfect squares that star-commute at the solved angles, and
//! read off the two spectral constants. Everything here runs on the float
//! backend because the constants involve square roots and arctangents.

use crate::error::{Error, Result};
use crate::linmap::LinearMap;
use crate::params::DeformationParams;
use crate::poly::{GaussLagFn, PhasePoly, Var};
use crate::quadratic::{self, PerfectSquareHamiltonian};
use crate::scalar::{C64, Coeff};
use crate::star::StarExponential;

/// Masses and stiffness constants of the physical system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledOscillatorSpec {
    pub m1: f64,
    pub m2: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CoupledOscillatorSpec {
    pub fn new(m1: f64, m2: f64, c1: f64, c2: f64, c3: f64) -> Result<Self> {
        for v in [m1, m2, c1, c2, c3] {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        if m1 <= 0.0 {
            return Err(Error::NonPositiveMass(m1));
        }
        if m2 <= 0.0 {
            return Err(Error::NonPositiveMass(m2));
        }
        // Rescaling preserves c1*c2 and c3, so the stability condition can
        // be checked on the raw constants.
        if 4.0 * c1 * c2 <= c3 * c3 {
            return Err(Error::UnstablePotential { lhs: 4.0 * c1 * c2, rhs: c3 * c3 });
        }
        Ok(CoupledOscillatorSpec { m1, m2, c1, c2, c3 })
    }

    /// The physical Hamiltonian as a polynomial in (X1, X2, P1, P2).
    pub fn hamiltonian(&self) -> PhasePoly<C64> {
        let mut h = PhasePoly::zero();
        h.add_scaled(&PhasePoly::var(Var::P1).pow(2), &C64::from_f64(0.5 / self.m1));
        h.add_scaled(&PhasePoly::var(Var::P2).pow(2), &C64::from_f64(0.5 / self.m2));
        h.add_scaled(&PhasePoly::var(Var::X1).pow(2), &C64::from_f64(0.5 * self.c1));
        h.add_scaled(&PhasePoly::var(Var::X2).pow(2), &C64::from_f64(0.5 * self.c2));
        let cross = PhasePoly::var(Var::X1).mul(&PhasePoly::var(Var::X2));
        h.add_scaled(&cross, &C64::from_f64(0.5 * self.c3));
        h
    }
}

/// Common-mass form: one mass and three rescaled stiffness constants, plus
/// the diagonal map (X, P) -> (x, p) that realizes it.
#[derive(Clone, Debug)]
pub struct Rescaled {
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub map: LinearMap<C64>,
}

/// Rescale conjugate pairs by reciprocal quarter-power mass ratios. This
/// multiplies each (x_i, p_i) pair by reciprocal factors, so every
/// commutation relation survives unchanged.
pub fn rescale(spec: &CoupledOscillatorSpec) -> Result<Rescaled> {
    if spec.m1 <= 0.0 {
        return Err(Error::NonPositiveMass(spec.m1));
    }
    if spec.m2 <= 0.0 {
        return Err(Error::NonPositiveMass(spec.m2));
    }
    let s = (spec.m1 / spec.m2).powf(0.25);
    let map = LinearMap::diagonal([
        C64::from_f64(s),
        C64::from_f64(1.0 / s),
        C64::from_f64(1.0 / s),
        C64::from_f64(s),
    ])?;
    Ok(Rescaled {
        m: (spec.m1 * spec.m2).sqrt(),
        c1: spec.c1 * (spec.m2 / spec.m1).sqrt(),
        c2: spec.c2 * (spec.m1 / spec.m2).sqrt(),
        c3: spec.c3,
        map,
    })
}

/// Rotation angle that removes the position coupling. The branch is fixed
/// so that the y1 mode carries the larger spring constant, matching the
/// normal-form convention where the anisotropy exponent is nonnegative.
pub fn mixing_angle(c1: f64, c2: f64, c3: f64) -> f64 {
    if c3 == 0.0 && c1 == c2 {
        return 0.0;
    }
    f64::atan2(-c3, c1 - c2)
}

/// Normal-form constants: overall spring K and anisotropy exponent eta,
/// with exp(2 eta) >= 1 always.
pub fn normal_mode_params(c1: f64, c2: f64, c3: f64) -> Result<(f64, f64)> {
    let disc = 4.0 * c1 * c2 - c3 * c3;
    if disc <= 0.0 {
        return Err(Error::UnstablePotential { lhs: 4.0 * c1 * c2, rhs: c3 * c3 });
    }
    let big_k = 0.5 * disc.sqrt();
    let rho = ((c1 - c2).powi(2) + c3 * c3).sqrt();
    let e2eta = (c1 + c2 + rho) / disc.sqrt();
    Ok((big_k, 0.5 * e2eta.ln()))
}

/// The normal-form Hamiltonian
/// `(q1^2 + q2^2)/(2m) + (K/2)(e^{2 eta} y1^2 + e^{-2 eta} y2^2)`
/// as a polynomial in (y1, y2, q1, q2).
pub fn normal_hamiltonian(big_k: f64, m: f64, eta: f64) -> PhasePoly<C64> {
    let mut h = PhasePoly::zero();
    h.add_scaled(&PhasePoly::var(Var::P1).pow(2), &C64::from_f64(0.5 / m));
    h.add_scaled(&PhasePoly::var(Var::P2).pow(2), &C64::from_f64(0.5 / m));
    h.add_scaled(
        &PhasePoly::var(Var::X1).pow(2),
        &C64::from_f64(0.5 * big_k * (2.0 * eta).exp()),
    );
    h.add_scaled(
        &PhasePoly::var(Var::X2).pow(2),
        &C64::from_f64(0.5 * big_k * (-2.0 * eta).exp()),
    );
    h
}

/// The two radicals controlling the split, and the relative deformation
/// measures. `delta2` is undefined (division by zero) when eta = 0 with a
/// nonzero `K m mu + nu`; the radical form of beta2 stays valid there.
#[derive(Clone, Copy, Debug)]
pub struct BetaDelta {
    pub beta1: f64,
    pub beta2: f64,
    pub delta1: f64,
    pub delta2: Option<f64>,
}

pub fn beta_delta(big_k: f64, m: f64, eta: f64, params: &DeformationParams<C64>) -> BetaDelta {
    let hbar = params.hbar_f64();
    let mu = params.mu_f64();
    let nu = params.nu_f64();
    let km = big_k * m;
    let cosh2 = (eta.exp() + (-eta).exp()).powi(2);
    let sinh2 = (eta.exp() - (-eta).exp()).powi(2);
    let minus = km * mu - nu;
    let plus = km * mu + nu;
    let beta1 = (cosh2 * hbar * hbar * km + minus * minus).sqrt();
    let beta2 = (sinh2 * hbar * hbar * km + plus * plus).sqrt();
    let delta1 = minus * minus / (cosh2 * hbar * hbar * km);
    let delta2 = if sinh2 == 0.0 {
        if plus == 0.0 { Some(0.0) } else { None }
    } else {
        Some(plus * plus / (sinh2 * hbar * hbar * km))
    };
    BetaDelta { beta1, beta2, delta1, delta2 }
}

/// The two spectral constants from the radicals.
pub fn gap_constants(beta1: f64, beta2: f64, m: f64) -> (f64, f64) {
    ((beta1 + beta2) / (4.0 * m), (beta1 - beta2) / (4.0 * m))
}

/// Solve for the splitting angles (a, b). The two-argument arctangent of
/// each (sine, cosine) pair fixes the branch so that all four constraint
/// identities hold, not just the tangent ratios. When beta2 vanishes the
/// sum a + b is undetermined and the convention a = pi is used.
pub fn decomposition_angles(
    big_k: f64,
    m: f64,
    eta: f64,
    params: &DeformationParams<C64>,
    bd: &BetaDelta,
) -> Result<(f64, f64)> {
    let hbar = params.hbar_f64();
    let mu = params.mu_f64();
    let nu = params.nu_f64();
    let km = big_k * m;
    let root_km = km.sqrt();
    let cosh = eta.exp() + (-eta).exp();
    let sinh = eta.exp() - (-eta).exp();

    let diff = f64::atan2(hbar * root_km * cosh, km * mu - nu);
    let (a, b) = if bd.beta2 <= 1e-12 * bd.beta1 {
        let a = std::f64::consts::PI;
        (a, a - diff)
    } else {
        let sum = f64::atan2(hbar * root_km * sinh, -(km * mu + nu));
        (0.5 * (sum + diff), 0.5 * (sum - diff))
    };

    // Post-verify the constraint identities before trusting the angles.
    let mut worst: f64 = f64::max(
        ((a - b).sin() - hbar * root_km * cosh / bd.beta1).abs(),
        ((a - b).cos() - (km * mu - nu) / bd.beta1).abs(),
    );
    if bd.beta2 > 1e-12 * bd.beta1 {
        worst = worst
            .max(((a + b).sin() - hbar * root_km * sinh / bd.beta2).abs())
            .max(((a + b).cos() + (km * mu + nu) / bd.beta2).abs());
    }
    if worst > 1e-10 {
        return Err(Error::BranchSearch(format!(
            "constraint identities violated by {worst:.3e} at a = {a}, b = {b}"
        )));
    }
    Ok((a, b))
}

/// Split the normal-form Hamiltonian into two perfect squares. The sum is
/// the normal form for any angles; the solved angles additionally make the
/// two parts star-commute.
pub fn build_decomposition(
    big_k: f64,
    m: f64,
    eta: f64,
    a: f64,
    b: f64,
) -> (PerfectSquareHamiltonian<C64>, PerfectSquareHamiltonian<C64>) {
    let root_k = big_k.sqrt();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let inv_sqrt2m = 1.0 / (2.0 * m).sqrt();
    let ep = eta.exp();
    let em = (-eta).exp();

    let h1 = PerfectSquareHamiltonian::from_f64(
        [ep * root_k * a.sin() * inv_sqrt2, 0.0],
        [0.0, a.cos() * inv_sqrt2m],
        [0.0, em * root_k * b.sin() * inv_sqrt2],
        [b.cos() * inv_sqrt2m, 0.0],
    )
    .expect("finite coefficients");
    let h2 = PerfectSquareHamiltonian::from_f64(
        [ep * root_k * a.cos() * inv_sqrt2, 0.0],
        [0.0, -a.sin() * inv_sqrt2m],
        [0.0, em * root_k * b.cos() * inv_sqrt2],
        [-b.sin() * inv_sqrt2m, 0.0],
    )
    .expect("finite coefficients");
    (h1, h2)
}

/// A product Wigner state of the coupled system, expressed in the normal
/// coordinates (y1, y2, q1, q2).
#[derive(Clone, Debug)]
pub struct WignerState {
    pub n1: u32,
    pub n2: u32,
    pub w: GaussLagFn<C64>,
    pub energy: f64,
}

/// All derived constants of the coupled-oscillator solution plus the
/// coordinate chain between physical and normal variables. Immutable once
/// built; every query is a pure function.
#[derive(Clone, Debug)]
pub struct OscillatorSolution {
    pub spec: CoupledOscillatorSpec,
    pub params: DeformationParams<C64>,
    pub rescaled: Rescaled,
    pub mixing_angle: f64,
    pub big_k: f64,
    pub eta: f64,
    pub omega: f64,
    pub angle_a: f64,
    pub angle_b: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub delta1: f64,
    pub delta2: Option<f64>,
    pub k1: f64,
    pub k2: f64,
    h1: PerfectSquareHamiltonian<C64>,
    h2: PerfectSquareHamiltonian<C64>,
    to_normal: LinearMap<C64>,
    to_original: LinearMap<C64>,
}

impl OscillatorSolution {
    pub fn solve(spec: &CoupledOscillatorSpec, params: &DeformationParams<C64>) -> Result<Self> {
        let spec = CoupledOscillatorSpec::new(spec.m1, spec.m2, spec.c1, spec.c2, spec.c3)?;
        let rescaled = rescale(&spec)?;
        let alpha = mixing_angle(rescaled.c1, rescaled.c2, rescaled.c3);
        let (big_k, eta) = normal_mode_params(rescaled.c1, rescaled.c2, rescaled.c3)?;
        let omega = (big_k / rescaled.m).sqrt();
        let bd = beta_delta(big_k, rescaled.m, eta, params);
        let (angle_a, angle_b) = decomposition_angles(big_k, rescaled.m, eta, params, &bd)?;
        let (h1, h2) = build_decomposition(big_k, rescaled.m, eta, angle_a, angle_b);
        let (k1, k2) = gap_constants(bd.beta1, bd.beta2, rescaled.m);
        if k2 <= 0.0 {
            return Err(Error::NonPositiveK(k2));
        }
        let half = 0.5 * alpha;
        let rotation =
            LinearMap::block_rotation(C64::from_f64(half.cos()), C64::from_f64(half.sin()));
        let to_normal = rescaled.map.then(&rotation);
        let to_original = to_normal.inverse()?;
        Ok(OscillatorSolution {
            spec,
            params: params.clone(),
            rescaled,
            mixing_angle: alpha,
            big_k,
            eta,
            omega,
            angle_a,
            angle_b,
            beta1: bd.beta1,
            beta2: bd.beta2,
            delta1: bd.delta1,
            delta2: bd.delta2,
            k1,
            k2,
            h1,
            h2,
            to_normal,
            to_original,
        })
    }

    /// The two star-commuting halves in normal coordinates.
    pub fn decomposition(&self) -> (&PerfectSquareHamiltonian<C64>, &PerfectSquareHamiltonian<C64>) {
        (&self.h1, &self.h2)
    }

    /// Point map (X, P) -> (y, q). Substituting it into a function of the
    /// normal coordinates expresses that function in physical coordinates.
    pub fn to_normal_map(&self) -> &LinearMap<C64> {
        &self.to_normal
    }

    pub fn to_original_map(&self) -> &LinearMap<C64> {
        &self.to_original
    }

    /// Normal-form Hamiltonian in (y, q).
    pub fn normal_hamiltonian(&self) -> PhasePoly<C64> {
        normal_hamiltonian(self.big_k, self.rescaled.m, self.eta)
    }

    /// Energy of the (n1, n2) level: `(2 n1 + 1) k1 + (2 n2 + 1) k2`.
    pub fn energy(&self, n1: u32, n2: u32) -> f64 {
        (2.0 * n1 as f64 + 1.0) * self.k1 + (2.0 * n2 as f64 + 1.0) * self.k2
    }

    /// The same energy along the three algebraically equal routes: gap
    /// constants, radicals over 2m, and the factored radical form.
    pub fn energy_routes(&self, n1: u32, n2: u32) -> (f64, f64, f64) {
        let n_sum = (n1 + n2) as f64 + 1.0;
        let n_diff = n1 as f64 - n2 as f64;
        let route1 = self.energy(n1, n2);
        let route2 = (n_sum * self.beta1 + n_diff * self.beta2) / (2.0 * self.rescaled.m);
        let cosh = self.eta.exp() + (-self.eta).exp();
        let sinh = self.eta.exp() - (-self.eta).exp();
        let t2 = match self.delta2 {
            Some(d2) => n_diff * sinh * (1.0 + d2).sqrt(),
            // Undefined delta2 only happens when sinh = 0, where the term
            // vanishes identically.
            None => 0.0,
        };
        let route3 = 0.5
            * self.params.hbar_f64()
            * self.omega
            * (n_sum * cosh * (1.0 + self.delta1).sqrt() + t2);
        (route1, route2, route3)
    }

    /// Commutative-limit energy at the same oscillator constants.
    pub fn energy_commutative(&self, n1: u32, n2: u32) -> f64 {
        let hw = self.params.hbar_f64() * self.omega;
        hw * (self.eta.exp() * (n1 as f64 + 0.5) + (-self.eta).exp() * (n2 as f64 + 0.5))
    }

    /// First-order deformation expansion of the energy, valid for small
    /// mu and nu; the error is fourth order in the deformation scale.
    pub fn energy_perturbative(&self, n1: u32, n2: u32) -> f64 {
        let hw = self.params.hbar_f64() * self.omega;
        let cosh = self.eta.exp() + (-self.eta).exp();
        let sinh = self.eta.exp() - (-self.eta).exp();
        let n_sum = (n1 + n2) as f64 + 1.0;
        let n_diff = n1 as f64 - n2 as f64;
        let d2_term = match self.delta2 {
            Some(d2) => 0.25 * n_diff * sinh * d2,
            None => 0.0,
        };
        self.energy_commutative(n1, n2) + hw * (0.25 * n_sum * cosh * self.delta1 + d2_term)
    }

    /// Single-mode Wigner function of the first half.
    pub fn wigner_mode1(&self, n: u32) -> Result<GaussLagFn<C64>> {
        quadratic::wigner_function(&self.h1, &self.params, n)
    }

    /// Single-mode Wigner function of the second half.
    pub fn wigner_mode2(&self, n: u32) -> Result<GaussLagFn<C64>> {
        quadratic::wigner_function(&self.h2, &self.params, n)
    }

    /// Product state in normal coordinates. The star product of the two
    /// factors reduces to the ordinary product at the solved angles, so
    /// the state is stored as the pointwise product.
    pub fn wigner_state(&self, n1: u32, n2: u32) -> Result<WignerState> {
        if self.k1 <= 0.0 {
            return Err(Error::NonPositiveK(self.k1));
        }
        if self.k2 <= 0.0 {
            return Err(Error::NonPositiveK(self.k2));
        }
        let w = self.wigner_mode1(n1)?.product(&self.wigner_mode2(n2)?);
        Ok(WignerState { n1, n2, w, energy: self.energy(n1, n2) })
    }

    /// Express a function of the normal coordinates in the physical ones.
    pub fn to_original_coords(&self, w: &GaussLagFn<C64>) -> GaussLagFn<C64> {
        self.to_normal.substitute_gauss(w)
    }

    /// Inverse of `to_original_coords`.
    pub fn to_normal_coords(&self, w: &GaussLagFn<C64>) -> GaussLagFn<C64> {
        self.to_original.substitute_gauss(w)
    }

    /// Time evolution as the pointwise product of the two closed forms.
    pub fn evolution(&self) -> Result<CoupledEvolution> {
        Ok(CoupledEvolution {
            exp1: StarExponential::new(&self.h1, &self.params)?,
            exp2: StarExponential::new(&self.h2, &self.params)?,
        })
    }
}

/// Product of the closed-form star exponentials of the two halves.
#[derive(Clone, Debug)]
pub struct CoupledEvolution {
    exp1: StarExponential,
    exp2: StarExponential,
}

impl CoupledEvolution {
    pub fn factors(&self) -> (&StarExponential, &StarExponential) {
        (&self.exp1, &self.exp2)
    }

    pub fn eval(&self, t: C64, pt: &crate::poly::PhasePoint) -> Result<C64> {
        Ok(self.exp1.eval(t, pt)? * self.exp2.eval(t, pt)?)
    }

    pub fn eval_wick(&self, tau: f64, pt: &crate::poly::PhasePoint) -> Result<C64> {
        Ok(self.exp1.eval_wick(tau, pt)? * self.exp2.eval_wick(tau, pt)?)
    }
}
