//! Machine-checkable verification suites.
//!
//! Each suite runs a batch of identity checks and reports one named
//! residual per identity. Exact-backend checks use tolerance 0; float
//! checks use the tolerance passed in. The suites double as the backing
//! for the CLI `verify` command and for the acceptance tests.

use crate::coupled::{CoupledOscillatorSpec, OscillatorSolution};
use crate::params::DeformationParams;
use crate::poly::{PhasePoint, PhasePoly, Var, rel_residual};
use crate::quadratic::{self, PerfectSquareHamiltonian};
use crate::scalar::{C64, Coeff, ExactC};
use crate::star::{StarContext, operator_reduction_residual};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

/// One verified identity: the measured residual against its tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A named batch of checks; passes only if every check does.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: &str) -> Self {
        Report { suite: suite.to_string(), checks: Vec::new(), passed: 0, failed: 0, pass: true }
    }

    pub fn push(&mut self, name: &str, residual: f64, tolerance: f64) {
        let pass = residual.is_finite() && residual <= tolerance;
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.pass = false;
        }
        self.checks.push(Check { name: name.to_string(), residual, tolerance, pass });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Random polynomial: up to `max_terms` monomials of total degree at most
/// `max_deg`, with small integer coefficients and an occasional imaginary
/// part.
pub fn random_poly<S: Coeff>(rng: &mut StdRng, max_deg: u16, max_terms: usize) -> PhasePoly<S> {
    let mut p = PhasePoly::zero();
    let terms = rng.gen_range(1..=max_terms);
    for _ in 0..terms {
        let mut expo = [0u16; 4];
        let mut budget = max_deg;
        for slot in &mut expo {
            let e = rng.gen_range(0..=budget);
            *slot = e;
            budget -= e;
        }
        let re = rng.gen_range(-3i64..=3);
        let im = if rng.gen_bool(0.25) { rng.gen_range(-2i64..=2) } else { 0 };
        let coeff = S::from_int(re).add(&S::i().mul(&S::from_int(im)));
        p = p.add(&PhasePoly::monomial(expo, coeff));
    }
    p
}

/// Exact variant kept for call sites that pin the backend.
pub fn random_exact_poly(rng: &mut StdRng, max_deg: u16, max_terms: usize) -> PhasePoly<ExactC> {
    random_poly(rng, max_deg, max_terms)
}

/// Random small-rational deformation parameters with hbar = 1.
pub fn random_exact_params(rng: &mut StdRng) -> DeformationParams<ExactC> {
    let mu = ExactC::from_ratio(rng.gen_range(-2i64..=2), rng.gen_range(2i64..=4));
    let nu = ExactC::from_ratio(rng.gen_range(-2i64..=2), rng.gen_range(2i64..=4));
    // |mu nu| <= 1 < hbar^2 never triggers the invariant here.
    DeformationParams::new(ExactC::one(), mu, nu).expect("small rationals are valid")
}

/// Random integer-coefficient perfect-square Hamiltonian with a nonzero
/// spectral constant under the given parameters.
pub fn random_exact_psh(
    rng: &mut StdRng,
    params: &DeformationParams<ExactC>,
) -> PerfectSquareHamiltonian<ExactC> {
    loop {
        let mut entry = || {
            if rng.gen_bool(0.3) {
                ExactC::zero()
            } else {
                ExactC::from_int(rng.gen_range(-2i64..=2))
            }
        };
        let h = PerfectSquareHamiltonian::new(
            [entry(), entry()],
            [entry(), entry()],
            [entry(), entry()],
            [entry(), entry()],
        )
        .expect("integer entries are real");
        if !Coeff::is_zero(&h.spectral_constant(params)) && !h.expand().is_zero() {
            return h;
        }
    }
}

/// Random well-conditioned oscillator data for float-pipeline checks.
pub fn random_oscillator(rng: &mut StdRng) -> (CoupledOscillatorSpec, DeformationParams<C64>) {
    let spec = loop {
        let m1 = rng.gen_range(0.5..2.5);
        let m2 = rng.gen_range(0.5..2.5);
        let c1 = rng.gen_range(0.5..4.0);
        let c2 = rng.gen_range(0.5..4.0);
        let c3 = rng.gen_range(-1.5..1.5);
        if let Ok(s) = CoupledOscillatorSpec::new(m1, m2, c1, c2, c3) {
            break s;
        }
    };
    let mu = rng.gen_range(-0.5..0.5);
    let nu = rng.gen_range(-0.5..0.5);
    let params =
        DeformationParams::new(C64::from_f64(1.0), C64::from_f64(mu), C64::from_f64(nu))
            .expect("|mu nu| < 1 keeps the inequality");
    (spec, params)
}

/// Wick-rotated level expansion of a single closed-form factor:
/// `sum_m 2 (-1)^m e^{-k (2m+1) tau / hbar} e^{-h/k} L_m(2h/k)`.
pub fn level_sum_wick(k: f64, hbar: f64, h_val: f64, tau: f64, terms: u32) -> f64 {
    let z = 2.0 * h_val / k;
    let gauss = (-h_val / k).exp();
    let mut sum = 0.0;
    let mut l_prev = 1.0;
    let mut l_cur = 1.0 - z;
    for m in 0..terms {
        let l_m = if m == 0 {
            1.0
        } else if m == 1 {
            l_cur
        } else {
            let mf = (m - 1) as f64;
            let next = ((2.0 * mf + 1.0 - z) * l_cur - mf * l_prev) / (mf + 1.0);
            l_prev = l_cur;
            l_cur = next;
            next
        };
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sum += 2.0 * sign * (-(k / hbar) * (2.0 * m as f64 + 1.0) * tau).exp() * gauss * l_m;
    }
    sum
}

/// Wick-rotated level expansion of the coupled evolution: the product of
/// the two single-factor sums, each truncated at `terms` levels.
pub fn coupled_level_sum_wick(
    sol: &OscillatorSolution,
    tau: f64,
    terms: u32,
    pt: &PhasePoint,
) -> crate::error::Result<f64> {
    let (h1, h2) = sol.decomposition();
    let hbar = sol.params.hbar_f64();
    let h1_val = h1.expand().eval(pt)?.re;
    let h2_val = h2.expand().eval(pt)?.re;
    Ok(level_sum_wick(sol.k1, hbar, h1_val, tau, terms)
        * level_sum_wick(sol.k2, hbar, h2_val, tau, terms))
}

/// Algebra suite: coordinate relations, associativity, distributivity,
/// conjugation and the Jacobi identity over random polynomials. On the
/// exact backend run it with tolerance 0; on the float backend residuals
/// stay within the tolerance instead.
pub fn algebra_suite<S: Coeff>(seed: u64, cases: usize, tolerance: f64) -> Report {
    let mut report = Report::new("algebra");
    let mut rng = StdRng::seed_from_u64(seed);
    let params =
        DeformationParams::new(S::one(), S::from_ratio(1, 2), S::from_ratio(-1, 3))
            .expect("valid");
    let ctx = StarContext::new(params);

    let coord = |v: Var| PhasePoly::<S>::var(v);
    let i_of = |s: &S| S::i().mul(s);
    let relations: [(&str, Var, Var, S); 6] = [
        ("bracket-x1-x2-equals-i-mu", Var::X1, Var::X2, i_of(ctx.params().mu())),
        ("bracket-p1-p2-equals-i-nu", Var::P1, Var::P2, i_of(ctx.params().nu())),
        ("bracket-x1-p1-equals-i-hbar", Var::X1, Var::P1, i_of(ctx.params().hbar())),
        ("bracket-x2-p2-equals-i-hbar", Var::X2, Var::P2, i_of(ctx.params().hbar())),
        ("bracket-x1-p2-vanishes", Var::X1, Var::P2, S::zero()),
        ("bracket-x2-p1-vanishes", Var::X2, Var::P1, S::zero()),
    ];
    for (name, a, b, expect) in relations {
        let got = ctx.moyal_bracket_polys(&coord(a), &coord(b));
        let resid = got.sub(&PhasePoly::constant(expect)).max_abs();
        report.push(name, resid, tolerance);
    }

    let mut assoc: f64 = 0.0;
    let mut distrib: f64 = 0.0;
    let mut conj: f64 = 0.0;
    let mut jacobi: f64 = 0.0;
    for _ in 0..cases {
        let f = random_poly::<S>(&mut rng, 3, 5);
        let g = random_poly::<S>(&mut rng, 3, 5);
        let h = random_poly::<S>(&mut rng, 3, 5);
        let fg_h = ctx.star_polys(&ctx.star_polys(&f, &g), &h);
        let f_gh = ctx.star_polys(&f, &ctx.star_polys(&g, &h));
        assoc = assoc.max(fg_h.sub(&f_gh).max_abs());
        let lhs = ctx.star_polys(&f.add(&g), &h);
        let rhs = ctx.star_polys(&f, &h).add(&ctx.star_polys(&g, &h));
        distrib = distrib.max(lhs.sub(&rhs).max_abs());
        conj = conj.max(
            ctx.star_polys(&f, &g)
                .conj()
                .sub(&ctx.star_polys(&g.conj(), &f.conj()))
                .max_abs(),
        );
        let br = |a: &PhasePoly<S>, b: &PhasePoly<S>| ctx.moyal_bracket_polys(a, b);
        let cyc = br(&f, &br(&g, &h)).add(&br(&g, &br(&h, &f))).add(&br(&h, &br(&f, &g)));
        jacobi = jacobi.max(cyc.max_abs());
    }
    report.push("star-associativity-random-triples", assoc, tolerance);
    report.push("star-distributivity-random-triples", distrib, tolerance);
    report.push("star-conjugation-reverses-order", conj, tolerance);
    report.push("moyal-jacobi-identity", jacobi, tolerance);
    report
}

/// Exact-backend eigenvalue suite: star products of random perfect-square
/// Hamiltonians with their level functions, from both sides, plus the
/// reduction to the one-variable operator.
pub fn genvalue_suite(seed: u64, hamiltonians: usize, n_max: u32) -> Report {
    let mut report = Report::new("genvalue");
    let mut rng = StdRng::seed_from_u64(seed);
    let mut left: f64 = 0.0;
    let mut right: f64 = 0.0;
    let mut reduction: f64 = 0.0;
    for _ in 0..hamiltonians {
        let params = random_exact_params(&mut rng);
        let ctx = StarContext::new(params.clone());
        let h = random_exact_psh(&mut rng, &params);
        let h_poly = h.expand();
        let k = h.spectral_constant(&params);
        let k_abs = if k.re_sign() < 0 { k.neg() } else { k };
        for n in 0..=n_max {
            let w = quadratic::wigner_function(&h, &params, n).expect("k is nonzero");
            let energy = ExactC::from_int(2 * n as i64 + 1).mul(&k_abs);
            let scaled = w.prefactor().scale(&energy);
            let lw = ctx.star_poly_gauss(&h_poly, &w);
            left = left.max(lw.prefactor().sub(&scaled).max_abs());
            let wl = ctx.star_gauss_poly(&w, &h_poly);
            right = right.max(wl.prefactor().sub(&scaled).max_abs());
        }
        let g = [
            ExactC::from_ratio(1, 2),
            ExactC::from_int(-1),
            ExactC::from_ratio(1, 3),
            ExactC::one(),
        ];
        reduction = reduction.max(operator_reduction_residual(&ctx, &h, &g));
    }
    report.push("eigen-equation-left-star", left, 0.0);
    report.push("eigen-equation-right-star", right, 0.0);
    report.push("one-variable-operator-reduction", reduction, 0.0);
    report
}

/// Float-backend suite for the full coupled-oscillator pipeline at one
/// configuration.
pub fn oscillator_suite(
    spec: &CoupledOscillatorSpec,
    params: &DeformationParams<C64>,
    tol: f64,
) -> Report {
    let mut report = Report::new("oscillator");
    let sol = match OscillatorSolution::solve(spec, params) {
        Ok(s) => s,
        Err(e) => {
            report.push(&format!("pipeline-solve ({e})"), f64::INFINITY, tol);
            return report;
        }
    };
    let ctx = StarContext::new(params.clone());
    let (h1, h2) = sol.decomposition();
    let (e1, e2) = (h1.expand(), h2.expand());
    let normal = sol.normal_hamiltonian();

    let sum_resid = rel_residual(&e1.add(&e2).sub(&normal), &normal);
    report.push("split-sums-to-normal-form", sum_resid, 1e-12);

    let physical = sol.spec.hamiltonian();
    let chain = sol.to_normal_map().substitute_poly(&normal).sub(&physical);
    report.push("normal-form-matches-physical-through-chain", rel_residual(&chain, &physical), 1e-12);

    report.push("split-parts-star-commute", ctx.moyal_bracket_polys(&e1, &e2).max_abs(), tol);
    report.push(
        "split-star-equals-plain-product",
        ctx.star_polys(&e1, &e2).sub(&e1.mul(&e2)).max_abs(),
        tol,
    );

    let k1_wedge = h1.spectral_constant(params).re_f64();
    let k2_wedge = h2.spectral_constant(params).re_f64();
    report.push("gap-constant-1-two-routes", (sol.k1 - k1_wedge).abs() / sol.k1, 1e-12);
    report.push("gap-constant-2-two-routes", (sol.k2 - k2_wedge).abs() / sol.k2, 1e-12);

    let beta_lhs = sol.beta1 * sol.beta1 - sol.beta2 * sol.beta2;
    let beta_rhs = 4.0
        * sol.big_k
        * sol.rescaled.m
        * (params.hbar_f64().powi(2) - params.mu_f64() * params.nu_f64());
    report.push("beta-difference-identity", (beta_lhs - beta_rhs).abs() / beta_rhs.abs(), 1e-12);

    let mut routes: f64 = 0.0;
    let mut spectral_cross: f64 = 0.0;
    for n1 in 0..=3u32 {
        for n2 in 0..=3u32 {
            let (r1, r2, r3) = sol.energy_routes(n1, n2);
            routes = routes.max((r1 - r2).abs() / r1).max((r1 - r3).abs() / r1);
            let wedge = (2.0 * n1 as f64 + 1.0) * k1_wedge + (2.0 * n2 as f64 + 1.0) * k2_wedge;
            spectral_cross = spectral_cross.max((r1 - wedge).abs() / r1);
        }
    }
    report.push("energy-three-routes-agree", routes, 1e-12);
    report.push("energy-matches-wedge-route", spectral_cross, 1e-12);

    let mut single: f64 = 0.0;
    for n in 0..=3u32 {
        for (h_poly, k, w) in [
            (&e1, sol.k1, sol.wigner_mode1(n)),
            (&e2, sol.k2, sol.wigner_mode2(n)),
        ] {
            let w = w.expect("positive gap constants");
            let scaled = w.prefactor().scale(&C64::from_f64((2.0 * n as f64 + 1.0) * k));
            let lw = ctx.star_poly_gauss(h_poly, &w);
            single = single.max(rel_residual(&lw.prefactor().sub(&scaled), &scaled));
            let wl = ctx.star_gauss_poly(&w, h_poly);
            single = single.max(rel_residual(&wl.prefactor().sub(&scaled), &scaled));
        }
    }
    report.push("single-mode-eigen-equations", single, tol);

    let total = e1.add(&e2);
    let mut product: f64 = 0.0;
    for (n1, n2) in [(0u32, 0u32), (1, 0), (0, 1), (2, 2)] {
        let state = sol.wigner_state(n1, n2).expect("positive gap constants");
        let scaled = state.w.prefactor().scale(&C64::from_f64(state.energy));
        let lw = ctx.star_poly_gauss(&total, &state.w);
        product = product.max(rel_residual(&lw.prefactor().sub(&scaled), &scaled));
        let wl = ctx.star_gauss_poly(&state.w, &total);
        product = product.max(rel_residual(&wl.prefactor().sub(&scaled), &scaled));
    }
    report.push("product-state-eigen-equation", product, tol);

    // Commutation relations survive the full coordinate chain.
    let coord = |k: usize| {
        let mut f = PhasePoly::<C64>::zero();
        for (j, v) in Var::ALL.iter().enumerate() {
            f.add_scaled(&PhasePoly::var(*v), &sol.to_normal_map().matrix()[k][j]);
        }
        f
    };
    let mut relations: f64 = 0.0;
    let expect = [
        (0usize, 1usize, params.mu_f64()),
        (2, 3, params.nu_f64()),
        (0, 2, params.hbar_f64()),
        (1, 3, params.hbar_f64()),
        (0, 3, 0.0),
        (1, 2, 0.0),
    ];
    for (i, j, want) in expect {
        let got = ctx.moyal_bracket_polys(&coord(i), &coord(j));
        let diff = got.sub(&PhasePoly::constant(C64::new(0.0, want)));
        relations = relations.max(diff.max_abs());
    }
    report.push("chain-preserves-commutation-relations", relations, 1e-12);

    // Round trip through the physical coordinates.
    let state = sol.wigner_state(1, 1).expect("positive gap constants");
    let back = sol.to_normal_coords(&sol.to_original_coords(&state.w));
    let round = rel_residual(&back.prefactor().sub(state.w.prefactor()), state.w.prefactor())
        .max(rel_residual(&back.exponent().sub(state.w.exponent()), state.w.exponent()));
    report.push("coordinate-round-trip", round, 1e-12);

    report
}

/// Float-backend suite comparing the closed-form evolution against its
/// Wick-rotated level expansion on a grid of interior points.
pub fn evolution_suite(
    spec: &CoupledOscillatorSpec,
    params: &DeformationParams<C64>,
    taus: &[f64],
    terms: u32,
    tol: f64,
) -> Report {
    let mut report = Report::new("evolution");
    let sol = match OscillatorSolution::solve(spec, params) {
        Ok(s) => s,
        Err(e) => {
            report.push(&format!("pipeline-solve ({e})"), f64::INFINITY, tol);
            return report;
        }
    };
    let ev = sol.evolution().expect("nonzero gap constants");

    let pt0 = PhasePoint::new(0.21, -0.43, 0.35, 0.17).expect("finite");
    match ev.eval(C64::zero(), &pt0) {
        Ok(v) => report.push("evolution-at-zero-time-is-one", (v - C64::one()).norm(), 1e-14),
        Err(_) => report.push("evolution-at-zero-time-is-one", f64::INFINITY, 1e-14),
    }

    // 10 x 10 interior grid over the (y1, q1) plane with the other two
    // coordinates held at mild fixed values.
    let mut grid = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            let y1 = -0.9 + 0.2 * i as f64;
            let q1 = -0.9 + 0.2 * j as f64;
            grid.push(PhasePoint::new(y1, 0.3, q1, -0.2).expect("finite"));
        }
    }
    for &tau in taus {
        let mut worst: f64 = 0.0;
        for pt in &grid {
            let closed = ev.eval_wick(tau, pt).expect("no caustics on the Wick axis");
            let series = coupled_level_sum_wick(&sol, tau, terms, pt).expect("finite point");
            worst = worst.max((closed.re - series).abs()).max(closed.im.abs());
        }
        report.push(&format!("level-expansion-matches-closed-form-tau-{tau}"), worst, tol);
    }
    report
}
