use std::sync::Arc;
use std::time::Instant;

use magwell::fieldlab::*;
use magwell::poly::Poly2;
use magwell::rng::Lcg64;
use magwell::starbirk::*;
use magwell::symflow::{NormalPoint, SLOW_ORIENTATION};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fig2_setup() -> (MagneticField, VectorPotential) {
    let f = MagneticField::fig2();
    let a = VectorPotential::build(&f, Gauge::LandauX).unwrap();
    (f, a)
}

/// Random series whose monomials satisfy `keep`, filled from the LCG.
fn random_series(basis: &Arc<Basis>, seed: u64, density: f64, keep: impl Fn(Monomial) -> bool) -> FormalSeries {
    let mut rng = Lcg64::new(seed);
    let mut s = FormalSeries::zero(basis);
    for i in 0..basis.len() {
        let m = basis.monomial(i);
        if keep(m) && rng.next_f64() < density {
            s.add_term(m, c(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)));
        }
    }
    s
}

/// Independent Poisson bracket on monomials:
/// `{f, g} = 2i(f_z g_z̄ − f_z̄ g_z) + σ(∂_{ξ₂}f ∂_{x₂}g − ∂_{x₂}f ∂_{ξ₂}g)`.
fn poisson(a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
    let basis = a.basis();
    let mut out = FormalSeries::zero(basis);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let (aa, ba, ab, bb) = (ma.alpha as i64, ma.beta as i64, mb.alpha as i64, mb.beta as i64);
            let hbar = (ma.hbar + mb.hbar) as usize;
            let fast = aa * bb - ba * ab;
            if fast != 0 && aa + ab >= 1 && ba + bb >= 1 {
                let m = Monomial::new(
                    (aa + ab - 1) as usize,
                    (ba + bb - 1) as usize,
                    hbar,
                    [(ma.slow[0] + mb.slow[0]) as usize, (ma.slow[1] + mb.slow[1]) as usize],
                );
                out.add_term(m, ca * cb * c(0.0, 2.0 * fast as f64));
            }
            let (ga, gb) = (ma.slow, mb.slow);
            let slow = ga[1] as i64 * gb[0] as i64 - ga[0] as i64 * gb[1] as i64;
            if slow != 0 {
                let m = Monomial::new(
                    (aa + ab) as usize,
                    (ba + bb) as usize,
                    hbar,
                    [(ga[0] + gb[0]) as usize - 1, (ga[1] + gb[1]) as usize - 1],
                );
                out.add_term(m, ca * cb * SLOW_ORIENTATION * slow as f64);
            }
        }
    }
    out
}

fn assert_series_close(a: &FormalSeries, b: &FormalSeries, tol: f64) {
    let d = a.sub(b).max_abs();
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    assert!(d <= tol * scale, "series differ by {d:e} (scale {scale:e})");
}

#[test]
fn canonical_commutators() {
    let basis = Basis::new(8, 6);
    let z = FormalSeries::monomial(&basis, Monomial::new(1, 0, 0, [0, 0]), c(1.0, 0.0));
    let zb = FormalSeries::monomial(&basis, Monomial::new(0, 1, 0, [0, 0]), c(1.0, 0.0));
    let comm = z.star(&zb).sub(&zb.star(&z));
    assert_eq!(comm, FormalSeries::monomial(&basis, Monomial::new(0, 0, 1, [0, 0]), c(2.0, 0.0)));

    let x = FormalSeries::x1(&basis);
    let xi = FormalSeries::xi1(&basis);
    let comm = x.star(&xi).sub(&xi.star(&x));
    assert_series_close(&comm, &FormalSeries::monomial(&basis, Monomial::new(0, 0, 1, [0, 0]), c(0.0, 1.0)), 1e-15);

    // Slow pair: iħ⁻¹[x₂, ξ₂] = {x₂, ξ₂} = −σ.
    let x2 = FormalSeries::monomial(&basis, Monomial::new(0, 0, 0, [1, 0]), c(1.0, 0.0));
    let xi2 = FormalSeries::monomial(&basis, Monomial::new(0, 0, 0, [0, 1]), c(1.0, 0.0));
    assert_eq!(x2.ad(&xi2), FormalSeries::constant(&basis, -SLOW_ORIENTATION));
}

#[test]
fn action_square_and_star_powers() {
    let basis = Basis::new(8, 6);
    let act = FormalSeries::action(&basis);
    let mut expect = FormalSeries::monomial(&basis, Monomial::new(2, 2, 0, [0, 0]), c(1.0, 0.0));
    expect.add_term(Monomial::new(0, 0, 2, [0, 0]), c(-1.0, 0.0));
    assert_eq!(act.star(&act), expect);

    let powers = star_powers(&basis, 4);
    for p in &powers {
        assert_eq!(nonresonant_size(p), 0.0);
        assert_eq!(action_commutator(p), 0.0);
    }
    assert_eq!(powers[2], expect);
}

#[test]
fn grading_closure() {
    // Without slow dependence the product is graded; slow derivatives only
    // bring extra powers of ħ, so in general it is filtered.
    for slow_order in [0, 2] {
        let basis = Basis::new(8, slow_order);
        for (da, db) in [(2usize, 3usize), (3, 3), (2, 4), (4, 4), (3, 5)] {
            let a = random_series(&basis, 11 + da as u64, 0.6, |m| m.fast_degree() == da);
            let b = random_series(&basis, 97 + db as u64, 0.6, |m| m.fast_degree() == db);
            for (m, _) in a.star(&b).terms() {
                assert!(m.fast_degree() >= da + db, "product term {m}");
                if slow_order == 0 {
                    assert_eq!(m.fast_degree(), da + db, "product term {m}");
                }
            }
            for (m, _) in a.ad(&b).terms() {
                assert!(m.fast_degree() >= da + db - 2, "bracket term {m}");
                if slow_order == 0 {
                    assert_eq!(m.fast_degree(), da + db - 2, "bracket term {m}");
                }
            }
        }
    }
}

#[test]
fn adjoint_of_quadratics_is_the_poisson_bracket() {
    let basis = Basis::new(8, 6);
    let quad = |m: Monomial| m.hbar == 0 && m.alpha as usize + m.beta as usize + m.slow_degree() <= 2;
    for seed in 0..6 {
        let a = random_series(&basis, seed, 0.8, quad);
        let b = random_series(&basis, 1000 + seed, 0.3, |m| m.slow_degree() <= 5);
        assert_series_close(&a.ad(&b), &poisson(&a, &b), 1e-13);
    }
    let act = FormalSeries::action(&basis);
    let b = random_series(&basis, 77, 0.5, |_| true);
    assert_series_close(&act.ad(&b), &poisson(&act, &b), 1e-14);
}

#[test]
fn classical_part_of_adjoint_is_poisson() {
    let basis = Basis::new(8, 6);
    let cl = |m: Monomial| m.hbar == 0 && m.slow_degree() <= 3;
    for seed in 0..4 {
        let a = random_series(&basis, 300 + seed, 0.3, cl);
        let b = random_series(&basis, 400 + seed, 0.3, cl);
        assert_series_close(&a.ad(&b).classical(), &poisson(&a, &b).classical(), 1e-12);
    }
}

#[test]
fn associativity_and_jacobi() {
    let basis = Basis::new(8, 6);
    let low = |m: Monomial| m.slow_degree() <= 2 && m.fast_degree() >= 1;
    let a = random_series(&basis, 1, 0.3, low);
    let b = random_series(&basis, 2, 0.3, low);
    let d = random_series(&basis, 3, 0.3, low);
    assert_series_close(&a.star(&b).star(&d), &a.star(&b.star(&d)), 1e-12);
    // ad of a degree-1 series lowers the degree, so Jacobi is only exact at
    // the truncation for degree ≥ 2.
    let high = |m: Monomial| m.slow_degree() <= 2 && m.fast_degree() >= 2;
    let (a, b, d) = (
        random_series(&basis, 4, 0.3, high),
        random_series(&basis, 5, 0.3, high),
        random_series(&basis, 6, 0.3, high),
    );
    let lhs = a.ad(&b.ad(&d)).sub(&b.ad(&a.ad(&d)));
    assert_series_close(&lhs, &a.ad(&b).ad(&d), 1e-12);
}

#[test]
fn lie_exp_of_action_is_rotation() {
    // e^{t ad_{|z|²}} z^α z̄^β = e^{2it(β−α)} z^α z̄^β.
    let basis = Basis::new(8, 0);
    let t = 0.3;
    let gen = FormalSeries::action(&basis).scale(c(t, 0.0));
    let m = Monomial::new(3, 1, 0, [0, 0]);
    let h = FormalSeries::monomial(&basis, m, c(1.0, 0.0));
    let out = gen.lie_exp(&h);
    // The series is cut at the hard cap, so compare with a loose tolerance.
    let expect = Complex64::from_polar(1.0, 2.0 * t * (1.0 - 3.0));
    assert!((out.coeff(m) - expect).norm() < 1e-6, "{:?}", out.coeff(m));
}

#[test]
fn cubic_oscillator_matches_perturbation_theory() {
    // H = x² + ξ² + r x³ with [x, ξ] = iħ. Second-order perturbation theory
    // gives E = ħ(2n+1) − (15/32) r² J² − (7/32) r² ħ² with J = ħ(2n+1).
    let basis = Basis::new(6, 0);
    let r = 0.37;
    let x = FormalSeries::x1(&basis);
    let h = FormalSeries::action(&basis).add(&x.star(&x).star(&x).scale(c(r, 0.0)));
    let out = birkhoff(&h).unwrap();
    assert!(nonresonant_size(&out.normal_form) < 1e-14);
    let classical = out.normal_form.coeff(Monomial::new(2, 2, 0, [0, 0]));
    assert!((classical - c(-15.0 * r * r / 32.0, 0.0)).norm() < 1e-13, "{classical}");
    let star = reorder_star_powers(&out.normal_form).unwrap();
    assert!((star.at_base(0, 2) + 15.0 * r * r / 32.0).abs() < 1e-13);
    assert!((star.at_base(2, 0) + 7.0 * r * r / 32.0).abs() < 1e-13, "{}", star.at_base(2, 0));
    assert!((star.at_base(0, 1) - 1.0).abs() < 1e-15);
}

#[test]
fn constant_field_symbol_is_the_action() {
    let f = MagneticField::constant(1.5).unwrap();
    let a = VectorPotential::build(&f, Gauge::LandauX).unwrap();
    let nf = NormalFormResult::compute(&f, &a, [0.2, -0.4], (6, 4)).unwrap();
    let expect = FormalSeries::action(nf.hamiltonian.basis()).scale(c(1.5, 0.0));
    assert_series_close(&nf.hamiltonian, &expect, 1e-13);
    assert!(nf.kappa().max_abs() < 1e-13);
    assert!(nf.birkhoff.quadratic_generators.is_empty());
    assert!(matches!(nf.eigen_coefficients(), Err(StarError::Field(_)) | Err(StarError::DegenerateHessian { .. })));
}

fn fig2_normal_form() -> NormalFormResult {
    let (f, a) = fig2_setup();
    NormalFormResult::at_default_basepoint(&f, &a, DEFAULT_ORDERS).unwrap()
}

#[test]
fn fig2_pipeline_is_fast_and_resonant() {
    let start = Instant::now();
    let nf = fig2_normal_form();
    assert!(start.elapsed().as_secs_f64() < 30.0);
    assert_eq!(nf.basepoint(), [0.0, 0.0]);
    assert_eq!(action_commutator(nf.kappa()), 0.0);
    assert_eq!(nonresonant_size(nf.normal_form()), 0.0);
    let back = expand_star_powers(&nf.star, nf.normal_form().basis());
    assert_series_close(&back, &nf.normal_form().resonant_part(), 1e-13);
}

#[test]
fn fig2_quadratic_part_and_eigen_coefficients() {
    let nf = fig2_normal_form();
    let h = &nf.hamiltonian;
    assert!((h.slow_block(1, 1, 0).value_at_base() - c(2.0, 0.0)).norm() < 1e-13);
    assert!(h.slow_block(2, 0, 0).value_at_base().norm() < 1e-13);
    assert!(h.slow_block(0, 2, 0).value_at_base().norm() < 1e-13);
    let e = nf.eigen_coefficients().unwrap();
    assert_eq!(e.b_min, 2.0);
    assert!((e.c1 - 0.5).abs() < 1e-12);
    assert!((e.predict(0.01, 1) - (0.02 + 1e-4 * (0.5 + e.c0))).abs() < 1e-15);
}

#[test]
fn fig2_leading_coefficient_is_b_in_chart() {
    let (f, _) = fig2_setup();
    let nf = fig2_normal_form();
    let chart = DarbouxChart::new(&f);
    let lead = nf.star.get(0, 1).unwrap();
    let classical = &classical_coefficients(nf.normal_form())[1];
    for delta in [[0.01, 0.0], [0.0, -0.02], [0.015, 0.01]] {
        let q = chart.inverse(delta).unwrap();
        let want = f.eval(q);
        assert!((lead.eval(delta).re - want).abs() < 1e-10, "{delta:?}");
        assert!((classical.eval(delta).re - want).abs() < 1e-10);
    }
}

#[test]
fn weyl_symbol_hbar_squared_term() {
    // The ħ² part of π₁⋆π₁ + π₂⋆π₂ on Σ is |∇B|²/(4B²) at q = g⁻¹(z₂).
    let (f, _) = fig2_setup();
    let nf = fig2_normal_form();
    let chart = DarbouxChart::new(&f);
    let jet = nf.hamiltonian.slow_block(0, 0, 2);
    for delta in [[0.0, 0.0], [0.02, 0.0], [0.0, 0.02], [-0.015, 0.01]] {
        let q = chart.inverse(delta).unwrap();
        let g = f.grad(q);
        let b = f.eval(q);
        let want = (g[0] * g[0] + g[1] * g[1]) / (4.0 * b * b);
        assert!((jet.eval(delta).re - want).abs() < 1e-9, "{delta:?}: {} vs {want}", jet.eval(delta));
    }
}

#[test]
fn base_map_round_trip_and_sigma() {
    let (f, a) = fig2_setup();
    let base = BaseMap::new(&f, &a, [0.3, -0.2]).unwrap();
    let z2 = base.basepoint();
    let on_sigma = base
        .forward(&NormalPoint {
            z1: [0.0, 0.0],
            z2: [z2[0] + 0.05, z2[1] - 0.1],
        })
        .unwrap();
    assert!(hamiltonian(&a, &on_sigma) < 1e-24);
    let mut rng = Lcg64::new(5);
    for _ in 0..20 {
        let z = NormalPoint {
            z1: [rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)],
            z2: [z2[0] + rng.uniform(-0.3, 0.3), z2[1] + rng.uniform(-0.3, 0.3)],
        };
        let s = base.forward(&z).unwrap();
        let back = base.inverse(&s).unwrap();
        for k in 0..2 {
            assert!((back.z1[k] - z.z1[k]).abs() < 1e-12);
            assert!((back.z2[k] - z.z2[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn kinetic_jets_match_base_map() {
    let (f, a) = fig2_setup();
    let base = BaseMap::new(&f, &a, [0.3, -0.2]).unwrap();
    let [t1, t2] = base.kinetic_jets(6, 6).unwrap();
    let z2 = base.basepoint();
    let pt = [0.02, -0.01, 0.015, 0.01];
    let s = base
        .forward(&NormalPoint {
            z1: [pt[0], pt[1]],
            z2: [z2[0] + pt[2], z2[1] + pt[3]],
        })
        .unwrap();
    let pot = a.eval(s.q);
    assert!((t1.eval(pt) - (s.p[0] - pot[0])).abs() < 1e-11);
    assert!((t2.eval(pt) - (s.p[1] - pot[1])).abs() < 1e-11);
}

#[test]
fn sampled_fields_have_no_jets() {
    let f = MagneticField::from_fn(|q| 2.0 + q[0] * q[0] + q[1] * q[1], Rect::square(2.0), None).unwrap();
    let a = VectorPotential::build(&f, Gauge::LandauX).unwrap();
    let err = NormalFormResult::compute(&f, &a, [0.0, 0.0], (4, 2)).unwrap_err();
    assert_eq!(err, StarError::JetUnavailable);
}

#[test]
fn order_checks() {
    let nf = fig2_normal_form();
    assert!(matches!(nf.build_transform(9), Err(StarError::OrderTooHigh { .. })));
    assert!(matches!(nf.classical_normal_form(1, 1.0), Err(StarError::OrderTooLow { .. })));
    let (f, a) = fig2_setup();
    assert!(matches!(
        NormalFormResult::compute(&f, &a, [0.0, 0.0], (1, 2)),
        Err(StarError::OrderTooLow { order: 1 })
    ));
}

#[test]
fn off_minimum_basepoint_is_rejected_for_eigenvalues() {
    let (f, a) = fig2_setup();
    let nf = NormalFormResult::compute(&f, &a, [0.4, 0.1], (4, 2)).unwrap();
    assert!(matches!(nf.eigen_coefficients(), Err(StarError::BasepointNotMinimum { .. })));
}

#[test]
fn residual_decay_along_rays() {
    let nf = fig2_normal_form();
    let radii: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
    for order in 2..=4 {
        let t = nf.build_transform(order).unwrap();
        let k = nf.classical_normal_form(order, 1.0).unwrap();
        for angle in [0.3, 1.9, 4.0] {
            let res = ray_residuals(&t, &k, nf.basepoint(), angle, &radii).unwrap();
            let p = decay_exponent(&radii, &res);
            assert!(p >= order as f64 + 0.7, "N={order} angle={angle}: exponent {p}");
        }
    }
}

#[test]
fn truncated_transform_is_symplectic_and_invertible() {
    let nf = fig2_normal_form();
    let t = nf.build_transform(4).unwrap();
    let mut rng = Lcg64::new(9);
    for _ in 0..10 {
        let z = NormalPoint {
            z1: [rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)],
            z2: [rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)],
        };
        assert!(symplecticity_defect(&t, &z, 1e-5).unwrap() < 1e-6);
        let back = t.inverse(&t.forward(&z).unwrap()).unwrap();
        for k in 0..2 {
            assert!((back.z1[k] - z.z1[k]).abs() < 1e-10);
            assert!((back.z2[k] - z.z2[k]).abs() < 1e-10);
        }
    }
}

#[test]
fn report_serializes_with_stable_keys() {
    let nf = fig2_normal_form();
    let r = nf.report();
    assert_eq!(r.field, "fig2");
    assert!(r.kappa.contains_key(&Monomial::new(2, 2, 0, [0, 0]).to_string()));
    assert!(r.generators.contains_key("tau3"));
    assert!(r.eig_coeffs.is_some());
}

#[test]
fn polynomial_field_away_from_origin() {
    // A tilted well: the pipeline must find the minimum and stay resonant.
    let b = Poly2::from_terms(&[(0, 0, 3.0), (1, 0, 0.4), (2, 0, 1.0), (1, 1, 0.2), (0, 2, 0.5)]);
    let f = MagneticField::polynomial(b, None).unwrap().with_domain(Rect::square(2.0)).unwrap();
    let a = VectorPotential::build(&f, Gauge::LandauX).unwrap();
    let nf = NormalFormResult::at_default_basepoint(&f, &a, (6, 4)).unwrap();
    assert_eq!(nonresonant_size(nf.normal_form()), 0.0);
    let e = nf.eigen_coefficients().unwrap();
    let min = f.minimum().unwrap();
    assert!((e.b_min - min.value).abs() < 1e-12);
    let det: f64 = 2.0 * 1.0 - 0.2 * 0.2;
    assert!((e.c1 - det.sqrt() / (2.0 * min.value)).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_with_action_is_diagonal(alpha in 0usize..5, beta in 0usize..5, hbar in 0usize..2, g1 in 0usize..3, g2 in 0usize..3) {
        let basis = Basis::new(8, 4);
        let m = Monomial::new(alpha, beta, hbar, [g1, g2]);
        let s = FormalSeries::monomial(&basis, m, c(1.0, 0.0));
        let out = FormalSeries::action(&basis).ad(&s);
        let expect = FormalSeries::monomial(&basis, m, c(0.0, 2.0 * (beta as f64 - alpha as f64)));
        prop_assert_eq!(out, expect);
    }

    #[test]
    fn star_reorder_round_trip(seed in 0u64..1000) {
        let basis = Basis::new(8, 2);
        let s = random_series(&basis, seed, 0.5, |m| m.is_resonant() && m.fast_degree() >= 2);
        let star = reorder_star_powers(&s).unwrap();
        assert_series_close(&expand_star_powers(&star, &basis), &s, 1e-12);
    }

    #[test]
    fn slow_jet_inverse(seed in 0u64..1000) {
        let basis = Basis::new(2, 5);
        let mut rng = Lcg64::new(seed);
        let mut s = FormalSeries::zero(&basis);
        s.add_term(Monomial::new(0, 0, 0, [0, 0]), c(1.0 + rng.next_f64(), 0.0));
        for g in [[1, 0], [0, 1], [2, 0], [1, 1], [0, 3]] {
            s.add_term(Monomial::new(0, 0, 0, g), c(rng.uniform(-1.0, 1.0), 0.0));
        }
        let j = s.slow_block(0, 0, 0);
        let prod = j.mul(&j.inverse().unwrap());
        prop_assert!((prod.value_at_base() - c(1.0, 0.0)).norm() < 1e-14);
        prop_assert!(prod.coeffs()[1..].iter().all(|v| v.norm() < 1e-12));
    }
}
