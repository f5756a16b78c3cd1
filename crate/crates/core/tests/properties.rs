mod common;

use common::*;
use krein::dirac::{self, StepPotential};
use krein::finitegap::{self, SpherePoint};
use krein::mat2::{self, ComplexMat2, J};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

fn entry() -> impl Strategy<Value = num_complex::Complex64> {
    (-4.0..4.0f64, -4.0..4.0f64).prop_map(|(re, im)| c(re, im))
}

fn matrix() -> impl Strategy<Value = ComplexMat2> {
    (entry(), entry(), entry(), entry()).prop_map(|(a, b, c, d)| ComplexMat2::new(a, b, c, d))
}

/// Entries of unit size: `det` of the computed exponential loses about `ε·e^{2|δ|}`
/// to cancellation, so the relative identity is only meaningful for moderate spread.
fn unit_matrix() -> impl Strategy<Value = ComplexMat2> {
    matrix().prop_map(|a| a * 0.25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn log_lands_in_the_strip(a in matrix()) {
        if let Ok(l) = mat2::mlog_spectral(&a) {
            for ev in l.eigenvalues() {
                prop_assert!(ev.im > -FRAC_PI_2 && ev.im < 3.0 * FRAC_PI_2);
            }
            prop_assert!((mat2::mexp(&l) - a).norm() <= 1e-10 * a.norm());
        }
    }

    #[test]
    fn det_exp_is_exp_trace(a in unit_matrix()) {
        let lhs = mat2::mexp(&a).det();
        let rhs = a.trace().exp();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn scalar_branch_matches_polar_form(r in 1e-3..1e3f64, theta in -1.5..4.7f64) {
        let w = num_complex::Complex64::from_polar(r, theta);
        let l = mat2::log_branch(w).unwrap();
        prop_assert!((l - c(r.ln(), theta)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn log_of_positive_definite_is_real_symmetric(a in 0.1..5.0f64, b in -2.0..2.0f64, d in 0.1..5.0f64) {
        prop_assume!(a * d - b * b > 1e-3);
        let l = mat2::mlog_spectral(&ComplexMat2::real(a, b, b, d)).unwrap();
        prop_assert!(l.im().max_abs() < 1e-13);
        prop_assert!(l.is_symmetric(1e-13));
    }

    #[test]
    fn integral_log_agrees_with_spectral(seed in any::<u64>()) {
        let a = random_upper_spectrum(&mut ChaCha8Rng::seed_from_u64(seed));
        let s = mat2::mlog_spectral(&a).unwrap();
        let q = mat2::mlog_integral(&a).unwrap();
        prop_assert!((s - q).norm() <= 1e-8 * (1.0 + s.norm()));
    }

    #[test]
    fn constructed_m_is_herglotz_with_det_minus_one(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let profile = random_admissible_profile(&mut r);
        let z = random_upper(&mut r);
        let m = finitegap::build_m(&profile, z).unwrap();
        prop_assert!((m.det() + 1.0).norm() < 1e-10);
        prop_assert!(m.is_symmetric(1e-12));
        prop_assert!(mat2::herglotz_positive(&m));
    }

    #[test]
    fn weyl_roundtrip(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let m = finitegap::build_m(&random_admissible_profile(&mut r), random_upper(&mut r)).unwrap();
        let mut ev = (m * J).eigenvalues();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        prop_assert!((ev[0] + 1.0).norm() < 1e-10 && (ev[1] - 1.0).norm() < 1e-10);
        let pair = finitegap::weyl_from_m(&m).unwrap();
        prop_assert!(pair.m_plus.finite().unwrap().im > 0.0);
        prop_assert!(pair.m_minus.finite().unwrap().im > 0.0);
        prop_assert!(dist(&finitegap::assemble_m(&pair).unwrap(), &m) < 1e-9);
    }

    #[test]
    fn projections_are_projections(alpha in -10.0..10.0f64) {
        let p = finitegap::projection(alpha);
        prop_assert!(dist(&(p * p), &p) < 1e-12);
        prop_assert!(p.is_symmetric(1e-15));
        prop_assert!((p.trace() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn trace_formula_respects_the_bound(seed in any::<u64>()) {
        let profile = random_profile(&mut ChaCha8Rng::seed_from_u64(seed));
        let w = finitegap::trace_formula_w0(&profile);
        prop_assert!(w.norm() <= finitegap::sharp_bound(profile.gapset()) + 1e-12);
    }

    #[test]
    fn transfer_is_unimodular_and_composes(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = r.gen_range(1..5);
        let mut breaks: Vec<f64> = (0..n + 1).map(|_| r.gen_range(-2.0..2.0)).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut pq = || (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let pieces = (1..breaks.len()).map(|_| pq()).collect();
        let w = StepPotential::new(breaks, pieces, [pq(), pq()]).unwrap();
        let z = c(r.gen_range(-3.0..3.0), r.gen_range(-1.0..1.0));
        let (x0, x1, x2) = (r.gen_range(-3.0..-1.0), r.gen_range(-1.0..1.0), r.gen_range(1.0..3.0));
        let a = dirac::transfer(&w, x0, x1, z).unwrap();
        let b = dirac::transfer(&w, x1, x2, z).unwrap();
        let ab = dirac::transfer(&w, x0, x2, z).unwrap();
        // det from the entries cancels to about ε‖T‖²; beyond ‖T‖ ~ 1e3 it measures rounding.
        prop_assume!(ab.value().norm() <= 1e3);
        prop_assert!((ab.det() - 1.0).norm() < 1e-10);
        let scale = 1.0 + ab.value().norm();
        prop_assert!((a.then(&b).value() - ab.value()).norm() <= 1e-12 * scale * scale);
    }

    #[test]
    fn const_weyl_is_herglotz(p in -3.0..3.0f64, q in -3.0..3.0f64, re in -5.0..5.0f64, im in 1e-3..5.0f64) {
        let pair = dirac::const_weyl(p, q, c(re, im)).unwrap();
        prop_assert!(pair.m_plus.finite().unwrap().im > 0.0);
        prop_assert!(pair.m_minus.finite().unwrap().im > 0.0);
    }

    #[test]
    fn hull_points_stay_in_the_ball(seed in any::<u64>()) {
        let q = random_hull_point(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(finitegap::hull_norm(&q).unwrap() <= 0.5 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_orbit_respects_the_bound(seed in any::<u64>()) {
        let profile = random_admissible_profile(&mut ChaCha8Rng::seed_from_u64(seed));
        let xs: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
        let trace = dirac::sample_potential(&profile, &xs).unwrap();
        prop_assert!(trace.check_bound().is_ok());
        let w0 = finitegap::trace_formula_w0(&profile);
        prop_assert!((trace.points[0].p - w0.p).abs() < 1e-10 && (trace.points[0].q - w0.q).abs() < 1e-10);
    }
}

#[test]
fn riccati_agrees_with_mobius_action_on_random_steps() {
    let mut r = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (p, q) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let z = c(r.gen_range(-3.0..3.0), r.gen_range(0.0..3.0));
        let h = r.gen_range(-0.5..0.5);
        let m = c(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let start = SpherePoint::Finite(m);
        let got = dirac::riccati_step(start, p, q, z, h).unwrap();
        let t = if h >= 0.0 {
            dirac::transfer(&StepPotential::constant(p, q), 0.0, h.max(1e-300), z).unwrap().value()
        } else {
            dirac::transfer(&StepPotential::constant(p, q), h, 0.0, z).unwrap().value().inverse().unwrap()
        };
        let y = t.apply(start.homogeneous());
        // Compare on the sphere: chordal distance of the two ratios.
        let [g1, g2] = got.homogeneous();
        let num = (g1 * y[1] - g2 * y[0]).norm();
        let den = (g1.norm_sqr() + g2.norm_sqr()).sqrt() * (y[0].norm_sqr() + y[1].norm_sqr()).sqrt();
        worst = worst.max(num / den);
    }
    assert!(worst <= 1e-8, "worst chordal deviation {worst:e}");
}

#[test]
fn free_profile_orbit_is_zero() {
    let trace = dirac::sample_potential(&krein::KreinProfile::free(), &[0.0, 0.5]).unwrap();
    assert!(trace.points.iter().all(|p| p.p == 0.0 && p.q == 0.0));
    let _ = PI;
}
