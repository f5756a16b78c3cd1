#![allow(dead_code)]

use krein::finitegap::{GapSet, KreinProfile};
use krein::ComplexMat2;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn dist(a: &ComplexMat2, b: &ComplexMat2) -> f64 {
    (*a - *b).norm()
}

/// `n` gaps inside `[-span, span]`, neighbouring endpoints at least `min_sep` apart.
pub fn random_gapset(rng: &mut impl Rng, n: usize, span: f64, min_sep: f64) -> GapSet {
    loop {
        let mut pts: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-span..span)).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[1] - w[0] >= min_sep) {
            return GapSet::new(pts.chunks(2).map(|p| (p[0], p[1])).collect()).unwrap();
        }
    }
}

/// One to three gaps with independent random angles.
pub fn random_profile(rng: &mut impl Rng) -> KreinProfile {
    let n = rng.gen_range(1..=3);
    let gaps = random_gapset(rng, n, 3.0, 0.1);
    let angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..PI)).collect();
    KreinProfile::piecewise(gaps, &angles).unwrap()
}

pub fn random_uniform_profile(rng: &mut impl Rng) -> KreinProfile {
    let n = rng.gen_range(1..=3);
    let gaps = random_gapset(rng, n, 3.0, 0.1);
    KreinProfile::uniform(gaps, rng.gen_range(0.0..PI)).unwrap()
}

/// A profile whose M is a genuine Herglotz function: uniform half the time, otherwise
/// random angles that pass the positivity probe.
pub fn random_admissible_profile(rng: &mut impl Rng) -> KreinProfile {
    if rng.gen_bool(0.5) {
        return random_uniform_profile(rng);
    }
    loop {
        let profile = random_profile(rng);
        let (margin, _) = krein::finitegap::herglotz_margin(&profile).unwrap();
        if margin >= -krein::finitegap::HERGLOTZ_TOL {
            return profile;
        }
    }
}

/// Two gaps whose angles differ by at least `sep` modulo π.
pub fn random_separated_two_gap(rng: &mut impl Rng, sep: f64) -> KreinProfile {
    let gaps = random_gapset(rng, 2, 3.0, 0.25);
    loop {
        let a1 = rng.gen_range(0.0..PI);
        let a2 = rng.gen_range(0.0..PI);
        let d = (a1 - a2).abs();
        if d.min(PI - d) >= sep {
            return KreinProfile::piecewise(gaps, &[a1, a2]).unwrap();
        }
    }
}

/// A point of the upper half-plane away from the real axis.
pub fn random_upper(rng: &mut impl Rng) -> Complex64 {
    c(rng.gen_range(-5.0..5.0), rng.gen_range(0.05..5.0))
}

/// Complex matrix `V diag(λ₁, λ₂) V⁻¹` with both eigenvalues in the open upper half-plane
/// and a modestly conditioned `V`.
pub fn random_upper_spectrum(rng: &mut impl Rng) -> ComplexMat2 {
    loop {
        let mut entry = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let v = ComplexMat2::new(entry(), entry(), entry(), entry());
        let Some(vi) = v.inverse() else { continue };
        if v.norm() * vi.norm() > 50.0 {
            continue;
        }
        let mut eig = || {
            let r = rng.gen_range(0.05..5.0);
            let theta = rng.gen_range(0.02..PI - 0.02);
            Complex64::from_polar(r, theta)
        };
        return v * ComplexMat2::diag(eig(), eig()) * vi;
    }
}

/// Convex combination of `k` random rank-one projections.
pub fn random_hull_point(rng: &mut impl Rng) -> ComplexMat2 {
    let k = rng.gen_range(1..=4);
    let mut weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
        .iter()
        .fold(ComplexMat2::ZERO, |acc, &w| acc + krein::finitegap::projection(rng.gen_range(0.0..PI)) * w)
}

/// Points of `[lo, hi]` on an even grid, endpoints excluded.
pub fn interior_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64).collect()
}

/// Interior-of-E sample points: between gaps and out to `±(radius + 2)`.
pub fn spectral_grid(gaps: &GapSet, per_band: usize) -> Vec<f64> {
    let mut edges = vec![-gaps.radius() - 2.0];
    for &(a, b) in gaps.gaps() {
        edges.push(a);
        edges.push(b);
    }
    edges.push(gaps.radius() + 2.0);
    edges
        .chunks(2)
        .flat_map(|band| {
            let pad = 0.05 * (band[1] - band[0]).min(1.0);
            interior_grid(band[0] + pad, band[1] - pad, per_band)
        })
        .collect()
}
