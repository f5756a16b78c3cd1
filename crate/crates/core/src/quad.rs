//! Quadrature rules: adaptive Gauss–Kronrod (7/15) and fixed Gauss–Legendre.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linear::Linear;

// Kronrod abscissae on [-1, 1], positive half; odd indices are the Gauss points.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub max_evaluations: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: 1e-12,
            max_evaluations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

/// Nodes of the 15-point Kronrod rule on `[a, b]` as `(x, kronrod weight, gauss weight)`;
/// the Gauss weight is zero off the embedded 7-point rule.
pub fn kronrod_nodes(a: f64, b: f64) -> Vec<(f64, f64, f64)> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = Vec::with_capacity(15);
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        nodes.push((centre - half * XGK[j], half * WGK[j], half * wg));
        nodes.push((centre + half * XGK[j], half * WGK[j], half * wg));
    }
    nodes.push((centre, half * WGK[7], half * WG[3]));
    nodes.sort_by(|p, q| p.0.total_cmp(&q.0));
    nodes
}

/// One 15-point Kronrod panel with the QUADPACK error estimate: the Kronrod–Gauss
/// difference rescaled by the panel's variation, floored at the rounding level.
fn gk15<T: Linear>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut values = [(T::zero(), T::zero()); 7];
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = WGK[7] * fc.size();
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(center - dx), f(center + dx));
        values[j] = (lo, hi);
        kronrod = kronrod + (lo + hi) * WGK[j];
        resabs += WGK[j] * (lo.size() + hi.size());
        if j % 2 == 1 {
            gauss = gauss + (lo + hi) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).size();
    for j in 0..7 {
        resasc += WGK[j] * ((values[j].0 - mean).size() + (values[j].1 - mean).size());
    }
    let scale = half.abs();
    let (resabs, resasc) = (resabs * scale, resasc * scale);
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    let mut err = (kronrod - gauss).size();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (kronrod, err)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection: always split the panel with the largest error
/// estimate until the summed estimate meets `abs_tol`.
pub fn integrate_adaptive<T: Linear>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<Integral<T>> {
    let (value, error) = gk15(&f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total_error = error;

    while total_error > opts.abs_tol {
        if evaluations + 30 > opts.max_evaluations {
            return Err(Error::QuadratureFailure {
                evaluations,
                error_estimate: total_error,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure {
                evaluations,
                error_estimate: total_error,
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total_error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        // Re-sum occasionally so cancellation in the running total cannot stall the loop.
        if evaluations % 3000 == 15 {
            total_error = heap.iter().map(|p| p.error).sum();
        }
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
    Ok(Integral {
        value,
        error: total_error,
        evaluations,
    })
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `order` nodes each.
pub fn composite_legendre<T: Linear>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    order: usize,
    panels: usize,
) -> T {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut sum = T::zero();
    for k in 0..panels {
        let lo = a + width * k as f64;
        let c = lo + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            sum = sum + f(c + 0.5 * width * xi) * (wi * 0.5 * width);
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in 1..40 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n = {n}");
            assert!(x.windows(2).all(|p| p[0] > p[1]));
        }
    }

    #[test]
    fn legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(5);
        // Exact through degree 9: ∫ x^8 = 2/9.
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        // ∫₀¹ 1/((x − 0.3)² + 1e-4) dx = 100·(atan(70) + atan(30))
        let f = |x: f64| 1.0 / ((x - 0.3).powi(2) + 1e-4);
        let opts = AdaptiveOptions {
            abs_tol: 1e-10,
            ..AdaptiveOptions::default()
        };
        let r = integrate_adaptive(f, 0.0, 1.0, &opts).unwrap();
        let exact = 100.0 * (70f64.atan() + 30f64.atan());
        assert!((r.value - exact).abs() < 1e-9);
    }

    #[test]
    fn kronrod_nodes_integrate_polynomials() {
        let nodes = kronrod_nodes(1.0, 3.0);
        let k: f64 = nodes.iter().map(|&(x, w, _)| w * x.powi(20)).sum();
        let g: f64 = nodes.iter().map(|&(x, _, w)| w * x.powi(12)).sum();
        assert!((k / ((3f64.powi(21) - 1.0) / 21.0) - 1.0).abs() < 1e-13);
        assert!((g / ((3f64.powi(13) - 1.0) / 13.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_complex_values() {
        let f = |x: f64| Complex64::new(x.cos(), x.sin());
        let r = integrate_adaptive(f, 0.0, 1.0, &AdaptiveOptions::default()).unwrap();
        let exact = Complex64::new(1f64.sin(), 1.0 - 1f64.cos());
        assert!((r.value - exact).norm() < 1e-14);
    }

    #[test]
    fn adaptive_reports_cap() {
        let f = |x: f64| if x < 1.0 / 3.0 { 0.0 } else { 1.0 };
        let opts = AdaptiveOptions {
            abs_tol: 1e-300,
            max_evaluations: 200,
        };
        assert!(matches!(
            integrate_adaptive(f, 0.0, 1.0, &opts),
            Err(Error::QuadratureFailure { .. })
        ));
    }
}
