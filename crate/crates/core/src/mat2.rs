//! Fixed-shape 2×2 complex matrices.
//!
//! Everything downstream (M functions, their logarithms, Krein densities and
//! potentials) is a 2×2 matrix, so the kernel here is written out by hand:
//! closed-form eigenvalues, and matrix functions evaluated by interpolating
//! the scalar function on the spectrum. The logarithm uses the branch with
//! cut along the closed negative imaginary axis, `arg ∈ (-π/2, 3π/2)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linear::Linear;
use crate::quad::{self, AdaptiveOptions};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative eigenvalue separation below which a matrix is treated as a Jordan block.
pub const JORDAN_TOL: f64 = 1e-9;

/// Relative distance to the excluded ray below which a logarithm is refused.
pub const CUT_TOL: f64 = 1e-13;

/// Absolute quadrature target for the integral logarithm.
pub const LOG_INTEGRAL_TOL: f64 = 1e-12;

/// Evaluation cap for the integral logarithm.
pub const LOG_INTEGRAL_MAX_EVALS: usize = 1_000_000;

#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

/// The symplectic unit `[[0, -1], [1, 0]]` of the Dirac system.
pub const J: ComplexMat2 = ComplexMat2 {
    m11: ZERO,
    m12: Complex64::new(-1.0, 0.0),
    m21: ONE,
    m22: ZERO,
};

impl ComplexMat2 {
    pub const IDENTITY: ComplexMat2 = ComplexMat2 {
        m11: ONE,
        m12: ZERO,
        m21: ZERO,
        m22: ONE,
    };

    pub const ZERO: ComplexMat2 = ComplexMat2 {
        m11: ZERO,
        m12: ZERO,
        m21: ZERO,
        m22: ZERO,
    };

    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        let m = ComplexMat2 { m11, m12, m21, m22 };
        debug_assert!(m.is_finite(), "non-finite matrix entry: {m:?}");
        m
    }

    /// Checked constructor: rejects NaN and infinite entries.
    pub fn try_new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Result<Self> {
        let m = ComplexMat2 { m11, m12, m21, m22 };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self::new(m11.into(), m12.into(), m21.into(), m22.into())
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub fn scalar(s: Complex64) -> Self {
        Self::diag(s, s)
    }

    /// `[[p, q], [q, -p]]`, the trace-free symmetric form of a potential.
    pub fn potential(p: f64, q: f64) -> Self {
        Self::real(p, q, q, -p)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        ComplexMat2 {
            m11: f(self.m11),
            m12: f(self.m12),
            m21: f(self.m21),
            m22: f(self.m22),
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn transpose(&self) -> Self {
        ComplexMat2 {
            m11: self.m11,
            m12: self.m21,
            m21: self.m12,
            m22: self.m22,
        }
    }

    pub fn adjoint(&self) -> Self {
        self.transpose().map(|z| z.conj())
    }

    /// Entrywise real part.
    pub fn re(&self) -> Self {
        self.map(|z| z.re.into())
    }

    /// Entrywise imaginary part. Coincides with `(A - A*)/(2i)` for symmetric `A`.
    pub fn im(&self) -> Self {
        self.map(|z| z.im.into())
    }

    /// Hermitian imaginary part `(A - A*)/(2i)`.
    pub fn im_hermitian(&self) -> Self {
        (*self - self.adjoint()) * (Complex64::new(0.0, -0.5))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral (operator 2-) norm.
    /// Largest eigenvalue of `A*A` from its entries directly, so nearly equal
    /// singular values do not cancel.
    pub fn norm(&self) -> f64 {
        let h11 = self.m11.norm_sqr() + self.m21.norm_sqr();
        let h22 = self.m12.norm_sqr() + self.m22.norm_sqr();
        let h12 = self.m11.conj() * self.m12 + self.m21.conj() * self.m22;
        let spread = (0.5 * (h11 - h22)).hypot(h12.norm());
        (0.5 * (h11 + h22) + spread).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == ZERO || !det.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(ComplexMat2 {
            m11: self.m22 * inv,
            m12: -self.m12 * inv,
            m21: -self.m21 * inv,
            m22: self.m11 * inv,
        })
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (*self - self.transpose()).norm() <= tol * self.norm()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    /// Both eigenvalues, ordered by the sign choice of the discriminant root.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let split = SpectralSplit::of(self);
        [split.mean + split.delta, split.mean - split.delta]
    }
}

impl fmt::Debug for ComplexMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m11, self.m12, self.m21, self.m22
        )
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        ComplexMat2 {
            m11: self.m11 + o.m11,
            m12: self.m12 + o.m12,
            m21: self.m21 + o.m21,
            m22: self.m22 + o.m22,
        }
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        ComplexMat2 {
            m11: self.m11 - o.m11,
            m12: self.m12 - o.m12,
            m21: self.m21 - o.m21,
            m22: self.m22 - o.m22,
        }
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        ComplexMat2 {
            m11: self.m11 * o.m11 + self.m12 * o.m21,
            m12: self.m11 * o.m12 + self.m12 * o.m22,
            m21: self.m21 * o.m11 + self.m22 * o.m21,
            m22: self.m21 * o.m12 + self.m22 * o.m22,
        }
    }
}

impl Mul<Complex64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|z| z * s)
    }
}

impl Linear for ComplexMat2 {
    fn zero() -> Self {
        ComplexMat2::ZERO
    }
    fn size(&self) -> f64 {
        self.entries().iter().map(Linear::size).fold(0.0, f64::max)
    }
}

/// `A = mean·I + B` with `B² = delta²·I`; the eigenvalues are `mean ± delta`.
#[derive(Debug, Clone, Copy)]
struct SpectralSplit {
    mean: Complex64,
    delta: Complex64,
    shifted: ComplexMat2,
    collided: bool,
}

impl SpectralSplit {
    fn of(a: &ComplexMat2) -> Self {
        let mean = a.trace() * 0.5;
        let half_diff = (a.m11 - a.m22) * 0.5;
        let delta = (half_diff * half_diff + a.m12 * a.m21).sqrt();
        let shifted = *a - ComplexMat2::scalar(mean);
        let collided = (delta * 2.0).norm() <= JORDAN_TOL * a.norm();
        SpectralSplit {
            mean,
            delta,
            shifted,
            collided,
        }
    }
}

/// Eigenstructure of a 2×2 matrix.
#[derive(Debug, Clone, Copy)]
pub enum EigenDecomp2 {
    /// `A = V·diag(values)·V⁻¹`, with unit eigenvectors as the columns of `V`.
    Diagonalizable {
        values: [Complex64; 2],
        vectors: [[Complex64; 2]; 2],
    },
    /// `A = value·I + nilpotent` with `nilpotent² = 0` and `nilpotent ≠ 0`.
    Jordan {
        value: Complex64,
        nilpotent: ComplexMat2,
    },
}

impl EigenDecomp2 {
    pub fn values(&self) -> [Complex64; 2] {
        match *self {
            EigenDecomp2::Diagonalizable { values, .. } => values,
            EigenDecomp2::Jordan { value, .. } => [value, value],
        }
    }

    /// Rebuilds the matrix from its decomposition.
    pub fn reconstruct(&self) -> ComplexMat2 {
        match *self {
            EigenDecomp2::Diagonalizable { values, vectors } => {
                let v = ComplexMat2::new(vectors[0][0], vectors[1][0], vectors[0][1], vectors[1][1]);
                let v_inv = v.inverse().expect("eigenvector basis is singular");
                v * ComplexMat2::diag(values[0], values[1]) * v_inv
            }
            EigenDecomp2::Jordan { value, nilpotent } => ComplexMat2::scalar(value) + nilpotent,
        }
    }
}

fn normalized(v: [Complex64; 2]) -> [Complex64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

fn eigenvector(a: &ComplexMat2, lambda: Complex64) -> [Complex64; 2] {
    let from_row1 = [a.m12, lambda - a.m11];
    let from_row2 = [lambda - a.m22, a.m21];
    let n1 = from_row1[0].norm() + from_row1[1].norm();
    let n2 = from_row2[0].norm() + from_row2[1].norm();
    let floor = f64::EPSILON * a.norm();
    if n1.max(n2) <= floor {
        // Diagonal with a repeated value; caller handles the scalar case separately.
        if (lambda - a.m11).norm() <= (lambda - a.m22).norm() {
            [ONE, ZERO]
        } else {
            [ZERO, ONE]
        }
    } else if n1 >= n2 {
        normalized(from_row1)
    } else {
        normalized(from_row2)
    }
}

/// Closed-form eigen-decomposition, switching to a Jordan marker when the
/// eigenvalues coincide within `JORDAN_TOL·‖A‖` and `A` is not scalar.
pub fn eig2(a: &ComplexMat2) -> EigenDecomp2 {
    let split = SpectralSplit::of(a);
    if split.collided {
        if split.shifted.norm() > JORDAN_TOL * a.norm() {
            return EigenDecomp2::Jordan {
                value: split.mean,
                nilpotent: split.shifted,
            };
        }
        return EigenDecomp2::Diagonalizable {
            values: [split.mean, split.mean],
            vectors: [[ONE, ZERO], [ZERO, ONE]],
        };
    }
    let values = [split.mean + split.delta, split.mean - split.delta];
    EigenDecomp2::Diagonalizable {
        values,
        vectors: [eigenvector(a, values[0]), eigenvector(a, values[1])],
    }
}

/// The scalar logarithm with cut along `{-iy : y ≥ 0}`: `log 1 = 0`, `arg ∈ (-π/2, 3π/2)`.
pub fn log_branch(w: Complex64) -> Result<Complex64> {
    let r = w.norm();
    if r == 0.0 || !r.is_finite() || (w.im < 0.0 && w.re.abs() <= CUT_TOL * r) {
        return Err(Error::SpectrumOnCut { eigenvalue: w });
    }
    let mut arg = w.im.atan2(w.re);
    if arg <= -FRAC_PI_2 {
        arg += 2.0 * PI;
    }
    Ok(Complex64::new(r.ln(), arg))
}

/// `atanh(x)` accurate for small arguments.
fn atanh_small(x: Complex64) -> Complex64 {
    if x.norm() < 0.1 {
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        for k in 1..12 {
            term *= x2;
            sum += term / (2 * k + 1) as f64;
        }
        sum
    } else {
        x.atanh()
    }
}

fn sinhc(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        ONE + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// Matrix exponential `e^A`; `e^λ(I + N)` in the Jordan case.
pub fn mexp(a: &ComplexMat2) -> ComplexMat2 {
    let split = SpectralSplit::of(a);
    let scale = split.mean.exp();
    if split.collided {
        return (ComplexMat2::IDENTITY + split.shifted) * scale;
    }
    ComplexMat2::scalar(scale * split.delta.cosh()) + split.shifted * (scale * sinhc(split.delta))
}

/// Primary matrix logarithm on the branch of [`log_branch`].
///
/// Returns the unique `B` with `e^B = A` whose spectrum lies in the strip
/// `-π/2 < Im < 3π/2`; `log λ·I + N/λ` in the Jordan case.
pub fn mlog_spectral(a: &ComplexMat2) -> Result<ComplexMat2> {
    let split = SpectralSplit::of(a);
    if split.collided {
        let log_mean = log_branch(split.mean)?;
        return Ok(ComplexMat2::scalar(log_mean) + split.shifted * split.mean.inv());
    }
    let l1 = split.mean + split.delta;
    let l2 = split.mean - split.delta;
    let f1 = log_branch(l1)?;
    let f2 = log_branch(l2)?;
    // (f1 - f2)/(l1 - l2), with the difference of logs rebuilt from atanh when l1 ≈ l2.
    let divided = if split.delta.norm() < 0.5 * split.mean.norm() {
        let principal = atanh_small(split.delta / split.mean) * 2.0;
        let winding = ((f1 - f2 - principal).im / (2.0 * PI)).round();
        (principal + Complex64::new(0.0, 2.0 * PI * winding)) / (split.delta * 2.0)
    } else {
        (f1 - f2) / (split.delta * 2.0)
    };
    Ok(ComplexMat2::scalar((f1 + f2) * 0.5) + split.shifted * divided)
}

/// Logarithm of a matrix with spectrum in the open upper half-plane by the integral
/// `∫₀^∞ (t/(t²+1) − (t+A)⁻¹) dt`, mapped to `u ∈ [0, 1]` with `t = u/(1−u)`.
///
/// After the substitution the integrand is `(uI + (1−u)A)⁻¹ (uA − (1−u)I) / (u² + (1−u)²)`,
/// which is smooth on the closed interval.
pub fn mlog_integral(a: &ComplexMat2) -> Result<ComplexMat2> {
    for eigenvalue in a.eigenvalues() {
        if eigenvalue.im <= 0.0 {
            return Err(Error::SpectrumNotUpper { eigenvalue });
        }
    }
    let a = *a;
    let integrand = |u: f64| {
        let v = 1.0 - u;
        let resolvent = (ComplexMat2::scalar(u.into()) + a * v)
            .inverse()
            .expect("t + A is invertible for spectrum in the upper half-plane");
        let numerator = a * u - ComplexMat2::scalar(v.into());
        resolvent * numerator * (1.0 / (u * u + v * v))
    };
    let opts = AdaptiveOptions {
        abs_tol: LOG_INTEGRAL_TOL,
        max_evaluations: LOG_INTEGRAL_MAX_EVALS,
    };
    quad::integrate_adaptive(integrand, 0.0, 1.0, &opts).map(|r| r.value)
}

/// True iff `(A − A*)/(2i)` is positive definite.
pub fn herglotz_positive(a: &ComplexMat2) -> bool {
    let im = a.im_hermitian();
    im.trace().re > 0.0 && im.det().re > 0.0
}

/// Operator norm of `[[p, q], [q, -p]]`.
pub fn op_norm_sym(p: f64, q: f64) -> f64 {
    p.hypot(q)
}
