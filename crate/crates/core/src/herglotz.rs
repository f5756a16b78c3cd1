//! Matrix Herglotz functions and their Krein functions.
//!
//! `ξ(t)` is the boundary value of `Im log M(t + iy)/π` as `y → 0+`. We sample
//! along a geometric schedule `y_k = y₀·2^{−k}` and extrapolate polynomially,
//! which is accurate wherever `log M` continues analytically across the axis
//! (gap interiors and the interior of `E` for the constructed profiles).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extrap::{self, Limit};
use crate::finitegap::{self, GapAngle, KreinProfile, PotentialSample};
use crate::linear::Linear;
use crate::mat2::{self, ComplexMat2};
use crate::quad::{self, AdaptiveOptions};

/// Boundary-limit schedule: `y_k = y0·2^{−k}` for `k = 0..=halvings`, extrapolated
/// with polynomials of degree `order` over sliding windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSchedule {
    pub y0: f64,
    pub halvings: usize,
    pub order: usize,
    /// Largest accepted gap between the last two windowed extrapolants.
    pub tol: f64,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        LimitSchedule {
            y0: 1e-2,
            halvings: 8,
            order: 3,
            tol: 1e-6,
        }
    }
}

/// Where an M function came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MSource {
    /// Built from a Krein profile.
    Constructed,
    /// Computed from a potential by solving the Dirac system.
    OdeOracle,
    /// Assembled from a pair of Weyl functions.
    Assembled,
}

type Evaluator = dyn Fn(Complex64) -> Result<ComplexMat2> + Send + Sync;

/// A matrix Herglotz function `z ↦ M(z)` on the upper half-plane.
#[derive(Clone)]
pub struct MFunction {
    eval: Arc<Evaluator>,
    source: MSource,
    singularities: Vec<(f64, f64)>,
}

impl fmt::Debug for MFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MFunction")
            .field("source", &self.source)
            .field("singularities", &self.singularities)
            .finish_non_exhaustive()
    }
}

/// Defects of the Siegel-half-space properties at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MInvariants {
    pub herglotz: bool,
    /// `|det M + 1|`
    pub det_defect: f64,
    /// `‖M − Mᵗ‖`
    pub symmetry_defect: f64,
}

impl MInvariants {
    pub fn holds(&self, tol: f64) -> bool {
        self.herglotz && self.det_defect <= tol && self.symmetry_defect <= tol
    }
}

impl MFunction {
    /// `singularities` lists real points (with exclusion radii) where boundary
    /// values must not be taken.
    pub fn new(
        source: MSource,
        singularities: Vec<(f64, f64)>,
        eval: impl Fn(Complex64) -> Result<ComplexMat2> + Send + Sync + 'static,
    ) -> Self {
        MFunction {
            eval: Arc::new(eval),
            source,
            singularities,
        }
    }

    /// `M ≡ iI`, the free operator.
    pub fn free() -> Self {
        Self::new(MSource::Constructed, Vec::new(), |_| {
            Ok(ComplexMat2::scalar(Complex64::new(0.0, 1.0)))
        })
    }

    pub fn from_profile(profile: KreinProfile) -> Self {
        let singularities = profile.gapset().singularities(profile.endpoint_margin());
        Self::new(MSource::Constructed, singularities, move |z| {
            finitegap::build_m(&profile, z)
        })
    }

    pub fn eval(&self, z: Complex64) -> Result<ComplexMat2> {
        (self.eval)(z)
    }

    pub fn source(&self) -> MSource {
        self.source
    }

    pub fn singularities(&self) -> &[(f64, f64)] {
        &self.singularities
    }

    /// Largest modulus of a declared singular point.
    pub fn radius(&self) -> f64 {
        self.singularities.iter().map(|s| s.0.abs()).fold(0.0, f64::max)
    }

    pub fn invariants_at(&self, z: Complex64) -> Result<MInvariants> {
        let m = self.eval(z)?;
        Ok(MInvariants {
            herglotz: mat2::herglotz_positive(&m),
            det_defect: (m.det() + 1.0).norm(),
            symmetry_defect: (m - m.transpose()).norm(),
        })
    }

    fn check_clear(&self, t: f64) -> Result<f64> {
        let mut nearest = f64::INFINITY;
        for &(s, r) in &self.singularities {
            let d = (t - s).abs();
            if d < r {
                return Err(Error::EndpointSingularity {
                    point: t.into(),
                    endpoint: s,
                });
            }
            nearest = nearest.min(d);
        }
        Ok(nearest)
    }
}

/// Extrapolated `lim_{y→0+} extract(M(t + iy))`.
///
/// The starting height is capped at a quarter of the distance to the nearest
/// declared singularity so the samples stay inside the disc of analyticity.
pub fn boundary_limit<T: Linear>(
    m: &MFunction,
    t: f64,
    schedule: &LimitSchedule,
    extract: impl Fn(ComplexMat2) -> Result<T>,
) -> Result<Limit<T>> {
    let nearest = m.check_clear(t)?;
    let y0 = schedule.y0.min(0.25 * nearest);
    let heights: Vec<f64> = (0..=schedule.halvings)
        .map(|k| y0 / 2f64.powi(k as i32))
        .collect();
    let values = heights
        .iter()
        .map(|&y| m.eval(Complex64::new(t, y)).and_then(&extract))
        .collect::<Result<Vec<T>>>()?;
    let limit = extrap::windowed_limit(&heights, &values, schedule.order);
    if !(limit.residual <= schedule.tol) {
        return Err(Error::NoConvergence {
            what: "boundary limit",
            residual: limit.residual,
            tolerance: schedule.tol,
        });
    }
    Ok(limit)
}

/// One boundary value of the Krein function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KreinSample {
    pub t: f64,
    pub xi: ComplexMat2,
    /// Gap between the last two extrapolants.
    pub residual: f64,
}

impl KreinSample {
    /// `(|tr ξ − 1|, ‖ξ − ξᵗ‖, min eigenvalue, max eigenvalue)`
    pub fn defects(&self) -> (f64, f64, f64, f64) {
        let [e1, e2] = self.xi.eigenvalues();
        (
            (self.xi.trace().re - 1.0).abs(),
            (self.xi - self.xi.transpose()).norm(),
            e1.re.min(e2.re),
            e1.re.max(e2.re),
        )
    }
}

/// `ξ(t) = (1/π) lim_{y→0+} Im log M(t + iy)`.
pub fn krein_xi(m: &MFunction, t: f64, schedule: &LimitSchedule) -> Result<KreinSample> {
    let limit = boundary_limit(m, t, schedule, |mz| {
        Ok(mat2::mlog_spectral(&mz)?.im() * (1.0 / PI))
    })?;
    Ok(KreinSample {
        t,
        xi: limit.value,
        residual: limit.residual,
    })
}

const CAUCHY_TOL: f64 = 1e-12;

/// `∫_a^b (P(α(t)) − I/2)/(t − z) dt` for a sampled angle, with the value at
/// `Re z` subtracted so the remaining integrand stays bounded near the axis.
fn sampled_cauchy(
    profile: &KreinProfile,
    gap: usize,
    a: f64,
    b: f64,
    z: Complex64,
) -> Result<ComplexMat2> {
    let GapAngle::Sampled(samples) = &profile.angles()[gap] else {
        unreachable!("called on a sampled gap")
    };
    let half = ComplexMat2::scalar(Complex64::new(0.5, 0.0));
    let density = |t: f64| finitegap::projection(samples.at(t)) - half;
    let anchor = z.re.clamp(a, b);
    let pinned = density(anchor);
    let mut cuts: Vec<f64> = samples
        .nodes()
        .iter()
        .copied()
        .chain([anchor])
        .filter(|&t| a < t && t < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.insert(0, a);
    cuts.push(b);
    let opts = AdaptiveOptions {
        abs_tol: CAUCHY_TOL / cuts.len() as f64,
        ..AdaptiveOptions::default()
    };
    let mut total = pinned * ((b - z) / (a - z)).ln();
    for seg in cuts.windows(2) {
        let part = quad::integrate_adaptive(
            |t| (density(t) - pinned) * (Complex64::new(t, 0.0) - z).inv(),
            seg[0],
            seg[1],
            &opts,
        )?;
        total = total + part.value;
    }
    Ok(total)
}

/// `log M(z) = A₀ + iπ/2·I + Σ_j ∫_{a_j}^{b_j} (ξ(t) − I/2)/(t − z) dt`.
///
/// This is the exponential representation normalized at infinity: the `I/2`
/// part of `ξ` integrates to `iπ/2·I`, there is no linear term, and `A₀` is the
/// real constant left after that normalization (zero for `M(∞) = iI`).
pub fn rep_log_m(profile: &KreinProfile, a0: &ComplexMat2, z: Complex64) -> Result<ComplexMat2> {
    if !(z.im > 0.0) {
        return Err(Error::NotUpperHalfPlane { z });
    }
    if a0.entries().iter().any(|e| e.im != 0.0) || a0.m12 != a0.m21 {
        return Err(Error::NotAdmissible("A0 must be real symmetric".into()));
    }
    let half = ComplexMat2::scalar(Complex64::new(0.5, 0.0));
    let mut log_m = *a0 + ComplexMat2::scalar(Complex64::new(0.0, FRAC_PI_2));
    for (j, (&(a, b), angle)) in profile.gapset().gaps().iter().zip(profile.angles()).enumerate() {
        let term = match angle {
            GapAngle::Constant(alpha) => {
                (finitegap::projection(*alpha) - half) * ((b - z) / (a - z)).ln()
            }
            GapAngle::Sampled(_) => sampled_cauchy(profile, j, a, b, z)?,
        };
        log_m = log_m + term;
    }
    Ok(log_m)
}

/// A potential value recovered from large-`z` asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extraction {
    pub sample: PotentialSample,
    /// Richardson residual plus the size of the discarded imaginary part.
    pub residual: f64,
}

/// Tolerance on the extrapolated trace of `W`.
pub const TRACELESS_TOL: f64 = 1e-6;

/// Largest accepted extraction residual, relative to `1 + ‖W‖`.
pub const EXTRACTION_TOL: f64 = 1e-5;

/// `{8, 16, 32, 64, 128}·max(1, radius)`.
pub fn default_y_grid(radius: f64) -> Vec<f64> {
    let scale = radius.max(1.0);
    [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|y| y * scale).collect()
}

fn check_y_grid(y_grid: &[f64], radius: f64) -> Result<()> {
    if y_grid.len() < 2 {
        return Err(Error::InvalidGrid("Y-grid needs at least two heights".into()));
    }
    if !y_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidGrid("Y-grid must increase".into()));
    }
    if !(y_grid[0] >= 4.0 * radius) || !(y_grid[0] > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "smallest height {} is below four times the spectral radius {radius}",
            y_grid[0]
        )));
    }
    Ok(())
}

/// Richardson extrapolation in `h = 1/Y` of matrix estimates of `W`.
fn extrapolate_potential(y_grid: &[f64], estimates: &[ComplexMat2]) -> Result<Extraction> {
    let h: Vec<f64> = y_grid.iter().map(|y| 1.0 / y).collect();
    let limit = extrap::richardson_limit(&h, estimates);
    let w = limit.value;
    let trace = w.trace().norm();
    if trace > TRACELESS_TOL {
        return Err(Error::NotTraceless { trace });
    }
    let p = 0.5 * (w.m11.re - w.m22.re);
    let q = 0.5 * (w.m12.re + w.m21.re);
    let residual = limit.residual + w.im().max_abs();
    let scale = 1.0 + mat2::op_norm_sym(p, q);
    if !(residual <= EXTRACTION_TOL * scale) {
        return Err(Error::NoConvergence {
            what: "large-z potential extraction",
            residual,
            tolerance: EXTRACTION_TOL * scale,
        });
    }
    Ok(Extraction {
        sample: PotentialSample { x: 0.0, p, q },
        residual,
    })
}

/// `W(0) = lim z(I − M(z)/i)` along `z = iY`, from `M(z) = i(I − W(0)/z + O(z⁻²))`.
pub fn asymptotic_w(m: &MFunction, y_grid: &[f64]) -> Result<Extraction> {
    check_y_grid(y_grid, m.radius())?;
    let minus_i = Complex64::new(0.0, -1.0);
    let estimates = y_grid
        .iter()
        .map(|&y| {
            let z = Complex64::new(0.0, y);
            let mz = m.eval(z)?;
            Ok((ComplexMat2::IDENTITY - mz * minus_i) * z)
        })
        .collect::<Result<Vec<_>>>()?;
    extrapolate_potential(y_grid, &estimates)
}

/// `W(0) = lim z(iπ/2·I − log M(z))` along `z = iY`, from `log M(z) = iπ/2 − W(0)/z + O(z⁻²)`.
pub fn asymptotic_w_from_log(m: &MFunction, y_grid: &[f64]) -> Result<Extraction> {
    check_y_grid(y_grid, m.radius())?;
    let centre = ComplexMat2::scalar(Complex64::new(0.0, FRAC_PI_2));
    let estimates = y_grid
        .iter()
        .map(|&y| {
            let z = Complex64::new(0.0, y);
            let log_m = mat2::mlog_spectral(&m.eval(z)?)?;
            Ok((centre - log_m) * z)
        })
        .collect::<Result<Vec<_>>>()?;
    extrapolate_potential(y_grid, &estimates)
}
