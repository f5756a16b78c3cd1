//! Finite-gap sets, Krein profiles and the explicit reflectionless construction.
//!
//! A profile fixes the Krein function: `ξ = I/2` on the spectral set `E` and a
//! rank-one projection `P_α` on each gap. For piecewise-constant profiles the
//! exponential representation integrates in closed form,
//!
//! ```text
//! log M(z) = iπ/2·I + Σ_j log((b_j − z)/(a_j − z)) · (P_{α_j} − I/2),
//! ```
//!
//! and when every gap carries the same angle the resulting `M` is normal and
//! real-valued inside the gaps.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herglotz::{self, LimitSchedule, MFunction};
use crate::mat2::{self, ComplexMat2, J};

/// Default endpoint exclusion, relative to the width of each gap.
pub const ENDPOINT_MARGIN: f64 = 1e-3;

const HALF: Complex64 = Complex64::new(0.5, 0.0);

/// The finite-gap set `E = ℝ ∖ ∪ (a_j, b_j)`, stored as its gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSet {
    gaps: Vec<(f64, f64)>,
}

impl GapSet {
    /// Requires `a₁ < b₁ < a₂ < … < b_n`, all finite. No gaps at all is the free case `E = ℝ`.
    pub fn new(gaps: Vec<(f64, f64)>) -> Result<Self> {
        let mut last = f64::NEG_INFINITY;
        for &(a, b) in &gaps {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidGapSet(format!("non-finite endpoint in ({a}, {b})")));
            }
            if !(last < a && a < b) {
                return Err(Error::InvalidGapSet(format!(
                    "endpoints must be strictly increasing, found ({a}, {b}) after {last}"
                )));
            }
            last = b;
        }
        Ok(GapSet { gaps })
    }

    pub fn free() -> Self {
        GapSet { gaps: Vec::new() }
    }

    pub fn gaps(&self) -> &[(f64, f64)] {
        &self.gaps
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Index of the gap containing `t` in its open interior.
    pub fn locate(&self, t: f64) -> Option<usize> {
        self.gaps.iter().position(|&(a, b)| a < t && t < b)
    }

    /// Largest endpoint modulus, or 0 for the free case.
    pub fn radius(&self) -> f64 {
        self.gaps
            .iter()
            .map(|&(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }

    pub fn total_width(&self) -> f64 {
        self.gaps.iter().fold(0.0, |acc, &(a, b)| acc + (b - a))
    }

    /// Endpoints paired with their absolute exclusion radius.
    pub fn singularities(&self, margin: f64) -> Vec<(f64, f64)> {
        self.gaps
            .iter()
            .flat_map(|&(a, b)| {
                let r = margin * (b - a);
                [(a, r), (b, r)]
            })
            .collect()
    }

    /// Refuses points within `margin·(b_j − a_j)` of an endpoint of gap `j`.
    pub fn check_clear(&self, z: Complex64, margin: f64) -> Result<()> {
        for &(a, b) in &self.gaps {
            let r = margin * (b - a);
            for endpoint in [a, b] {
                if (z - endpoint).norm() < r {
                    return Err(Error::EndpointSingularity { point: z, endpoint });
                }
            }
        }
        Ok(())
    }
}

/// Linearly interpolated angle samples across one gap.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSamples {
    nodes: Vec<f64>,
    angles: Vec<f64>,
}

impl AngleSamples {
    pub fn new(nodes: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if nodes.len() != angles.len() || nodes.len() < 2 {
            return Err(Error::InvalidProfile(
                "angle samples need matching node and value lists of length >= 2".into(),
            ));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidProfile("angle sample nodes must increase".into()));
        }
        if !angles.iter().all(|a| a.is_finite()) {
            return Err(Error::InvalidProfile("non-finite sampled angle".into()));
        }
        Ok(AngleSamples { nodes, angles })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Interpolated angle, held constant outside the sampled range.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.nodes.len();
        if t <= self.nodes[0] {
            return self.angles[0];
        }
        if t >= self.nodes[n - 1] {
            return self.angles[n - 1];
        }
        let k = self.nodes.partition_point(|&x| x <= t) - 1;
        let s = (t - self.nodes[k]) / (self.nodes[k + 1] - self.nodes[k]);
        self.angles[k] + s * (self.angles[k + 1] - self.angles[k])
    }
}

/// Krein function on one gap.
#[derive(Debug, Clone, PartialEq)]
pub enum GapAngle {
    /// `ξ ≡ P_α` across the gap; stored reduced to `[0, π)`.
    Constant(f64),
    Sampled(AngleSamples),
}

/// Piecewise description of a Krein function: `I/2` on `E`, projections on gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinProfile {
    gapset: GapSet,
    angles: Vec<GapAngle>,
    endpoint_margin: f64,
}

pub fn reduce_angle(alpha: f64) -> f64 {
    let r = alpha.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// The rank-one projection onto `(cos α, sin α)`.
pub fn projection(alpha: f64) -> ComplexMat2 {
    let (s, c) = alpha.sin_cos();
    ComplexMat2::real(c * c, s * c, s * c, s * s)
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

impl KreinProfile {
    pub fn new(gapset: GapSet, angles: Vec<GapAngle>) -> Result<Self> {
        if angles.len() != gapset.len() {
            return Err(Error::InvalidProfile(format!(
                "{} gaps but {} angle entries",
                gapset.len(),
                angles.len()
            )));
        }
        let angles = angles
            .into_iter()
            .map(|a| match a {
                GapAngle::Constant(alpha) if !alpha.is_finite() => {
                    Err(Error::InvalidProfile("non-finite angle".into()))
                }
                GapAngle::Constant(alpha) => Ok(GapAngle::Constant(reduce_angle(alpha))),
                s => Ok(s),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KreinProfile {
            gapset,
            angles,
            endpoint_margin: ENDPOINT_MARGIN,
        })
    }

    pub fn piecewise(gapset: GapSet, angles: &[f64]) -> Result<Self> {
        Self::new(gapset, angles.iter().map(|&a| GapAngle::Constant(a)).collect())
    }

    pub fn uniform(gapset: GapSet, alpha: f64) -> Result<Self> {
        let n = gapset.len();
        Self::new(gapset, vec![GapAngle::Constant(alpha); n])
    }

    pub fn free() -> Self {
        KreinProfile {
            gapset: GapSet::free(),
            angles: Vec::new(),
            endpoint_margin: ENDPOINT_MARGIN,
        }
    }

    pub fn with_endpoint_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < 0.5) {
            return Err(Error::InvalidProfile(format!("endpoint margin {margin} outside (0, 0.5)")));
        }
        self.endpoint_margin = margin;
        Ok(self)
    }

    pub fn gapset(&self) -> &GapSet {
        &self.gapset
    }

    pub fn angles(&self) -> &[GapAngle] {
        &self.angles
    }

    pub fn endpoint_margin(&self) -> f64 {
        self.endpoint_margin
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.angles.iter().all(|a| matches!(a, GapAngle::Constant(_)))
    }

    /// The common angle if every gap carries the same constant projection.
    /// The free profile counts as uniform with angle 0.
    pub fn uniform_angle(&self) -> Option<f64> {
        let mut common = None;
        for a in &self.angles {
            match (a, common) {
                (GapAngle::Constant(alpha), None) => common = Some(*alpha),
                (GapAngle::Constant(alpha), Some(c)) if angular_distance(*alpha, c) <= 1e-14 => {}
                _ => return None,
            }
        }
        Some(common.unwrap_or(0.0))
    }

    /// `ξ(t)` as prescribed by the profile.
    pub fn xi(&self, t: f64) -> ComplexMat2 {
        match self.gapset.locate(t) {
            Some(j) => projection(self.angle_at(j, t)),
            None => ComplexMat2::scalar(HALF),
        }
    }

    pub fn angle_at(&self, gap: usize, t: f64) -> f64 {
        match &self.angles[gap] {
            GapAngle::Constant(alpha) => *alpha,
            GapAngle::Sampled(s) => s.at(t),
        }
    }

    pub fn m_function(&self) -> MFunction {
        MFunction::from_profile(self.clone())
    }
}

/// JSON form of a profile: `{"gaps": [[a, b], ...], "angles": [...]}` or `{"gaps": ..., "uniform": α}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub gaps: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<f64>,
}

impl ProfileSpec {
    pub fn to_profile(&self) -> Result<KreinProfile> {
        let gapset = GapSet::new(self.gaps.iter().map(|g| (g[0], g[1])).collect())?;
        match (&self.angles, self.uniform) {
            (Some(angles), None) => KreinProfile::piecewise(gapset, angles),
            (None, Some(alpha)) => KreinProfile::uniform(gapset, alpha),
            (None, None) if gapset.is_empty() => Ok(KreinProfile::free()),
            (None, None) => Err(Error::InvalidProfile("one of `angles` or `uniform` is required".into())),
            (Some(_), Some(_)) => Err(Error::InvalidProfile("`angles` and `uniform` are exclusive".into())),
        }
    }
}

impl TryFrom<&ProfileSpec> for KreinProfile {
    type Error = Error;
    fn try_from(spec: &ProfileSpec) -> Result<Self> {
        spec.to_profile()
    }
}

/// A point of `ℂ ∪ {∞}`, identified with the ratio `y₁/y₂` of a nonzero vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn from_homogeneous(y1: Complex64, y2: Complex64) -> Self {
        if y2.norm() <= 1e-15 * y1.norm() || y2.norm() == 0.0 {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(y1 / y2)
        }
    }

    pub fn homogeneous(&self) -> [Complex64; 2] {
        match *self {
            SpherePoint::Finite(m) => [m, Complex64::new(1.0, 0.0)],
            SpherePoint::Infinity => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            SpherePoint::Finite(m) => Some(m),
            SpherePoint::Infinity => None,
        }
    }

    pub fn neg(&self) -> Self {
        match *self {
            SpherePoint::Finite(m) => SpherePoint::Finite(-m),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }
}

/// The half-line Weyl functions `(m₊, m₋)` evaluated at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylPair {
    pub m_plus: SpherePoint,
    pub m_minus: SpherePoint,
}

impl WeylPair {
    pub fn finite(m_plus: Complex64, m_minus: Complex64) -> Self {
        WeylPair {
            m_plus: SpherePoint::Finite(m_plus),
            m_minus: SpherePoint::Finite(m_minus),
        }
    }
}

/// `W(x) = [[p, q], [q, −p]]` at one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub x: f64,
    pub p: f64,
    pub q: f64,
}

impl PotentialSample {
    pub fn norm(&self) -> f64 {
        mat2::op_norm_sym(self.p, self.q)
    }

    pub fn matrix(&self) -> ComplexMat2 {
        ComplexMat2::potential(self.p, self.q)
    }
}

/// Scalar `log((b − z)/(a − z))`: principal on `ℂ⁺`, and the boundary value from
/// above on the real axis (`ln|·| + iπ` inside the gap, real outside).
fn gap_log(a: f64, b: f64, z: Complex64) -> Complex64 {
    if z.im > 0.0 {
        ((b - z) / (a - z)).ln()
    } else {
        let t = z.re;
        let ratio = (b - t) / (a - t);
        if ratio < 0.0 {
            Complex64::new((-ratio).ln(), PI)
        } else {
            Complex64::new(ratio.ln(), 0.0)
        }
    }
}

fn check_domain(profile: &KreinProfile, z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NotUpperHalfPlane { z });
    }
    if z.im < 0.0 {
        return Err(Error::NotUpperHalfPlane { z });
    }
    profile.gapset.check_clear(z, profile.endpoint_margin)
}

/// Closed-form `log M(z)` of the construction. Real `z` gives the boundary value
/// from `ℂ⁺`, which inside a gap is the analytic continuation through it.
pub fn build_log_m(profile: &KreinProfile, z: Complex64) -> Result<ComplexMat2> {
    check_domain(profile, z)?;
    if !profile.is_piecewise_constant() {
        if z.im == 0.0 {
            return Err(Error::ContinuationUnavailable);
        }
        return herglotz::rep_log_m(profile, &ComplexMat2::ZERO, z);
    }
    let half = ComplexMat2::scalar(HALF);
    let mut log_m = ComplexMat2::scalar(Complex64::new(0.0, FRAC_PI_2));
    for (&(a, b), angle) in profile.gapset.gaps.iter().zip(&profile.angles) {
        let GapAngle::Constant(alpha) = angle else {
            unreachable!("checked piecewise constant")
        };
        log_m = log_m + (projection(*alpha) - half) * gap_log(a, b, z);
    }
    Ok(log_m)
}

/// Eigenvalues `λ± = iπ/2 ± ½ Σ log((b_j − z)/(a_j − z))` of `log M` for a uniform
/// profile; `λ₊` belongs to the direction `(cos α, sin α)`.
pub fn eigen_lambda(profile: &KreinProfile, z: Complex64) -> Result<(Complex64, Complex64)> {
    if profile.uniform_angle().is_none() {
        return Err(Error::NotUniform);
    }
    check_domain(profile, z)?;
    let sum: Complex64 = profile
        .gapset
        .gaps
        .iter()
        .map(|&(a, b)| gap_log(a, b, z))
        .sum();
    let centre = Complex64::new(0.0, FRAC_PI_2);
    Ok((centre + sum * 0.5, centre - sum * 0.5))
}

/// `M(z) = exp(log M(z))`.
pub fn build_m(profile: &KreinProfile, z: Complex64) -> Result<ComplexMat2> {
    build_log_m(profile, z).map(|l| mat2::mexp(&l))
}

fn kernel_vector(a: &ComplexMat2, mu: Complex64) -> [Complex64; 2] {
    let from_row1 = [a.m12, mu - a.m11];
    let from_row2 = [mu - a.m22, a.m21];
    let n1 = from_row1[0].norm() + from_row1[1].norm();
    let n2 = from_row2[0].norm() + from_row2[1].norm();
    if n1 >= n2 {
        from_row1
    } else {
        from_row2
    }
}

/// Recovers `(m₊, m₋)` from the eigenvectors `(±m±, 1)` of `M·J` for the eigenvalues `∓1`.
pub fn weyl_from_m(m: &ComplexMat2) -> Result<WeylPair> {
    let det = m.det();
    if (det + 1.0).norm() > 1e-8 {
        return Err(Error::InvalidDeterminant { det });
    }
    let mj = *m * J;
    let [l1, l2] = mj.eigenvalues();
    let (hi, lo) = if l1.re >= l2.re { (l1, l2) } else { (l2, l1) };
    if (hi - 1.0).norm() > 1e-6 || (lo + 1.0).norm() > 1e-6 {
        return Err(Error::DegenerateEigenproblem(l1, l2));
    }
    let one = Complex64::new(1.0, 0.0);
    let v_plus = kernel_vector(&mj, -one);
    let v_minus = kernel_vector(&mj, one);
    if v_plus.iter().chain(&v_minus).all(|c| c.norm() == 0.0) {
        return Err(Error::DegenerateEigenproblem(l1, l2));
    }
    Ok(WeylPair {
        m_plus: SpherePoint::from_homogeneous(v_plus[0], v_plus[1]),
        m_minus: SpherePoint::from_homogeneous(-v_minus[0], v_minus[1]),
    })
}

/// `M = −1/(m₊ + m₋) · [[−2m₊m₋, m₊ − m₋], [m₊ − m₋, 2]]`, evaluated in
/// homogeneous coordinates so either function may sit at `∞`.
pub fn assemble_m(w: &WeylPair) -> Result<ComplexMat2> {
    let [u1, u2] = w.m_plus.homogeneous();
    let [v1, v2] = w.m_minus.homogeneous();
    let denom = u1 * v2 + v1 * u2;
    let scale = (u1.norm() + u2.norm()) * (v1.norm() + v2.norm());
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::PoleAt);
    }
    let f = -denom.inv();
    let off = u1 * v2 - v1 * u2;
    ComplexMat2::try_new(u1 * v1 * (-2.0) * f, off * f, off * f, u2 * v2 * 2.0 * f)
}

/// `W(0) = Σ_j ∫_{a_j}^{b_j} (ξ(t) − I/2) dt`.
pub fn trace_formula_w0(profile: &KreinProfile) -> PotentialSample {
    let half = ComplexMat2::scalar(HALF);
    let mut w = ComplexMat2::ZERO;
    for (&(a, b), angle) in profile.gapset.gaps.iter().zip(&profile.angles) {
        match angle {
            GapAngle::Constant(alpha) => w = w + (projection(*alpha) - half) * (b - a),
            GapAngle::Sampled(s) => {
                let mut cuts: Vec<f64> = s.nodes().iter().copied().filter(|&t| a < t && t < b).collect();
                cuts.insert(0, a);
                cuts.push(b);
                for seg in cuts.windows(2) {
                    w = w + crate::quad::composite_legendre(
                        |t| projection(s.at(t)) - half,
                        seg[0],
                        seg[1],
                        16,
                        4,
                    );
                }
            }
        }
    }
    PotentialSample {
        x: 0.0,
        p: w.m11.re,
        q: w.m12.re,
    }
}

/// `½ Σ (b_j − a_j)`.
pub fn sharp_bound(gapset: &GapSet) -> f64 {
    0.5 * gapset.total_width()
}

/// Whether a profile attains the bound or sits strictly below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Uniform projection: equality in the bound, spectrum inside `E`.
    Extremal,
    /// Angles differ: strict inequality; reflectionless on `E` only.
    Strict,
}

impl Classification {
    pub fn membership(&self) -> &'static str {
        match self {
            Classification::Extremal => "R0(E)",
            Classification::Strict => "R(E) candidate",
        }
    }
}

pub fn classify(profile: &KreinProfile) -> Classification {
    if profile.uniform_angle().is_some() {
        Classification::Extremal
    } else {
        Classification::Strict
    }
}

/// `sup_t ‖Re M(t + i0)‖` over points in the interior of `E`.
pub fn reflectionless_defect(
    m: &MFunction,
    gapset: &GapSet,
    grid: &[f64],
    schedule: &LimitSchedule,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in grid {
        if gapset.locate(t).is_some()
            || gapset.check_clear(Complex64::new(t, 0.0), ENDPOINT_MARGIN).is_err()
        {
            return Err(Error::NotInSpectralSet { t });
        }
        let limit = herglotz::boundary_limit(m, t, schedule, |mz| Ok(mz.re()))?;
        worst = worst.max(limit.value.norm());
    }
    Ok(worst)
}

/// `sup_t ‖Im M(t)‖` over gap-interior points, using the explicit continuation.
pub fn gap_realness(profile: &KreinProfile, grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in grid {
        if profile.gapset.locate(t).is_none() {
            return Err(Error::NotInGap { t });
        }
        let m = build_m(profile, Complex64::new(t, 0.0))?;
        worst = worst.max(m.im().norm());
    }
    Ok(worst)
}

/// Imaginary parts below this count as a loss of positivity in [`herglotz_margin`].
pub const HERGLOTZ_TOL: f64 = 1e-10;

/// Smallest eigenvalue of `Im M(z)` over points hugging each gap from above, as
/// `(value, z)`. Uniform profiles give normal `M` and a margin of zero up to rounding;
/// when the gap projections do not commute, `exp(log M)` can leave the Siegel half-space
/// and the margin turns negative.
pub fn herglotz_margin(profile: &KreinProfile) -> Result<(f64, Complex64)> {
    let mut worst = (f64::INFINITY, Complex64::new(0.0, 1.0));
    for &(a, b) in &profile.gapset.gaps {
        let w = b - a;
        for k in 1..64 {
            let t = a + w * k as f64 / 64.0;
            for y in [1e-3, 1e-2, 0.1, 1.0] {
                let z = Complex64::new(t, y * w);
                let im = build_m(profile, z)?.im_hermitian();
                let centre = 0.5 * (im.m11.re + im.m22.re);
                let spread = (0.5 * (im.m11.re - im.m22.re)).hypot(im.m12.norm());
                if centre - spread < worst.0 {
                    worst = (centre - spread, z);
                }
            }
        }
    }
    Ok(worst)
}

/// `‖[Re log M(t), ξ(t)]‖` at a gap point, with `ξ(t) = Im log M(t)/π`.
pub fn commutator_diag(profile: &KreinProfile, t: f64) -> Result<f64> {
    if profile.gapset.is_empty() {
        return Ok(0.0);
    }
    if profile.gapset.locate(t).is_none() {
        return Err(Error::NotInGap { t });
    }
    let log_m = build_log_m(profile, Complex64::new(t, 0.0))?;
    let xi = log_m.im() * (1.0 / PI);
    Ok(log_m.re().commutator(&xi).norm())
}

/// `‖Q − I/2‖` for a real symmetric `Q` with unit trace and spectrum in `[0, 1]`.
pub fn hull_norm(q: &ComplexMat2) -> Result<f64> {
    let tol = 1e-10;
    if q.entries().iter().any(|z| z.im.abs() > tol) {
        return Err(Error::NotAdmissible("Q has a nonzero imaginary part".into()));
    }
    if (q.m12 - q.m21).norm() > tol {
        return Err(Error::NotAdmissible("Q is not symmetric".into()));
    }
    let trace = q.trace().re;
    if (trace - 1.0).abs() > tol {
        return Err(Error::NotAdmissible(format!("tr Q = {trace}, expected 1")));
    }
    for ev in q.eigenvalues() {
        if ev.re < -tol || ev.re > 1.0 + tol {
            return Err(Error::NotAdmissible(format!("eigenvalue {} outside [0, 1]", ev.re)));
        }
    }
    Ok((*q - ComplexMat2::scalar(HALF)).norm())
}
