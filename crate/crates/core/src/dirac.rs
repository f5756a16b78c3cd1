//! Direct solution of the Dirac system `J y' + W y = −z y`, i.e. `y' = J(W + z) y`.
//!
//! This is the independent oracle for the complex-analytic construction:
//! potentials are step functions with constant tails, solutions are propagated
//! exactly across each piece by a matrix exponential, and the Weyl functions are
//! read off the decaying solutions. The ratio `m = y₁/y₂` obeys the Riccati
//! equation `m' = (p − z) − 2q·m − (p + z)·m²`, which drives the co-evolution used
//! to sample `W(x)` along the line from the M function at the origin alone.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finitegap::{self, KreinProfile, PotentialSample, SpherePoint, WeylPair};
use crate::herglotz::{MFunction, MSource};
use crate::mat2::{self, ComplexMat2};
use crate::quad;

/// Beyond this modulus the Riccati coordinate switches to `1/m`.
pub const POLE_GUARD: f64 = 1e6;

/// Threshold on `|Re λ|` below which the decaying and growing solutions cannot be told apart.
pub const DICHOTOMY_TOL: f64 = 1e-12;

/// Slack allowed above the sharp bound before a sampled potential is flagged.
pub const BOUND_SLACK: f64 = 1e-4;

/// `J(W + z) = [[−q, p − z], [p + z, q]]`.
pub fn coefficient(p: f64, q: f64, z: Complex64) -> ComplexMat2 {
    ComplexMat2::new((-q).into(), p - z, p + z, q.into())
}

/// Piecewise-constant trace-free potential with constant tails.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPotential {
    breakpoints: Vec<f64>,
    pieces: Vec<(f64, f64)>,
    tails: [(f64, f64); 2],
}

impl StepPotential {
    /// `pieces[k]` holds on `[breakpoints[k], breakpoints[k + 1])`; `tails[0]` left of the
    /// first breakpoint and `tails[1]` from the last one on.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<(f64, f64)>, tails: [(f64, f64); 2]) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidPotential("at least one breakpoint is required".into()));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1]) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidPotential("breakpoints must be finite and strictly increasing".into()));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidPotential(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        let all_finite = pieces
            .iter()
            .chain(tails.iter())
            .all(|&(p, q)| p.is_finite() && q.is_finite());
        if !all_finite {
            return Err(Error::InvalidPotential("non-finite potential value".into()));
        }
        Ok(StepPotential {
            breakpoints,
            pieces,
            tails,
        })
    }

    pub fn constant(p: f64, q: f64) -> Self {
        StepPotential {
            breakpoints: vec![0.0],
            pieces: Vec::new(),
            tails: [(p, q), (p, q)],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn tails(&self) -> [(f64, f64); 2] {
        self.tails
    }

    /// `(p, q)` at `x`.
    pub fn at(&self, x: f64) -> (f64, f64) {
        let n = self.breakpoints.len();
        if x < self.breakpoints[0] {
            self.tails[0]
        } else if x >= self.breakpoints[n - 1] {
            self.tails[1]
        } else {
            let k = self.breakpoints.partition_point(|&b| b <= x) - 1;
            self.pieces[k]
        }
    }

    /// Constant stretches covering `[lo, hi]`, as `(start, end, (p, q))`.
    fn segments(&self, lo: f64, hi: f64) -> Vec<(f64, f64, (f64, f64))> {
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints.iter().copied().filter(|&b| lo < b && b < hi));
        cuts.push(hi);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[0], w[1], self.at(0.5 * (w[0] + w[1]))))
            .collect()
    }

    /// Moves a solution vector from `from` to `to` (either direction), renormalising
    /// after each piece; only the direction is meaningful.
    fn propagate(&self, from: f64, to: f64, z: Complex64, mut y: [Complex64; 2]) -> [Complex64; 2] {
        let forward = to >= from;
        let mut segs = self.segments(from.min(to), from.max(to));
        if !forward {
            segs.reverse();
        }
        for (s, e, (p, q)) in segs {
            let length = if forward { e - s } else { s - e };
            y = mat2::mexp(&(coefficient(p, q, z) * length)).apply(y);
            let n = y[0].norm().max(y[1].norm());
            y = [y[0] / n, y[1] / n];
        }
        y
    }
}

/// JSON form: `{"breakpoints": [...], "pieces": [[p, q], ...], "tails": [[p, q], [p, q]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepPotentialSpec {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<[f64; 2]>,
    pub tails: [[f64; 2]; 2],
}

impl StepPotentialSpec {
    pub fn to_potential(&self) -> Result<StepPotential> {
        StepPotential::new(
            self.breakpoints.clone(),
            self.pieces.iter().map(|v| (v[0], v[1])).collect(),
            [
                (self.tails[0][0], self.tails[0][1]),
                (self.tails[1][0], self.tails[1][1]),
            ],
        )
    }
}

/// Propagator `y(x₀) ↦ y(x₁)`; unimodular because `J(W + z)` is trace-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(ComplexMat2);

impl TransferMatrix {
    pub fn value(&self) -> ComplexMat2 {
        self.0
    }

    pub fn det(&self) -> Complex64 {
        self.0.det()
    }

    /// Möbius action on `m = y₁/y₂`.
    pub fn act(&self, m: SpherePoint) -> SpherePoint {
        let y = self.0.apply(m.homogeneous());
        SpherePoint::from_homogeneous(y[0], y[1])
    }

    pub fn then(&self, next: &TransferMatrix) -> TransferMatrix {
        TransferMatrix(next.0 * self.0)
    }
}

/// Product of `exp(ℓ·J(W + z))` over the constant pieces between `x0 < x1`.
pub fn transfer(w: &StepPotential, x0: f64, x1: f64, z: Complex64) -> Result<TransferMatrix> {
    if !(x0 < x1) {
        return Err(Error::InvalidGrid(format!("transfer needs x0 < x1, got {x0} and {x1}")));
    }
    let t = w
        .segments(x0, x1)
        .into_iter()
        .fold(ComplexMat2::IDENTITY, |acc, (s, e, (p, q))| {
            mat2::mexp(&(coefficient(p, q, z) * (e - s))) * acc
        });
    Ok(TransferMatrix(t))
}

/// Exponents `(λ₋, λ₊)` of `J(W + z)` with `Re λ₋ < 0 < Re λ₊`.
fn dichotomy(p: f64, q: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let kappa = (Complex64::from(p * p + q * q) - z * z).sqrt();
    if kappa.re.abs() < DICHOTOMY_TOL {
        return Err(Error::DegenerateDichotomy { z, exponent: kappa });
    }
    Ok(if kappa.re < 0.0 { (kappa, -kappa) } else { (-kappa, kappa) })
}

/// Ratio `y₁/y₂` of the eigenvector of `J(W + z)` for `lambda`, from whichever row
/// is better conditioned.
fn eigen_ratio(p: f64, q: f64, z: Complex64, lambda: Complex64) -> Complex64 {
    let row1 = (lambda + q, p - z);
    let row2 = (p + z, lambda - q);
    if row1.0.norm() >= row2.0.norm() {
        row1.1 / row1.0
    } else {
        row2.1 / row2.0
    }
}

/// Weyl functions of the constant potential `(p, q)`:
/// `m₊ = (p − z)/(λ₋ + q)` and `m₋ = −(p − z)/(λ₊ + q)`.
pub fn const_weyl(p: f64, q: f64, z: Complex64) -> Result<WeylPair> {
    let (decaying, growing) = dichotomy(p, q, z)?;
    Ok(WeylPair::finite(
        eigen_ratio(p, q, z, decaying),
        -eigen_ratio(p, q, z, growing),
    ))
}

/// Weyl functions of a step potential: seed the tail eigen-solutions that decay at
/// `±∞` and carry them to the origin.
pub fn ode_weyl(w: &StepPotential, z: Complex64) -> Result<WeylPair> {
    let [(pl, ql), (pr, qr)] = w.tails;
    let right = const_weyl(pr, qr, z)?.m_plus;
    let left = const_weyl(pl, ql, z)?.m_minus.neg();
    let first = w.breakpoints[0];
    let last = *w.breakpoints.last().expect("at least one breakpoint");
    let y_plus = w.propagate(last, 0.0, z, right.homogeneous());
    let y_minus = w.propagate(first, 0.0, z, left.homogeneous());
    Ok(WeylPair {
        m_plus: SpherePoint::from_homogeneous(y_plus[0], y_plus[1]),
        m_minus: SpherePoint::from_homogeneous(-y_minus[0], y_minus[1]),
    })
}

/// `M` of the constant potential, assembled from [`const_weyl`].
pub fn constant_m_function(p: f64, q: f64) -> MFunction {
    let r = mat2::op_norm_sym(p, q);
    let singularities = if r > 0.0 {
        vec![(-r, 2e-3 * r), (r, 2e-3 * r)]
    } else {
        Vec::new()
    };
    MFunction::new(MSource::Assembled, singularities, move |z| {
        finitegap::assemble_m(&const_weyl(p, q, z)?)
    })
}

/// `M` of a step potential by direct integration.
pub fn ode_m_function(w: StepPotential) -> MFunction {
    MFunction::new(MSource::OdeOracle, Vec::new(), move |z| {
        finitegap::assemble_m(&ode_weyl(&w, z)?)
    })
}

/// Error control for [`riccati_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_substeps: usize,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        RiccatiOptions {
            rtol: 1e-12,
            atol: 1e-12,
            max_substeps: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    Direct,
    Inverted,
}

fn riccati_rhs(chart: Chart, v: Complex64, p: f64, q: f64, z: Complex64) -> Complex64 {
    match chart {
        // m' = (p − z) − 2q m − (p + z) m²
        Chart::Direct => (p - z) - v * (2.0 * q) - (p + z) * v * v,
        // w = 1/m:  w' = (p + z) + 2q w − (p − z) w²
        Chart::Inverted => (p + z) + v * (2.0 * q) - (p - z) * v * v,
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp5_trial(chart: Chart, v: Complex64, h: f64, p: f64, q: f64, z: Complex64) -> (Complex64, Complex64) {
    debug_assert!(C[0] == 0.0);
    let mut k = [Complex64::new(0.0, 0.0); 7];
    for i in 0..7 {
        let mut arg = v;
        for j in 0..i {
            arg += k[j] * (h * A[i][j]);
        }
        k[i] = riccati_rhs(chart, arg, p, q, z);
    }
    let mut high = v;
    let mut err = Complex64::new(0.0, 0.0);
    for i in 0..7 {
        high += k[i] * (h * B5[i]);
        err += k[i] * (h * (B5[i] - B4[i]));
    }
    (high, err)
}

/// Advances `m = y₁/y₂` over a signed length `h` of constant potential with an
/// adaptive Dormand–Prince 5(4) integrator, switching to the chart `1/m` whenever
/// `|m|` passes [`POLE_GUARD`].
pub fn riccati_step(m: SpherePoint, p: f64, q: f64, z: Complex64, h: f64) -> Result<SpherePoint> {
    riccati_step_with(m, p, q, z, h, &RiccatiOptions::default())
}

pub fn riccati_step_with(
    m: SpherePoint,
    p: f64,
    q: f64,
    z: Complex64,
    h: f64,
    opts: &RiccatiOptions,
) -> Result<SpherePoint> {
    let (mut chart, mut v) = match m {
        SpherePoint::Finite(m) if m.norm() <= POLE_GUARD => (Chart::Direct, m),
        SpherePoint::Finite(m) => (Chart::Inverted, m.inv()),
        SpherePoint::Infinity => (Chart::Inverted, Complex64::new(0.0, 0.0)),
    };
    if h == 0.0 {
        return Ok(m);
    }
    let direction = h.signum();
    let mut remaining = h.abs();
    let scale = 1.0 + z.norm() + p.abs() + q.abs();
    let mut sub = remaining.min(0.5 / scale);
    let mut x = 0.0;
    for _ in 0..opts.max_substeps {
        if remaining <= 0.0 {
            break;
        }
        let trial = sub.min(remaining);
        let (next, err) = dp5_trial(chart, v, direction * trial, p, q, z);
        let tol = opts.atol + opts.rtol * v.norm().max(next.norm());
        let ratio = err.norm() / tol;
        if ratio <= 1.0 && next.re.is_finite() && next.im.is_finite() {
            v = next;
            x += trial;
            remaining -= trial;
            if v.norm() > POLE_GUARD {
                chart = match chart {
                    Chart::Direct => Chart::Inverted,
                    Chart::Inverted => Chart::Direct,
                };
                v = v.inv();
            }
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        sub = trial * factor;
        if sub < 1e-15 * h.abs() {
            return Err(Error::StepRejected { x: direction * x, step: sub });
        }
    }
    if remaining > 0.0 {
        return Err(Error::StepRejected { x: direction * x, step: sub });
    }
    Ok(match chart {
        Chart::Direct => SpherePoint::Finite(v),
        Chart::Inverted => SpherePoint::from_homogeneous(Complex64::new(1.0, 0.0), v),
    })
}

/// Controls for [`sample_potential_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitOptions {
    /// Kronrod panels per gap, in the angle `θ` with `t = a + (b − a)(1 − cos θ)/2`.
    pub panels: usize,
    /// Target local error on `W` per accepted step.
    pub local_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            panels: 4,
            local_tol: 1e-10,
            initial_step: 1e-2,
            max_step: 0.05,
            min_step: 1e-9,
        }
    }
}

/// One sampled point of the orbit `x ↦ W(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub x: f64,
    pub p: f64,
    pub q: f64,
    pub norm: f64,
    /// Kronrod-minus-Gauss estimate of the quadrature error in `W(x)`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTrace {
    pub points: Vec<OrbitPoint>,
    pub bound: f64,
    /// Points where `‖W(x)‖` exceeded `bound + BOUND_SLACK`.
    pub violations: Vec<OrbitPoint>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl OrbitTrace {
    pub fn check_bound(&self) -> Result<()> {
        match self.violations.first() {
            Some(v) => Err(Error::BoundViolation {
                x: v.x,
                norm: v.norm,
                bound: self.bound,
            }),
            None => Ok(()),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| p.norm).fold(0.0, f64::max)
    }

    pub fn samples(&self) -> Vec<PotentialSample> {
        self.points.iter().map(|&p| p.into()).collect()
    }
}

/// Gap quadrature node carrying the two Weyl solutions at the real spectral point `t`.
#[derive(Debug, Clone, Copy)]
struct Node {
    t: f64,
    kronrod: f64,
    gauss: f64,
}

type State = Vec<[Complex64; 2]>;

/// Weyl solutions `y₊` (entries `0..n`) and `y₋` (entries `n..2n`) at every gap node.
struct Orbit {
    nodes: Vec<Node>,
}

impl Orbit {
    fn from_profile(profile: &KreinProfile, panels: usize) -> Result<(Orbit, State)> {
        let near = profile.clone().with_endpoint_margin(1e-12)?;
        let mut nodes = Vec::new();
        for &(a, b) in profile.gapset().gaps() {
            let dt = 0.5 * (b - a);
            for k in 0..panels {
                let lo = PI * k as f64 / panels as f64;
                let hi = PI * (k + 1) as f64 / panels as f64;
                for (theta, wk, wg) in quad::kronrod_nodes(lo, hi) {
                    let jac = dt * theta.sin();
                    nodes.push(Node {
                        t: a + dt * (1.0 - theta.cos()),
                        kronrod: wk * jac,
                        gauss: wg * jac,
                    });
                }
            }
        }
        let mut plus = Vec::with_capacity(nodes.len());
        let mut minus = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let m = finitegap::build_m(&near, node.t.into())?;
            let pair = finitegap::weyl_from_m(&m)?;
            plus.push(pair.m_plus.homogeneous());
            let [y1, y2] = pair.m_minus.homogeneous();
            minus.push([-y1, y2]);
        }
        plus.extend(minus);
        Ok((Orbit { nodes }, plus))
    }

    /// `W = Σ_gaps ∫ (ξ(t) − ½) dt` with `ξ(t) = Im log M(t + i0)/π`; also returns the
    /// Kronrod–Gauss difference as an error estimate.
    fn potential(&self, state: &State) -> Result<(f64, f64, f64)> {
        let n = self.nodes.len();
        let (mut pk, mut qk, mut pg, mut qg) = (0.0, 0.0, 0.0, 0.0);
        for (k, node) in self.nodes.iter().enumerate() {
            let [u1, u2] = state[k];
            let [v1, v2] = state[n + k];
            let pair = WeylPair {
                m_plus: SpherePoint::from_homogeneous(u1, u2),
                m_minus: SpherePoint::from_homogeneous(-v1, v2),
            };
            let xi = mat2::mlog_spectral(&finitegap::assemble_m(&pair)?)?.im() * (1.0 / PI);
            let (dp, dq) = (0.5 * (xi.m11.re - xi.m22.re), 0.5 * (xi.m12.re + xi.m21.re));
            pk += node.kronrod * dp;
            qk += node.kronrod * dq;
            pg += node.gauss * dp;
            qg += node.gauss * dq;
        }
        if !(pk.is_finite() && qk.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok((pk, qk, (pk - pg).hypot(qk - qg)))
    }

    fn rate(&self, state: &State) -> Result<State> {
        let (p, q, _) = self.potential(state)?;
        let n = self.nodes.len();
        Ok(state
            .iter()
            .enumerate()
            .map(|(k, y)| coefficient(p, q, self.nodes[k % n].t.into()).apply(*y))
            .collect())
    }

    /// Classical Runge–Kutta step of the closed system, renormalised afterwards.
    fn step(&self, state: &State, h: f64) -> Result<State> {
        let shifted = |base: &State, k: &State, c: f64| -> State {
            base.iter()
                .zip(k)
                .map(|(y, d)| [y[0] + d[0] * c, y[1] + d[1] * c])
                .collect()
        };
        let k1 = self.rate(state)?;
        let k2 = self.rate(&shifted(state, &k1, 0.5 * h))?;
        let k3 = self.rate(&shifted(state, &k2, 0.5 * h))?;
        let k4 = self.rate(&shifted(state, &k3, h))?;
        Ok(state
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let mut out = [Complex64::new(0.0, 0.0); 2];
                for c in 0..2 {
                    out[c] = y[c] + (k1[i][c] + (k2[i][c] + k3[i][c]) * 2.0 + k4[i][c]) * (h / 6.0);
                }
                let n = out[0].norm().hypot(out[1].norm());
                [out[0] / n, out[1] / n]
            })
            .collect())
    }
}

/// Samples `W(x)` on `xgrid` (increasing, from `x ≥ 0`) by shifting the origin.
///
/// The Weyl solutions at real points inside the gaps are carried along `y' = J(W + t) y`,
/// and `W(x)` is re-read at every stage from the trace formula of the shifted M
/// function, which stays reflectionless on the same set. Needs the closed-form
/// continuation into the gaps, i.e. a piecewise-constant profile, and refuses profiles
/// whose M leaves the Herglotz class (see [`finitegap::herglotz_margin`]).
pub fn sample_potential(profile: &KreinProfile, xgrid: &[f64]) -> Result<OrbitTrace> {
    sample_potential_with(profile, xgrid, &OrbitOptions::default())
}

pub fn sample_potential_with(profile: &KreinProfile, xgrid: &[f64], opts: &OrbitOptions) -> Result<OrbitTrace> {
    if xgrid.is_empty() || !(xgrid[0] >= 0.0) || !xgrid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidGrid("x-grid must be non-empty, start at or after 0 and increase".into()));
    }
    if !profile.is_piecewise_constant() {
        return Err(Error::ContinuationUnavailable);
    }
    if profile.uniform_angle().is_none() {
        let (margin, z) = finitegap::herglotz_margin(profile)?;
        if margin < -finitegap::HERGLOTZ_TOL {
            return Err(Error::NotAdmissible(format!(
                "Im M({z}) has eigenvalue {margin:e}; no Dirac operator has this M"
            )));
        }
    }
    let bound = finitegap::sharp_bound(profile.gapset());
    let mut trace = OrbitTrace {
        points: Vec::with_capacity(xgrid.len()),
        bound,
        violations: Vec::new(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let (orbit, mut state) = Orbit::from_profile(profile, opts.panels.max(1))?;
    let (mut p, mut q, mut residual) = orbit.potential(&state)?;
    let mut x = 0.0;
    let mut step = opts.initial_step;

    for &target in xgrid {
        while target - x > 1e-14 * (1.0 + target.abs()) {
            let h = step.min(target - x);
            let coarse = orbit.step(&state, h)?;
            let half = orbit.step(&state, 0.5 * h)?;
            let fine = orbit.step(&half, 0.5 * h)?;
            let (pc, qc, _) = orbit.potential(&coarse)?;
            let (pf, qf, rf) = orbit.potential(&fine)?;
            let err = (pf - pc).hypot(qf - qc) / 15.0;
            if err <= opts.local_tol {
                state = fine;
                p = pf;
                q = qf;
                residual = rf;
                x += h;
                trace.accepted_steps += 1;
            } else {
                trace.rejected_steps += 1;
            }
            let factor = if err == 0.0 {
                2.0
            } else {
                (0.9 * (opts.local_tol / err).powf(0.2)).clamp(0.2, 2.0)
            };
            step = (h * factor).min(opts.max_step);
            if step < opts.min_step {
                return Err(Error::StepRejected { x, step });
            }
        }
        x = target;
        let point = OrbitPoint {
            x,
            p,
            q,
            norm: mat2::op_norm_sym(p, q),
            residual,
        };
        if point.norm > bound + BOUND_SLACK {
            trace.violations.push(point);
        }
        trace.points.push(point);
    }
    Ok(trace)
}

impl From<OrbitPoint> for PotentialSample {
    fn from(o: OrbitPoint) -> Self {
        PotentialSample { x: o.x, p: o.p, q: o.q }
    }
}
