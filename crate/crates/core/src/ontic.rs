//! The deterministic threshold model on the sphere.
//!
//! The ontic state is `(psi, lambda)` with `lambda` uniform on the unit
//! sphere. Outcomes are `x = +1` iff `a_hat . lambda >= cos xi` and
//! `y = +1` iff `b . lambda >= cos chi`, where `cos xi = -<x(a)>` and
//! `cos chi = -<y(b)>`. The effective direction `a_hat` is `a` rotated toward
//! `b` in their common plane by the angle that reproduces the quantum
//! correlation.
//!
//! At fixed polar angle `tau` each threshold set meets the ring of latitude
//! in an arc, so averages over the azimuth are arc-length fractions. Only the
//! `tau` integral is done numerically.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_tau, cross, point_at, UnitVec3, PROPAGATION_AXIS};
use crate::mc::{self, Estimate};
use crate::numerics::{first_true, integrate};
use crate::quantum::{joint_correlation, marginal_x, marginal_y, Outcome, Setting, TwoQubitState};

/// Default residual tolerance for [`solve_a_hat`].
pub const SOLVER_TOL: f64 = 1e-10;

/// Absolute tolerance of the `tau` quadrature behind
/// [`model_joint_correlation`].
pub const CORRELATION_QUAD_TOL: f64 = 1e-12;

/// Settings are accepted as in-plane when their propagation-axis component
/// is below this.
pub const PLANE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnticState {
    pub psi: TwoQubitState,
    pub lambda_tilde: UnitVec3,
}

/// Threshold angles `xi`, `chi` in [0, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub xi: f64,
    pub chi: f64,
}

pub fn thresholds_for(state: &TwoQubitState, a: &Setting, b: &Setting) -> Thresholds {
    Thresholds {
        xi: threshold_angle(marginal_x(state, a)),
        chi: threshold_angle(marginal_y(state, b)),
    }
}

fn threshold_angle(mean: f64) -> f64 {
    (-mean).clamp(-1.0, 1.0).acos()
}

pub fn outcome_x(a_hat: &UnitVec3, lambda: &UnitVec3, xi: f64) -> Outcome {
    threshold_outcome(a_hat.dot(lambda), xi)
}

/// Uses the raw setting `b`; only the x side is steered.
pub fn outcome_y(b: &Setting, lambda: &UnitVec3, chi: f64) -> Outcome {
    threshold_outcome(b.direction().dot(lambda), chi)
}

fn threshold_outcome(projection: f64, angle: f64) -> Outcome {
    if projection >= angle.cos() {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Draws `lambda` uniformly on the sphere.
pub fn sample_lambda<R: Rng + ?Sized>(rng: &mut R) -> UnitVec3 {
    mc::uniform_on_sphere(rng)
}

/// Marginal density of the polar angle, `sin(tau) / 2`.
pub fn rho_tau(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(0.5 * tau.sin())
}

/// An arc `[center - half_width, center + half_width]` of a ring of latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub center: f64,
    pub half_width: f64,
}

impl Arc {
    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }
}

/// Intersection of the threshold set `{n . lambda >= cos_threshold}` with the
/// ring at polar angle `tau`.
pub fn cap_arc(n: &UnitVec3, cos_threshold: f64, tau: f64) -> Arc {
    let (st, ct) = tau.sin_cos();
    let [nx, ny, nz] = *n.as_array();
    let radius = nx.hypot(nz) * st;
    let center = nz.atan2(nx);
    let k = cos_threshold - ny * ct;
    let half_width = if radius <= 0.0 {
        if k <= 0.0 {
            PI
        } else {
            0.0
        }
    } else {
        (k / radius).clamp(-1.0, 1.0).acos()
    };
    Arc { center, half_width }
}

/// Length of the intersection of two arcs on the unit circle.
pub fn arc_overlap(p: &Arc, q: &Arc) -> f64 {
    if p.half_width >= PI {
        return q.length().min(TAU);
    }
    if q.half_width >= PI {
        return p.length();
    }
    let d = (q.center - p.center).rem_euclid(TAU);
    let (lo1, hi1) = (-p.half_width, p.half_width);
    (-1..=1)
        .map(|k| {
            let shift = d + TAU * f64::from(k);
            let lo2 = shift - q.half_width;
            let hi2 = shift + q.half_width;
            (hi1.min(hi2) - lo1.max(lo2)).max(0.0)
        })
        .sum()
}

/// Azimuthal average of `x * y` on the ring at `tau`.
fn ring_correlation(a_hat: &UnitVec3, cos_xi: f64, b: &UnitVec3, cos_chi: f64, tau: f64) -> f64 {
    let p = cap_arc(a_hat, cos_xi, tau);
    let q = cap_arc(b, cos_chi, tau);
    let sym_diff = p.length() + q.length() - 2.0 * arc_overlap(&p, &q);
    1.0 - sym_diff / PI
}

/// Azimuthal average of `x` on the ring at `tau`: the arc-fraction form of
/// the intermediate average for direction `n`.
pub fn ring_average(n: &UnitVec3, xi: f64, tau: f64) -> f64 {
    2.0 * cap_arc(n, xi.cos(), tau).length() / TAU - 1.0
}

/// Polar angles where the threshold set `{n . lambda >= cos_threshold}`
/// starts or stops meeting the rings of latitude. With `phi` the angle of `n`
/// from the propagation axis, the extreme projections on the ring at `tau`
/// are `cos(tau -/+ phi)`, so the edges solve `cos(tau -/+ phi) = cos xi`.
pub fn cap_boundaries(n: &UnitVec3, cos_threshold: f64) -> Vec<f64> {
    let [nx, ny, nz] = *n.as_array();
    let phi = nx.hypot(nz).atan2(ny);
    let xi = cos_threshold.clamp(-1.0, 1.0).acos();
    let mut out = Vec::new();
    for centre in [phi, -phi] {
        for offset in [xi, -xi] {
            for wrap in [-TAU, 0.0, TAU] {
                let t = centre + offset + wrap;
                if (0.0..=PI).contains(&t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

pub(crate) fn tau_grid(mut interior: Vec<f64>) -> Vec<f64> {
    interior.push(FRAC_PI_2);
    interior.retain(|t| *t > 0.0 && *t < PI);
    interior.push(0.0);
    interior.push(PI);
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    interior
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    Quadrature,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Model correlation with its uncertainty: the quadrature error bound or
/// the Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub uncertainty: f64,
}

/// `E[x y]` under uniform `lambda` for outcome directions `a_hat`, `b` and
/// the thresholds derived from the original pair `(a, b)`.
pub fn model_joint_correlation(
    thresholds: &Thresholds,
    a_hat: &UnitVec3,
    b: &Setting,
    method: Method,
) -> Result<CorrelationEstimate> {
    match method {
        Method::Quadrature => {
            let (cx, cy) = (thresholds.xi.cos(), thresholds.chi.cos());
            let bv = b.direction();
            let mut pts = cap_boundaries(a_hat, cx);
            pts.extend(cap_boundaries(bv, cy));
            let q = integrate(
                |tau| ring_correlation(a_hat, cx, bv, cy, tau) * 0.5 * tau.sin(),
                &tau_grid(pts),
                CORRELATION_QUAD_TOL,
            )?;
            Ok(CorrelationEstimate {
                value: q.value,
                uncertainty: q.abs_error,
            })
        }
        Method::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("sample count must be >= 1".into()));
            }
            let e = mc::estimate(samples, seed, |rng| {
                let lambda = sample_lambda(rng);
                outcome_x(a_hat, &lambda, thresholds.xi).value()
                    * outcome_y(b, &lambda, thresholds.chi).value()
            });
            Ok(CorrelationEstimate {
                value: e.mean,
                uncertainty: e.std_err,
            })
        }
    }
}

/// Effective x-side direction for a setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSetting {
    pub a_hat: UnitVec3,
    /// Rotation from `a` toward `b`, in [-pi, pi].
    pub alpha: f64,
    /// `|model correlation - quantum correlation|` at `a_hat`.
    pub residual: f64,
}

/// Orthonormal in-plane frame `(a, u)` with `b = cos(beta) a + sin(beta) u`.
/// When `a` and `b` are collinear, `u` is the in-plane normal `y × a`.
fn rotation_frame(a: &UnitVec3, b: &UnitVec3) -> (UnitVec3, f64) {
    let beta = a.angle_to(b);
    let cos_ab = a.dot(b);
    let [ax, ay, az] = *a.as_array();
    let [bx, by, bz] = *b.as_array();
    let perp = [bx - cos_ab * ax, by - cos_ab * ay, bz - cos_ab * az];
    let u = if crate::geometry::norm(&perp) > 1e-12 {
        UnitVec3::normalized(perp)
    } else {
        UnitVec3::normalized(cross(&[0.0, 1.0, 0.0], a.as_array()))
    };
    (u.expect("in-plane unit vectors span a frame"), beta)
}

fn rotate(a: &UnitVec3, u: &UnitVec3, alpha: f64) -> UnitVec3 {
    let (s, c) = alpha.sin_cos();
    let [ax, ay, az] = *a.as_array();
    let [ux, uy, uz] = *u.as_array();
    UnitVec3::normalized([c * ax + s * ux, c * ay + s * uy, c * az + s * uz])
        .expect("rotation of a unit vector is nonzero")
}

fn require_in_plane(name: &str, s: &Setting) -> Result<()> {
    if s.direction().as_array()[PROPAGATION_AXIS].abs() > PLANE_TOL {
        return Err(Error::InvalidArgument(format!(
            "setting {name} = {:?} is not in the x-z measurement plane",
            s.components()
        )));
    }
    Ok(())
}

/// Solves for the rotation `alpha` that makes the model reproduce the quantum
/// correlation of `(a, b)`, preferring the root of smallest `|alpha|` (and
/// the negative one on ties).
///
/// The model correlation depends on `a_hat` only through its angle `gamma`
/// to `b`, and is non-increasing in `gamma`. Starting from `alpha = 0`
/// (`gamma = beta`) the nearest root therefore lies toward `b` when the
/// model undershoots and away from `b` when it overshoots; each side is a
/// monotone bracket searched by bisection.
pub fn solve_a_hat(
    state: &TwoQubitState,
    a: &Setting,
    b: &Setting,
    tol: f64,
) -> Result<EffectiveSetting> {
    require_in_plane("a", a)?;
    require_in_plane("b", b)?;
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let thresholds = thresholds_for(state, a, b);
    let target = joint_correlation(state, a, b);
    let av = a.direction();
    let (u, beta) = rotation_frame(av, b.direction());

    let residual_at = |alpha: f64| -> Result<f64> {
        let e = model_joint_correlation(&thresholds, &rotate(av, &u, alpha), b, Method::Quadrature)?;
        Ok(e.value - target)
    };

    let r0 = residual_at(0.0)?;
    if r0.abs() <= tol {
        return Ok(EffectiveSetting {
            a_hat: *av,
            alpha: 0.0,
            residual: r0.abs(),
        });
    }

    let antiparallel = PI - beta < 1e-12;
    // (direction of alpha, bracket length, model must increase?)
    let (dir, len, increase) = if r0 < 0.0 {
        if antiparallel {
            (-1.0, PI, true)
        } else {
            (1.0, beta, true)
        }
    } else {
        (-1.0, PI - beta, false)
    };

    // Quadrature errors surface through `err`; the predicate itself must be
    // infallible for the bisection.
    let err = RefCell::new(None);
    let pred = |s: f64| match residual_at(dir * s) {
        Ok(r) => {
            if increase {
                r >= 0.0
            } else {
                r <= 0.0
            }
        }
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            true
        }
    };
    let no_root = |best: f64| Error::NoRoot {
        theta: state.theta(),
        a: a.components(),
        b: b.components(),
        best_residual: best,
    };

    if !pred(len) {
        if let Some(e) = err.take() {
            return Err(e);
        }
        let r_end = residual_at(dir * len)?;
        return Err(no_root(r0.abs().min(r_end.abs())));
    }
    let s = first_true(pred, len, 0.0);
    if let Some(e) = err.take() {
        return Err(e);
    }
    let alpha = dir * s;
    let residual = residual_at(alpha)?.abs();
    if residual > tol {
        return Err(no_root(residual));
    }
    Ok(EffectiveSetting {
        a_hat: rotate(av, &u, alpha),
        alpha,
        residual,
    })
}

/// Intermediate-level average of `x` at polar angle `tau`:
/// `(1/pi) arccos(2 <x>^2 / sin^2 tau - 1) - 1` on `|tau - pi/2| <= xi`,
/// `-1` elsewhere. The squared mean makes this the arc fraction only when
/// `<x(a)> <= 0`.
pub fn intermediate_f(state: &TwoQubitState, a: &Setting, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(intermediate_average(marginal_x(state, a), tau))
}

/// As [`intermediate_f`], for the y side with `<y(b)>` and `chi`.
pub fn intermediate_g(state: &TwoQubitState, b: &Setting, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(intermediate_average(marginal_y(state, b), tau))
}

fn intermediate_average(mean: f64, tau: f64) -> f64 {
    let angle = threshold_angle(mean);
    if (tau - FRAC_PI_2).abs() > angle {
        return -1.0;
    }
    let sin_tau = tau.sin();
    // At the poles the ratio is 0/0 or +inf; both clamp to arccos(1). sin(pi)
    // is not exactly zero in floating point, hence the epsilon.
    let arg = if sin_tau <= f64::EPSILON {
        1.0
    } else {
        2.0 * mean * mean / (sin_tau * sin_tau) - 1.0
    };
    arg.clamp(-1.0, 1.0).acos() / PI - 1.0
}

/// Monte Carlo average of `x` over the azimuth at fixed `tau`, with `a_hat`
/// solved for `(a, b)`.
pub fn mc_conditional_average_x(
    state: &TwoQubitState,
    a: &Setting,
    b: &Setting,
    tau: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let eff = solve_a_hat(state, a, b, SOLVER_TOL)?;
    let xi = thresholds_for(state, a, b).xi;
    conditional_average_x(&eff.a_hat, xi, tau, samples, seed)
}

/// Monte Carlo average of `outcome_x(a_hat, ., xi)` over the ring at `tau`.
pub fn conditional_average_x(
    a_hat: &UnitVec3,
    xi: f64,
    tau: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    check_tau(tau)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    Ok(mc::estimate(samples, seed, |rng| {
        let mu = mc::azimuth(rng);
        outcome_x(a_hat, &point_at(mu, tau), xi).value()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    /// Integral of the intermediate average against `rho_tau`.
    pub integral: f64,
    /// Quantum marginal it should reproduce.
    pub marginal: f64,
    pub abs_diff: f64,
    pub quadrature_error: f64,
}

/// Integrates [`intermediate_f`] against `rho_tau` and compares with `<x(a)>`.
pub fn verify_quantum_recovery(
    state: &TwoQubitState,
    a: &Setting,
    quadrature_tol: f64,
) -> Result<RecoveryReport> {
    recovery(marginal_x(state, a), quadrature_tol)
}

/// The y-side counterpart of [`verify_quantum_recovery`].
pub fn verify_quantum_recovery_y(
    state: &TwoQubitState,
    b: &Setting,
    quadrature_tol: f64,
) -> Result<RecoveryReport> {
    recovery(marginal_y(state, b), quadrature_tol)
}

fn recovery(marginal: f64, tol: f64) -> Result<RecoveryReport> {
    let q = integrate(
        |tau| intermediate_average(marginal, tau) * 0.5 * tau.sin(),
        &support_grid(threshold_angle(marginal)),
        tol,
    )?;
    Ok(RecoveryReport {
        integral: q.value,
        marginal,
        abs_diff: (q.value - marginal).abs(),
        quadrature_error: q.abs_error,
    })
}

/// `[0, pi]` split at the edges of the support `|tau - pi/2| <= xi`.
pub(crate) fn support_grid(xi: f64) -> Vec<f64> {
    tau_grid(vec![FRAC_PI_2 - xi, FRAC_PI_2 + xi])
}

pub(crate) fn intermediate_from_mean(mean: f64, tau: f64) -> f64 {
    intermediate_average(mean, tau)
}
