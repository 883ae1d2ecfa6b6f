//! Vacuum probabilities of pure single-mode Gaussian states and the boundary
//! of the set of `(p0, q0)` pairs reachable by Gaussian states and their
//! mixtures.
//!
//! Conventions: quadratures are normalized so that vacuum has unit variance.
//! A pure state has covariance `diag(V, 1/V)` and displacement `(dx, dp)`;
//! the coherent amplitude is `alpha = (dx + i dp) / sqrt(2)`.
//!
//! The maximum of `q0(T)` over Gaussian states at fixed `p0` is reached by
//! amplitude-squeezed coherent states (`V <= 1`, `dp = 0`, `dx = dx_opt(V, T)`)
//! and traces a curve parameterized by `V` in `(0, 1]`. Along that curve the
//! witness `W = q0 - lambda p0` has Gaussian cap `W_G`.

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, check_range, Error, Result};
use crate::search::bisect_increasing;

/// Lower end of the variance bracket used when inverting `p0(V, T)`.
pub const V_BRACKET_MIN: f64 = 1e-9;

/// Approximate test is only meaningful when `1 - p0` is below this.
pub const APPROX_VALIDITY: f64 = 0.1;

/// Pure single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianStateParams {
    /// Normalized quadrature variance of x (1 for vacuum and coherent states).
    pub v: f64,
    pub dx: f64,
    pub dp: f64,
}

impl GaussianStateParams {
    pub fn new(v: f64, dx: f64, dp: f64) -> Result<Self> {
        let s = Self { v, dx, dp };
        s.validate()?;
        Ok(s)
    }

    pub fn squeezed_vacuum(v: f64) -> Result<Self> {
        Self::new(v, 0.0, 0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "variance V must be positive and finite, got {}",
                self.v
            )));
        }
        if !self.dx.is_finite() || !self.dp.is_finite() {
            return Err(Error::InvalidParams("displacement must be finite".into()));
        }
        Ok(())
    }
}

/// A point on the Gaussian boundary together with its tangent witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub v: f64,
    pub t: f64,
    pub p0: f64,
    pub q0: f64,
    /// Witness slope making the boundary tangent at this point.
    pub lambda: f64,
    /// Maximum of `q0 - lambda p0` over Gaussian states and mixtures.
    pub w_g: f64,
}

/// Result of the closed-form approximate test, valid only close to vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxTest {
    pub passes: bool,
    /// `1 - p0 < 0.1`; outside this regime the answer should not be trusted.
    pub in_validity_regime: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Vacuum probability of a pure Gaussian state, `pi Q(0)`.
pub fn p0_gaussian(s: &GaussianStateParams) -> Result<f64> {
    s.validate()?;
    let GaussianStateParams { v, dx, dp } = *s;
    Ok(2.0 * v.sqrt() / (v + 1.0) * (-(dx * dx) / (v + 1.0) - v * dp * dp / (v + 1.0)).exp())
}

/// Vacuum probability after a lossy channel of transmittance `t` in `(0, 1)`.
pub fn q0_gaussian(s: &GaussianStateParams, t: f64) -> Result<f64> {
    s.validate()?;
    check_open_unit("T", t)?;
    let GaussianStateParams { v, dx, dp } = *s;
    let a = t * v + 2.0 - t;
    let b = t + 2.0 * v - t * v;
    Ok(2.0 * v.sqrt() / (a * b).sqrt() * (-t * dx * dx / a - t * v * dp * dp / b).exp())
}

fn check_boundary_v(v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "boundary variance must lie in (0, 1], got {v}"
        )));
    }
    Ok(())
}

/// Optimal x displacement of the amplitude-squeezed coherent state with
/// variance `v` that maximizes `q0(T)` at fixed `p0`.
pub fn dx_opt(v: f64, t: f64) -> Result<f64> {
    check_boundary_v(v)?;
    check_open_unit("T", t)?;
    Ok(dx_opt_sq(v, t).sqrt())
}

fn dx_opt_sq(v: f64, t: f64) -> f64 {
    (1.0 - v * v) / (2.0 * v) * (2.0 - t + t * v) / (2.0 * v - t * v + t)
}

// The prefactors are written as ln(1 - small) so that points close to vacuum
// keep full relative accuracy in 1 - p0 and 1 - q0.
fn ln_boundary_p0(v: f64, t: f64) -> f64 {
    let x = 1.0 - v;
    let one_minus_root = x / (1.0 + v.sqrt());
    (-(one_minus_root * one_minus_root) / (1.0 + v)).ln_1p()
        - x * (2.0 - t + t * v) / (2.0 * v * (2.0 * v - t * v + t))
}

fn ln_boundary_q0(v: f64, t: f64) -> f64 {
    let x = 1.0 - v;
    let ab = (t * v + 2.0 - t) * (t + 2.0 * v - t * v);
    0.5 * (-t * (2.0 - t) * x * x / ab).ln_1p()
        - t * x * (1.0 + v) / (2.0 * v * (2.0 * v - t * v + t))
}

pub(crate) fn boundary_p0(v: f64, t: f64) -> f64 {
    ln_boundary_p0(v, t).exp()
}

pub(crate) fn boundary_q0(v: f64, t: f64) -> f64 {
    ln_boundary_q0(v, t).exp()
}

pub(crate) fn boundary_one_minus_p0(v: f64, t: f64) -> f64 {
    -ln_boundary_p0(v, t).exp_m1()
}

pub(crate) fn boundary_one_minus_q0(v: f64, t: f64) -> f64 {
    -ln_boundary_q0(v, t).exp_m1()
}

/// Witness slope `lambda(V, T)` of the boundary tangent at `V`.
pub(crate) fn boundary_lambda(v: f64, t: f64) -> f64 {
    // 2 - T(1 - V) is exact at V = 1, unlike TV + 2 - T
    (v + 1.0) * t / (2.0 - t * (1.0 - v)) * (ln_boundary_q0(v, t) - ln_boundary_p0(v, t)).exp()
}

/// Gaussian cap `W_G(V, T)` of the witness with slope `lambda(V, T)`.
pub(crate) fn boundary_cap(v: f64, t: f64) -> f64 {
    2.0 * (1.0 - t) / (2.0 - t * (1.0 - v)) * boundary_q0(v, t)
}

/// Boundary point and tangent witness at variance `v` in `(0, 1]`.
pub fn boundary_point(v: f64, t: f64) -> Result<BoundaryPoint> {
    check_boundary_v(v)?;
    check_open_unit("T", t)?;
    Ok(BoundaryPoint {
        v,
        t,
        p0: boundary_p0(v, t),
        q0: boundary_q0(v, t),
        lambda: boundary_lambda(v, t),
        w_g: boundary_cap(v, t),
    })
}

/// Inverts the strictly increasing map `V -> p0(V, T)` on the boundary.
pub fn solve_v_for_p0(p0_target: f64, t: f64) -> Result<f64> {
    check_open_unit("T", t)?;
    if !(p0_target > 0.0 && p0_target < 1.0) {
        return Err(Error::NoSolution(format!(
            "boundary p0 must lie in (0, 1), got {p0_target}"
        )));
    }
    Ok(bisect_increasing(
        |v| boundary_p0(v, t),
        p0_target,
        V_BRACKET_MIN,
        1.0,
    ))
}

/// Largest `q0(T)` reachable by Gaussian states and their mixtures at the
/// given `p0`. Measured pairs above it are quantum non-Gaussian.
pub fn q0_threshold(p0: f64, t: f64) -> Result<f64> {
    let v = solve_v_for_p0(p0, t)?;
    Ok(boundary_q0(v, t))
}

/// Range of `q0(T)` allowed for any physical state with vacuum probability
/// `p0`: `[p0, 1 - T(1 - p0)]`.
pub fn physical_bounds(p0: f64, t: f64) -> Result<(f64, f64)> {
    check_range("p0", p0, 0.0, 1.0, "[0, 1]")?;
    check_open_unit("T", t)?;
    Ok((p0, 1.0 - t * (1.0 - p0)))
}

fn boundary_p0_no_loss(v: f64) -> f64 {
    2.0 * v.sqrt() / (v + 1.0) * (-(1.0 - v) / (2.0 * v * v)).exp()
}

fn mean_photon_threshold(v: f64) -> f64 {
    (1.0 - v) * (1.0 + 2.0 * v - v * v) / (4.0 * v * v)
}

/// Parametric threshold of the `(p0, mean photon number)` criterion:
/// returns `(p0(V, 0), nbar_th(V))`. A state with `nbar < nbar_th` at that
/// `p0` is quantum non-Gaussian.
pub fn nbar_threshold_parametric(v: f64) -> Result<(f64, f64)> {
    check_boundary_v(v)?;
    Ok((boundary_p0_no_loss(v), mean_photon_threshold(v)))
}

/// Mean-photon-number threshold as a function of `p0` in `(0, 1)`.
pub fn nbar_threshold(p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::NoSolution(format!(
            "p0 must lie in (0, 1), got {p0}"
        )));
    }
    let v = bisect_increasing(boundary_p0_no_loss, p0, V_BRACKET_MIN, 1.0);
    Ok(mean_photon_threshold(v))
}

/// Closed-form approximate test, obtained by expanding the boundary around
/// `V = 1`. Advisory only; the exact parametric threshold is authoritative.
pub fn approx_qng_test(p0: f64, q0: f64, t: f64) -> Result<ApproxTest> {
    check_open_unit("T", t)?;
    let lhs = (1.0 - q0).powi(3);
    let rhs = approx_coefficient(t) * (1.0 - t - q0 + t * p0);
    Ok(ApproxTest {
        passes: lhs > rhs,
        in_validity_regime: 1.0 - p0 < APPROX_VALIDITY,
        lhs,
        rhs,
    })
}

fn approx_coefficient(t: f64) -> f64 {
    3.0 * t * t / (2.0 * (1.0 - t) * (2.0 - t))
}

/// Deviation `Delta = 1 - T(1 - p0) - q0` from the physical upper bound at
/// which the approximate test switches, i.e. the smallest root of
/// `c Delta = (T(1 - p0) + Delta)^3`. Returns `None` when no root exists
/// (far outside the validity regime).
pub fn approx_delta_threshold(p0: f64, t: f64) -> Option<f64> {
    let c = approx_coefficient(t);
    let a = t * (1.0 - p0);
    // g(d) = c d - (a + d)^3 is concave; its maximum sits at d* = sqrt(c/3) - a
    let d_peak = (c / 3.0).sqrt() - a;
    let g = |d: f64| c * d - (a + d).powi(3);
    if d_peak < 0.0 || g(d_peak) < 0.0 {
        return None;
    }
    if a == 0.0 {
        return Some(0.0);
    }
    Some(bisect_increasing(g, 0.0, 0.0, d_peak))
}

/// Compares a squeezed vacuum of variance `V + K eps` (with `K = -2V/(1-V)`
/// chosen to preserve `p0` to first order) against the squeezed coherent state
/// of variance `V` and displacement `dx^2 = eps`.
///
/// Returns `(Delta p0, Delta q0)` = squeezed vacuum minus displaced state.
/// `Delta p0` is second order in `eps` and `Delta q0 < 0`, so squeezed vacua
/// never maximize `q0` at fixed `p0`.
pub fn appendix_a_perturbation_check(v: f64, t: f64, eps: f64) -> Result<(f64, f64)> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParams(format!(
            "V must lie in (0, 1), got {v}"
        )));
    }
    check_open_unit("T", t)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParams(format!("eps must be >= 0, got {eps}")));
    }
    let k = -2.0 * v / (1.0 - v);
    let v_sv = v + k * eps;
    if v_sv <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "eps = {eps} too large: squeezed-vacuum variance {v_sv} <= 0"
        )));
    }
    let sv = GaussianStateParams::squeezed_vacuum(v_sv)?;
    let displaced = GaussianStateParams::new(v, eps.sqrt(), 0.0)?;
    Ok((
        p0_gaussian(&sv)? - p0_gaussian(&displaced)?,
        q0_gaussian(&sv, t)? - q0_gaussian(&displaced, t)?,
    ))
}

/// Leading-order prediction for `Delta q0` of
/// [`appendix_a_perturbation_check`].
pub fn appendix_a_leading_term(v: f64, t: f64, eps: f64) -> f64 {
    -4.0 * (1.0 - t) * t * v.sqrt() * eps / ((2.0 - t + t * v) * (2.0 * v + t - t * v)).powf(1.5)
}

/// Polynomial whose roots in `(0, 1]` would be the only interior extremum
/// candidates of the two-mode witness other than `V_A = V_B`.
pub fn appendix_b_polynomial(v: f64, t: f64) -> f64 {
    let u = 2.0 - t;
    -u * u * v.powi(4) - 2.0 * (1.0 - t) * t * v.powi(3)
        + 2.0 * u * (t + 1.0) * v * v
        + 2.0 * (4.0 - (3.0 - t) * t) * v
        + u * t
}
