//! Slow, direct reference computations for testing `qng-core`.
//!
//! Everything here is written from the plain closed-form vacuum
//! probabilities of pure single-mode Gaussian states and dense grid scans. No
//! code is shared with the library under test.

use std::f64::consts::FRAC_PI_2;

/// Vacuum probability of a pure Gaussian state squeezed along x with
/// variance `v` and displacement `(dx, dp)`.
pub fn p0(v: f64, dx: f64, dp: f64) -> f64 {
    2.0 * v.sqrt() / (v + 1.0) * (-(dx * dx) / (v + 1.0) - v * dp * dp / (v + 1.0)).exp()
}

/// Vacuum probability of the same state after loss to transmittance `t`.
pub fn q0(v: f64, dx: f64, dp: f64, t: f64) -> f64 {
    let a = t * v + 2.0 - t;
    let b = t + 2.0 * v - t * v;
    2.0 * v.sqrt() / (a * b).sqrt() * (-t * dx * dx / a - t * v * dp * dp / b).exp()
}

/// Optimal displacement for variance `v`, taken from the stationarity
/// condition of the constrained problem.
pub fn dx_opt_sq(v: f64, t: f64) -> f64 {
    (1.0 - v * v) / (2.0 * v) * (2.0 - t + t * v) / (2.0 * v - t * v + t)
}

pub fn boundary_p(v: f64, t: f64) -> f64 {
    p0(v, dx_opt_sq(v, t).sqrt(), 0.0)
}

pub fn boundary_q(v: f64, t: f64) -> f64 {
    q0(v, dx_opt_sq(v, t).sqrt(), 0.0, t)
}

/// Geometric grid of `n >= 2` points from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Golden-section maximization on `[a, b]`; returns `(x, f(x))`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid argmax followed by golden refinement between the neighbours.
fn grid_then_golden(f: impl Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let y = f(x);
        if y > best {
            best = y;
            best_i = i;
        }
    }
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let (x, y) = golden_max(&f, lo, hi, 80);
    if y > best {
        (x, y)
    } else {
        (grid[best_i], best)
    }
}

/// Squared displacement amplitude along direction `phi` (0 = along the
/// squeezed axis) that gives vacuum probability `p0_target`, if any.
fn displacement_sq(v: f64, phi: f64, p0_target: f64) -> Option<f64> {
    let prefactor = 2.0 * v.sqrt() / (v + 1.0);
    if prefactor < p0_target {
        return None;
    }
    let (c, s) = (phi.cos(), phi.sin());
    Some((prefactor / p0_target).ln() * (v + 1.0) / (c * c + v * s * s))
}

fn q0_on_constraint(v: f64, phi: f64, p0_target: f64, t: f64) -> f64 {
    match displacement_sq(v, phi, p0_target) {
        Some(r2) => {
            let r = r2.sqrt();
            q0(v, r * phi.cos(), r * phi.sin(), t)
        }
        None => f64::NEG_INFINITY,
    }
}

/// Largest `q0` over pure single-mode Gaussian states with vacuum
/// probability `p0_target`, displacement along the squeezed axis.
///
/// `V` runs over a 2000-point geometric grid on `[1e-4, 1]`; the displacement
/// is fixed by the constraint, then the best cell is refined.
pub fn max_q0_at_p0(p0_target: f64, t: f64) -> f64 {
    let grid = geometric_grid(1e-4, 1.0, 2000);
    grid_then_golden(|v| q0_on_constraint(v, 0.0, p0_target, t), &grid).1
}

/// Coarse scan over `V` and the displacement direction. Returns the best
/// `q0` and the direction angle in `[0, pi/2]` where it occurred.
pub fn max_q0_at_p0_any_direction(
    p0_target: f64,
    t: f64,
    v_points: usize,
    phi_points: usize,
) -> (f64, f64) {
    let grid = geometric_grid(1e-4, 1.0, v_points);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..phi_points {
        let phi = FRAC_PI_2 * j as f64 / (phi_points - 1) as f64;
        for &v in &grid {
            let q = q0_on_constraint(v, phi, p0_target, t);
            if q > best.0 {
                best = (q, phi);
            }
        }
    }
    best
}

/// Smallest boundary variance whose `p` reaches `target`, by bisection on
/// the increasing map `V -> boundary_p(V, t)`.
pub fn boundary_v_for_p(target: f64, t: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if boundary_p(mid, t) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest `q0^A q0^B` of a product of two modes, each on its optimal
/// single-mode family, with `p0^A p0^B = p0_target`.
pub fn max_two_mode_q0(p0_target: f64, t: f64, points: usize) -> f64 {
    let va_min = boundary_v_for_p(p0_target, t);
    let value = |va: f64| {
        let pa = boundary_p(va, t);
        let pb = p0_target / pa;
        if pb >= 1.0 {
            return boundary_q(va, t);
        }
        let vb = boundary_v_for_p(pb, t);
        boundary_q(va, t) * boundary_q(vb, t)
    };
    let mut grid = geometric_grid(va_min, 1.0, points);
    grid[points - 1] = 1.0;
    grid_then_golden(value, &grid).1
}

/// Witness data of the boundary tangent at variance `v`:
/// `(lambda, W_G)`.
pub fn tangent_witness(v: f64, t: f64) -> (f64, f64) {
    let (p, q) = (boundary_p(v, t), boundary_q(v, t));
    let lambda = (v + 1.0) * t / (t * v + 2.0 - t) * q / p;
    (lambda, q - lambda * p)
}

/// Per-run witness variance of the single (`double = false`) or double
/// scheme.
pub fn per_run_variance(p: f64, q: f64, lambda: f64, double: bool) -> f64 {
    if double {
        q * (1.0 - q) + lambda * lambda * p * (1.0 - p) - 2.0 * lambda * p * (1.0 - q)
    } else {
        2.0 * (q * (1.0 - q) + lambda * lambda * p * (1.0 - p))
    }
}

/// Runs needed for a one-sigma violation, minimized over the tangent
/// witnesses on a dense variance grid with golden refinement. Returns
/// `(N, V)`.
pub fn min_runs_scan(p: f64, q: f64, t: f64, double: bool, points: usize) -> (f64, f64) {
    let mut grid = geometric_grid(1e-6, 0.5, points / 2);
    grid.extend(
        geometric_grid(0.5, 1e-9, points - points / 2)
            .into_iter()
            .map(|x| 1.0 - x),
    );
    // maximize the significance, the reciprocal square root of N
    let significance = |v: f64| {
        let (lambda, w_g) = tangent_witness(v, t);
        let var = per_run_variance(p, q, lambda, double);
        if !var.is_finite() || var <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (q - lambda * p - w_g) / var.sqrt()
    };
    let (v, s) = grid_then_golden(significance, &grid);
    if s > 0.0 {
        (1.0 / (s * s), v)
    } else {
        (f64::INFINITY, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_state_loss() {
        assert!((q0(1.0, 1.0, 0.0, 0.5) - (-0.25f64).exp()).abs() < 1e-15);
        assert!((p0(0.5, 0.0, 0.0) - 2.0 * 0.5f64.sqrt() / 1.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_is_the_constrained_maximum() {
        let (p, t) = (0.5, 0.5);
        let best = max_q0_at_p0(p, t);
        let v = boundary_v_for_p(p, t);
        assert!((best - boundary_q(v, t)).abs() < 1e-9);
        let (any, phi) = max_q0_at_p0_any_direction(p, t, 400, 9);
        assert_eq!(phi, 0.0);
        assert!(any <= best + 1e-12);
    }

    #[test]
    fn two_mode_product_does_not_help() {
        let (p, t) = (0.4, 0.3);
        let single = boundary_q(boundary_v_for_p(p, t), t);
        let two = max_two_mode_q0(p, t, 400);
        assert!(two <= single + 1e-9);
        assert!(two >= single - 1e-9);
    }
}
