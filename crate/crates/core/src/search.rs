//! Scalar search routines shared by the boundary solver and the witness
//! optimizer.

/// Finds `x` in `[lo, hi]` with `f(x) = target` for nondecreasing `f`.
///
/// Requires `f(lo) <= target <= f(hi)`. Iterates until the bracket can no
/// longer shrink in floating point, so the residual is limited only by the
/// conditioning of `f`.
pub(crate) fn bisect_increasing(
    f: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller residual
    if (f(lo) - target).abs() <= (f(hi) - target).abs() {
        lo
    } else {
        hi
    }
}

/// Bisection on a monotone predicate: returns the smallest `x` in `[lo, hi]`
/// (to within `tol`) for which `pred(x)` holds, assuming `pred(hi)` holds and
/// `pred(lo)` does not.
pub(crate) fn bisect_predicate(
    pred: impl Fn(f64) -> bool,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Returns `(x_max, f_max)`.
pub(crate) fn golden_section_maximize(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    max_evals: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;

    while evals < max_evals && (b - a) > 1e-15 * (a.abs() + b.abs()).max(1e-300) {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        evals += 1;
    }

    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximizes `f` over a sorted grid, then refines with golden-section search
/// between the neighbours of the best grid point. `f` may return
/// `NEG_INFINITY` where it is undefined.
pub(crate) fn scan_then_refine(f: impl Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    debug_assert!(grid.len() >= 3);
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] || values[best].is_nan() {
            best = i;
        }
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (x, fx) = golden_section_maximize(&f, lo, hi, 200);
    if fx >= values[best] {
        (x, fx)
    } else {
        (grid[best], values[best])
    }
}
