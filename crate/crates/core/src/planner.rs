//! Experiment planning: runs needed by each scheme, the scheme ratio and the
//! optimal split of runs in the single-detector scheme.

use serde::{Deserialize, Serialize};

use crate::certification::{
    certification_margin, witness_scan_grid, witness_significance, Scheme, VacuumPair,
};
use crate::error::{check_open_unit, check_range, Error, Result};
use crate::gaussian_boundary::{boundary_lambda, boundary_one_minus_p0, boundary_one_minus_q0};
use crate::search::scan_then_refine;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Runs for a one-sigma witness violation in the single scheme.
    #[serde(rename = "N_S")]
    pub n_s: f64,
    #[serde(rename = "N_D")]
    pub n_d: f64,
    #[serde(rename = "lambda_S")]
    pub lambda_s: f64,
    #[serde(rename = "lambda_D")]
    pub lambda_d: f64,
    #[serde(rename = "V_S")]
    pub v_s: f64,
    #[serde(rename = "V_D")]
    pub v_d: f64,
    #[serde(rename = "R_DS")]
    pub r_ds: f64,
    #[serde(rename = "R_DS_min")]
    pub r_ds_min: f64,
    pub lambda0: f64,
    /// Optimal share of single-scheme runs spent on the attenuated setting.
    #[serde(rename = "K_opt_fraction")]
    pub k_opt_fraction: f64,
}

/// Edge at which the scheme ratio bound is taken as a limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RdsLimit {
    /// `p0 = 0`
    NoVacuum,
    /// `q0 = 1`
    SilentAfterLoss,
    /// Vacuum end of the Gaussian boundary, `V -> 1`.
    BoundaryVacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdsMin {
    pub value: f64,
    pub limit: Option<RdsLimit>,
}

fn runs_for(p0: f64, q0: f64, t: f64, v: f64, scheme: Scheme) -> f64 {
    let s = witness_significance(p0, q0, t, v, scheme, 1.0);
    if s > 0.0 {
        1.0 / (s * s)
    } else {
        f64::INFINITY
    }
}

/// Runs `N_S`, `N_D` needed for the witness to exceed its Gaussian cap by one
/// standard deviation, each minimized over the tangent witness family.
pub fn required_runs(pair: &VacuumPair) -> Result<PlanResult> {
    let VacuumPair { p0, q0, t, .. } = *pair;
    let margin = certification_margin(p0, q0, t)?;
    if margin <= 0.0 {
        return Err(Error::NotCertifiable(format!(
            "pair (p0 = {p0}, q0 = {q0}) at T = {t} has margin {margin:e}"
        )));
    }
    let grid = witness_scan_grid();
    let best =
        |scheme| scan_then_refine(|v| witness_significance(p0, q0, t, v, scheme, 1.0), &grid).0;
    let (vs, vd) = (best(Scheme::SingleApd), best(Scheme::DoubleApd));

    // Each scheme also tries the other's optimum, so that both minima are
    // taken over a common candidate set.
    let pick = |scheme| {
        let (a, b) = (
            runs_for(p0, q0, t, vs, scheme),
            runs_for(p0, q0, t, vd, scheme),
        );
        if a <= b {
            (a, vs)
        } else {
            (b, vd)
        }
    };
    let (n_s, v_s) = pick(Scheme::SingleApd);
    let (n_d, v_d) = pick(Scheme::DoubleApd);
    if !n_s.is_finite() || !n_d.is_finite() {
        return Err(Error::NotCertifiable(format!(
            "no witness separates (p0 = {p0}, q0 = {q0}) from the Gaussian set at T = {t}"
        )));
    }
    let lambda_s = boundary_lambda(v_s, t);
    let l0 = lambda0(p0, q0)?;
    Ok(PlanResult {
        n_s,
        n_d,
        lambda_s,
        lambda_d: boundary_lambda(v_d, t),
        v_s,
        v_d,
        r_ds: n_d / n_s,
        r_ds_min: rds_min(p0, q0)?.value,
        lambda0: l0,
        k_opt_fraction: k_fraction(lambda_s, l0),
    })
}

fn check_pair(p0: f64, q0: f64) -> Result<()> {
    check_range("p0", p0, 0.0, 1.0, "[0, 1]")?;
    check_range("q0", q0, 0.0, 1.0, "[0, 1]")?;
    if q0 < p0 {
        return Err(Error::InvalidParams(format!(
            "q0 = {q0} must not be below p0 = {p0}"
        )));
    }
    Ok(())
}

fn rds_from_ratio(ratio: f64) -> f64 {
    (0.5 * (1.0 - ratio.sqrt())).clamp(0.0, 0.5)
}

/// Lower bound on `N_D / N_S` over all witness slopes.
pub fn rds_min(p0: f64, q0: f64) -> Result<RdsMin> {
    check_pair(p0, q0)?;
    if p0 == 0.0 {
        return Ok(RdsMin {
            value: 0.5,
            limit: Some(RdsLimit::NoVacuum),
        });
    }
    if q0 == 1.0 {
        if p0 == 1.0 {
            return Err(Error::InvalidParams(
                "vacuum pair (1, 1) has no defined scheme ratio".into(),
            ));
        }
        return Ok(RdsMin {
            value: 0.5,
            limit: Some(RdsLimit::SilentAfterLoss),
        });
    }
    let ratio = p0 * (1.0 - q0) / (q0 * (1.0 - p0));
    Ok(RdsMin {
        value: rds_from_ratio(ratio),
        limit: None,
    })
}

/// [`rds_min`] evaluated on the Gaussian boundary point at variance `v`,
/// with the `V = 1` endpoint given by its limit `(1 - sqrt(T)) / 2`.
pub fn rds_min_on_boundary(v: f64, t: f64) -> Result<RdsMin> {
    check_open_unit("T", t)?;
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::OutOfRange {
            name: "V",
            value: v,
            domain: "(0, 1]",
        });
    }
    if v == 1.0 {
        return Ok(RdsMin {
            value: 0.5 * (1.0 - t.sqrt()),
            limit: Some(RdsLimit::BoundaryVacuum),
        });
    }
    // p0 / q0 through the tangent slope stays finite where q0 underflows
    let p_over_q = (v + 1.0) * t / ((t * v + 2.0 - t) * boundary_lambda(v, t));
    let ratio = p_over_q * boundary_one_minus_q0(v, t) / boundary_one_minus_p0(v, t);
    Ok(RdsMin {
        value: rds_from_ratio(ratio),
        limit: None,
    })
}

/// Slope at which the scheme ratio attains [`rds_min`].
pub fn lambda0(p0: f64, q0: f64) -> Result<f64> {
    check_pair(p0, q0)?;
    Ok((q0 * (1.0 - q0) / (p0 * (1.0 - p0))).sqrt())
}

fn k_fraction(lambda: f64, l0: f64) -> f64 {
    if l0.is_infinite() || (lambda == 0.0 && l0 == 0.0) {
        1.0
    } else {
        l0 / (lambda + l0)
    }
}

/// Variance-minimizing number of attenuated runs out of `n`, rounded and
/// kept inside `[1, n - 1]`.
pub fn k_opt(lambda: f64, p0: f64, q0: f64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidSplit { k: 1, n });
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda,
            domain: "[0, inf)",
        });
    }
    let k = (k_fraction(lambda, lambda0(p0, q0)?) * n as f64).round() as u64;
    Ok(k.clamp(1, n - 1))
}

/// Witness variance of the single scheme with `k` attenuated and `n - k`
/// open runs.
pub fn split_variance(lambda: f64, p0: f64, q0: f64, n: u64, k: u64) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::InvalidSplit { k, n });
    }
    Ok(q0 * (1.0 - q0) / k as f64 + lambda * lambda * p0 * (1.0 - p0) / (n - k) as f64)
}

/// [`split_variance`] at the continuous optimum of `k`.
pub fn optimal_split_variance(lambda: f64, p0: f64, q0: f64, n: f64) -> f64 {
    let s = (q0 * (1.0 - q0)).sqrt() + lambda * (p0 * (1.0 - p0)).sqrt();
    s * s / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certification::witness_variance;
    use crate::gaussian_boundary::boundary_point;
    use crate::state_models::{noisy_single_photon_vacuum_pair, NoisySinglePhotonModel};
    use approx::assert_abs_diff_eq;

    fn noisy_pair(eta: f64, nbar: f64, t: f64) -> VacuumPair {
        let (p0, q0) =
            noisy_single_photon_vacuum_pair(&NoisySinglePhotonModel::new(eta, nbar).unwrap(), t)
                .unwrap();
        VacuumPair::new(p0, q0, t).unwrap()
    }

    #[test]
    fn noisy_photon_plan() {
        let plan = required_runs(&noisy_pair(0.1, 1e-3, 0.5)).unwrap();
        assert!(plan.n_s.is_finite() && plan.n_d > 0.0);
        assert!(plan.n_s > 2.0 * plan.n_d);
        assert!(plan.r_ds_min <= plan.r_ds + 1e-12);
        assert!(plan.k_opt_fraction > 0.0 && plan.k_opt_fraction < 1.0);
    }

    #[test]
    fn runs_diverge_towards_boundary() {
        let t = 0.5;
        let b = boundary_point(0.7, t).unwrap();
        let mut last = 0.0;
        for gap in [2e-3, 1e-4, 1e-5, 1e-6] {
            let pair = VacuumPair::new(b.p0, b.q0 + gap, t).unwrap();
            let plan = required_runs(&pair).unwrap();
            assert!(plan.n_d > last);
            last = plan.n_d;
        }
        assert!(last > 1e6);
        let on = VacuumPair::new(b.p0, b.q0, t).unwrap();
        assert!(matches!(required_runs(&on), Err(Error::NotCertifiable(_))));
    }

    #[test]
    fn doubling_margin_quarters_runs() {
        // fixed witness and variances, excess doubled
        let (p, q, t, v) = (0.6, 0.9, 0.5, 0.8);
        let n1 = runs_for(p, q, t, v, Scheme::DoubleApd);
        let lambda = boundary_lambda(v, t);
        let excess = q - lambda * p - crate::gaussian_boundary::boundary_cap(v, t);
        let var = witness_variance(Scheme::DoubleApd, p, q, lambda, 1.0);
        assert_abs_diff_eq!(n1, var / (excess * excess), epsilon = 1e-9 * n1);
        assert_abs_diff_eq!(var / (2.0 * excess).powi(2), n1 / 4.0, epsilon = 1e-9 * n1);
    }

    #[test]
    fn rds_min_examples() {
        assert_eq!(rds_min(0.4, 0.4).unwrap().value, 0.0);
        let r = rds_min(0.3, 1.0).unwrap();
        assert_eq!((r.value, r.limit), (0.5, Some(RdsLimit::SilentAfterLoss)));
        assert_eq!(rds_min(0.0, 0.5).unwrap().limit, Some(RdsLimit::NoVacuum));
        assert!(rds_min(1.0, 1.0).is_err());
        assert!(rds_min(0.6, 0.5).is_err());
        let r = rds_min_on_boundary(1.0, 0.25).unwrap();
        assert_eq!(r.value, 0.25);
        for t in [0.25, 0.5, 0.75] {
            let r = rds_min_on_boundary(0.999, t).unwrap().value;
            assert!((r - 0.5 * (1.0 - f64::sqrt(t))).abs() < 1e-3);
        }
    }

    #[test]
    fn rds_min_attained_at_lambda0() {
        let (p, q) = (0.3, 0.7);
        let l0 = lambda0(p, q).unwrap();
        let ratio = |l: f64| {
            witness_variance(Scheme::DoubleApd, p, q, l, 1.0)
                / witness_variance(Scheme::SingleApd, p, q, l, 1.0)
        };
        let r = rds_min(p, q).unwrap().value;
        assert_abs_diff_eq!(ratio(l0), r, epsilon = 1e-14);
        for l in [0.5 * l0, 0.9 * l0, 1.1 * l0, 2.0 * l0] {
            assert!(ratio(l) > r);
        }
    }

    #[test]
    fn k_opt_examples() {
        let (p, q) = (0.5, 0.75);
        let l0 = lambda0(p, q).unwrap();
        assert_eq!(k_opt(l0, p, q, 1000).unwrap(), 500);
        assert_eq!(k_opt(0.0, p, q, 1000).unwrap(), 999);
        assert_eq!(k_opt(1e12, p, q, 1000).unwrap(), 1);
    }

    #[test]
    fn split_variance_examples() {
        let (p, q, n) = (0.5, 0.75, 1_000_000u64);
        let l0 = lambda0(p, q).unwrap();
        let best = (1..n)
            .map(|k| split_variance(l0, p, q, n, k).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(
            best,
            optimal_split_variance(l0, p, q, n as f64),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            split_variance(0.8, p, q, 1000, 500).unwrap(),
            witness_variance(Scheme::SingleApd, p, q, 0.8, 1000.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            split_variance(0.0, p, q, 1000, 300).unwrap(),
            0.1875 / 300.0
        );
        assert!(split_variance(1.0, p, q, 10, 10).is_err());
    }

    #[test]
    fn split_optimized_bound_coincides() {
        let (p, q) = (0.35, 0.8);
        let ratio = |l: f64| {
            witness_variance(Scheme::DoubleApd, p, q, l, 1.0) / optimal_split_variance(l, p, q, 1.0)
        };
        let best = (1..200_000)
            .map(|i| ratio(i as f64 * 1e-5))
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(best, rds_min(p, q).unwrap().value, epsilon = 1e-9);
    }
}
