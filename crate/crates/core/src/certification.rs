//! Verdict logic: compare a measured or modeled `(p0, q0, T)` pair with the
//! Gaussian boundary and pick the witness with the best statistical
//! confidence.

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::gaussian_boundary::{
    boundary_cap, boundary_lambda, boundary_point, q0_threshold, solve_v_for_p0,
};
use crate::search::scan_then_refine;

/// Pairs violating the physical bounds by at most this much are clamped.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

/// Margins this close to zero are rounding noise of the boundary evaluation
/// and are reported as exactly zero.
pub const MARGIN_NOISE_FLOOR: f64 = 1e-14;

/// Detection scheme used to estimate `p0` and `q0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One detector behind a tunable attenuator; `p0` and `q0` are measured
    /// sequentially with half of the runs each.
    SingleApd,
    /// Beam splitter with a detector on each port; `p0` and `q0` come from
    /// the same runs.
    DoubleApd,
}

/// Variance of the witness estimate `q0 - lambda p0` after `n` runs.
///
/// Single scheme: `2/N [q0(1-q0) + lambda^2 p0(1-p0)]`.
/// Double scheme: `1/N [q0(1-q0) + lambda^2 p0(1-p0) - 2 lambda p0(1-q0)]`,
/// the last term being the multinomial covariance of the two estimates.
pub fn witness_variance(scheme: Scheme, p0: f64, q0: f64, lambda: f64, n: f64) -> f64 {
    let base = q0 * (1.0 - q0) + lambda * lambda * p0 * (1.0 - p0);
    match scheme {
        Scheme::SingleApd => 2.0 * base / n,
        Scheme::DoubleApd => (base - 2.0 * lambda * p0 * (1.0 - q0)) / n,
    }
}

/// Vacuum probabilities of a state and of its attenuated copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumPair {
    pub p0: f64,
    pub q0: f64,
    pub t: f64,
    /// Number of runs behind each estimated probability, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<u64>,
}

impl VacuumPair {
    /// Validates physicality `p0 <= q0 <= 1 - T(1 - p0)`, clamping violations
    /// up to [`PHYSICALITY_TOLERANCE`].
    pub fn new(p0: f64, q0: f64, t: f64) -> Result<Self> {
        check_open_unit("T", t)?;
        let nonphysical = || Error::NonphysicalPair { p0, q0, t };
        if !p0.is_finite() || !q0.is_finite() {
            return Err(nonphysical());
        }
        if p0 > 1.0 + PHYSICALITY_TOLERANCE || p0 <= 0.0 {
            return Err(nonphysical());
        }
        let p = p0.min(1.0);
        let upper = 1.0 - t * (1.0 - p);
        if q0 < p - PHYSICALITY_TOLERANCE || q0 > upper + PHYSICALITY_TOLERANCE {
            return Err(nonphysical());
        }
        Ok(Self {
            p0: p,
            q0: q0.clamp(p, upper),
            t,
            runs: None,
        })
    }

    pub fn with_runs(mut self, runs: u64) -> Self {
        self.runs = Some(runs);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// Witness `W = q0 - lambda p0` tangent to the boundary at variance `v`,
/// its value on the pair and its Gaussian cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub lambda: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "W_G")]
    pub w_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificationResult {
    pub verdict: Verdict,
    /// `q0 - q0_threshold(p0, T)`; certified iff positive.
    pub margin: f64,
    pub witness: Witness,
    /// Margin in standard deviations, available when the pair carries a run
    /// count (independent binomial estimates with that many runs each).
    pub significance: Option<f64>,
}

/// Witness chosen to maximize `(W - W_G) / sigma` for a given scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalWitness {
    pub lambda: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "W_G")]
    pub w_g: f64,
    pub significance: f64,
    /// False when no witness exceeds its Gaussian cap; `v` is then only the
    /// best effort.
    pub certified: bool,
}

/// Boundary `q0` at `p0`, extended by its limits at `p0 = 0` and `p0 = 1`.
pub(crate) fn threshold_with_limits(p0: f64, t: f64) -> Result<f64> {
    if p0 >= 1.0 {
        Ok(1.0)
    } else if p0 <= 0.0 {
        Ok(0.0)
    } else {
        q0_threshold(p0, t)
    }
}

/// Distance of `q0` above the Gaussian threshold, snapped to zero within
/// [`MARGIN_NOISE_FLOOR`].
pub fn certification_margin(p0: f64, q0: f64, t: f64) -> Result<f64> {
    check_open_unit("T", t)?;
    let margin = q0 - threshold_with_limits(p0, t)?;
    Ok(if margin.abs() <= MARGIN_NOISE_FLOOR {
        0.0
    } else {
        margin
    })
}

fn tangent_v(p0: f64, t: f64) -> Result<f64> {
    if p0 >= 1.0 {
        Ok(1.0)
    } else {
        solve_v_for_p0(p0, t)
    }
}

/// Certifies quantum non-Gaussianity of a physical vacuum pair.
pub fn certify(pair: &VacuumPair) -> Result<CertificationResult> {
    let VacuumPair { p0, q0, t, runs } = *pair;
    let margin = certification_margin(p0, q0, t)?;
    let v = tangent_v(p0, t)?;
    let b = boundary_point(v, t)?;
    let w = q0 - b.lambda * p0;
    let witness = Witness {
        lambda: b.lambda,
        v,
        w,
        w_g: b.w_g,
    };
    let significance = runs.and_then(|n| {
        let sigma = (witness_variance(Scheme::SingleApd, p0, q0, b.lambda, n as f64) / 2.0).sqrt();
        (sigma > 0.0).then(|| margin / sigma)
    });
    Ok(CertificationResult {
        verdict: if margin > 0.0 {
            Verdict::Certified
        } else {
            Verdict::NotCertified
        },
        margin,
        witness,
        significance,
    })
}

/// Candidate variances for the witness scan: geometric towards `V = 0` and
/// towards `V = 1`, where near-vacuum states put their optimum.
pub(crate) fn witness_scan_grid() -> Vec<f64> {
    const HALF: usize = 128;
    let mut grid = Vec::with_capacity(2 * HALF + 1);
    let (lo, hi) = (1e-6f64.ln(), 0.5f64.ln());
    for i in 0..HALF {
        grid.push((lo + (hi - lo) * i as f64 / HALF as f64).exp());
    }
    let (lo, hi) = (0.5f64.ln(), 1e-9f64.ln());
    for i in 0..HALF {
        grid.push(1.0 - (lo + (hi - lo) * i as f64 / (HALF - 1) as f64).exp());
    }
    grid.push(1.0);
    grid
}

/// Signed distance of the witness from its cap in units of the witness
/// standard deviation after `n` runs.
pub(crate) fn witness_significance(
    p0: f64,
    q0: f64,
    t: f64,
    v: f64,
    scheme: Scheme,
    n: f64,
) -> f64 {
    if !(v > 0.0 && v <= 1.0) {
        return f64::NEG_INFINITY;
    }
    let lambda = boundary_lambda(v, t);
    if !lambda.is_finite() {
        return f64::NEG_INFINITY;
    }
    let excess = q0 - lambda * p0 - boundary_cap(v, t);
    let var = witness_variance(scheme, p0, q0, lambda, n);
    if !var.is_finite() {
        // the slope is so steep that lambda^2 overflows; such witnesses are useless
        return f64::NEG_INFINITY;
    }
    if var > 0.0 {
        excess / var.sqrt()
    } else if excess.abs() <= MARGIN_NOISE_FLOOR {
        0.0
    } else {
        excess.signum() * f64::INFINITY
    }
}

/// Chooses the witness (equivalently the tangent variance `V`) maximizing
/// `(W - W_G) / sigma` with `sigma` the scheme's standard deviation after
/// `n` runs.
pub fn optimal_witness(pair: &VacuumPair, scheme: Scheme, n: u64) -> Result<OptimalWitness> {
    if n == 0 {
        return Err(Error::InvalidParams(
            "number of runs must be positive".into(),
        ));
    }
    let VacuumPair { p0, q0, t, .. } = *pair;
    let n = n as f64;
    let grid = witness_scan_grid();
    let (v, significance) =
        scan_then_refine(|v| witness_significance(p0, q0, t, v, scheme, n), &grid);
    let lambda = boundary_lambda(v, t);
    Ok(OptimalWitness {
        lambda,
        v,
        w: q0 - lambda * p0,
        w_g: boundary_cap(v, t),
        significance,
        certified: significance > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_sits_on_boundary() {
        let pair = VacuumPair::new(1.0, 1.0, 0.5).unwrap();
        let r = certify(&pair).unwrap();
        assert_eq!(r.verdict, Verdict::NotCertified);
        assert_eq!(r.margin, 0.0);
        assert_eq!(r.witness.v, 1.0);
    }

    #[test]
    fn vacuum_single_photon_mixture_certified() {
        let pair = VacuumPair::new(0.5, 0.75, 0.5).unwrap();
        let r = certify(&pair).unwrap();
        assert_eq!(r.verdict, Verdict::Certified);
        assert!(r.margin > 0.0);
        assert!(r.witness.w > r.witness.w_g);
        assert_abs_diff_eq!(r.witness.w - r.witness.w_g, r.margin, epsilon = 1e-12);
    }

    #[test]
    fn just_below_threshold_not_certified() {
        let thr = q0_threshold(0.5, 0.5).unwrap();
        let pair = VacuumPair::new(0.5, thr - 1e-6, 0.5).unwrap();
        let r = certify(&pair).unwrap();
        assert_eq!(r.verdict, Verdict::NotCertified);
        assert!(r.margin < 0.0);
    }

    #[test]
    fn nonphysical_pairs() {
        assert!(matches!(
            VacuumPair::new(0.5, 0.4, 0.5),
            Err(Error::NonphysicalPair { .. })
        ));
        assert!(matches!(
            VacuumPair::new(0.5, 0.8, 0.5),
            Err(Error::NonphysicalPair { .. })
        ));
        assert!(VacuumPair::new(0.0, 0.5, 0.5).is_err());
        // tiny excursions are clamped
        let p = VacuumPair::new(0.5, 0.75 + 5e-10, 0.5).unwrap();
        assert_eq!(p.q0, 0.75);
        let p = VacuumPair::new(1.0 + 1e-10, 1.0, 0.5).unwrap();
        assert_eq!(p.p0, 1.0);
    }

    #[test]
    fn significance_from_run_counts() {
        let pair = VacuumPair::new(0.5, 0.75, 0.5).unwrap().with_runs(10_000);
        let r = certify(&pair).unwrap();
        let lambda = r.witness.lambda;
        let sigma = ((0.75 * 0.25 + lambda * lambda * 0.25) / 10_000.0).sqrt();
        assert_abs_diff_eq!(r.significance.unwrap(), r.margin / sigma, epsilon = 1e-9);
    }

    #[test]
    fn variance_formulas() {
        let n = 1000.0;
        assert_abs_diff_eq!(
            witness_variance(Scheme::SingleApd, 0.5, 0.75, 1.0, n),
            2.0 / n * (0.75 * 0.25 + 0.25),
            epsilon = 1e-18
        );
        assert_abs_diff_eq!(
            witness_variance(Scheme::DoubleApd, 0.5, 0.75, 1.0, n),
            (0.1875 + 0.25 - 2.0 * 0.5 * 0.25) / n,
            epsilon = 1e-18
        );
    }

    #[test]
    fn boundary_pair_has_zero_significance_at_tangent() {
        let t = 0.5;
        let b = boundary_point(0.6, t).unwrap();
        let pair = VacuumPair::new(b.p0, b.q0, t).unwrap();
        let w = optimal_witness(&pair, Scheme::DoubleApd, 1_000_000).unwrap();
        assert!(w.significance.abs() < 1e-6, "{}", w.significance);
        assert!((w.v - 0.6).abs() < 1e-3, "{}", w.v);
        assert!(!w.certified || w.significance < 1e-6);
    }

    #[test]
    fn significance_scales_with_sqrt_runs() {
        let pair = VacuumPair::new(0.5, 0.74, 0.5).unwrap();
        for scheme in [Scheme::SingleApd, Scheme::DoubleApd] {
            let a = optimal_witness(&pair, scheme, 1_000).unwrap();
            let b = optimal_witness(&pair, scheme, 4_000).unwrap();
            assert!((b.significance / a.significance - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_runs_rejected() {
        let pair = VacuumPair::new(0.5, 0.74, 0.5).unwrap();
        assert!(optimal_witness(&pair, Scheme::SingleApd, 0).is_err());
    }
}
