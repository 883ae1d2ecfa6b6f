//! Photon-number distributions, the lossy-channel vacuum functional and
//! photon-number moments.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Normalization tolerance on `sum(probs) + tail_bound`.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Omitted-mass target used by every truncating factory.
pub const TAIL_TARGET: f64 = 1e-12;

/// Above this photon number binomial coefficients are evaluated in log space.
const DIRECT_BINOMIAL_MAX: usize = 50;

/// Truncated photon-number distribution `p_n`, `n = 0..=n_max`.
///
/// `tail_bound` is a guaranteed upper bound on the probability mass beyond
/// `n_max` that the vector does not carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
    tail_bound: f64,
}

/// Mean photon number together with the truncation error bound
/// `n_max * tail_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanPhoton {
    pub value: f64,
    pub error_bound: f64,
}

impl PhotonNumberDistribution {
    pub fn new(probs: Vec<f64>, tail_bound: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution(
                "empty probability vector".into(),
            ));
        }
        if let Some((n, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!("p[{n}] = {p}")));
        }
        if !tail_bound.is_finite() || tail_bound < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "tail bound {tail_bound} must be finite and nonnegative"
            )));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_bound;
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "sum(probs) + tail_bound = {total}, expected 1"
            )));
        }
        Ok(Self { probs, tail_bound })
    }

    /// Finite distribution with no omitted mass.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs, 0.0)
    }

    pub fn vacuum() -> Self {
        Self {
            probs: vec![1.0],
            tail_bound: 0.0,
        }
    }

    /// Fock state `|n><n|`.
    pub fn fock(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        Self {
            probs,
            tail_bound: 0.0,
        }
    }

    /// Poisson statistics of mean `mean` (coherent or Poissonian noise light),
    /// truncated once the omitted mass is provably below [`TAIL_TARGET`].
    pub fn poisson(mean: f64) -> Result<Self> {
        if !mean.is_finite() || mean < 0.0 {
            return Err(Error::InvalidParams(format!(
                "Poisson mean must be finite and nonnegative, got {mean}"
            )));
        }
        if mean == 0.0 {
            return Ok(Self::vacuum());
        }
        let ln_mean = mean.ln();
        let mut ln_fact = 0.0;
        let mut probs = vec![(-mean).exp()];
        let mut n = 0usize;
        loop {
            n += 1;
            ln_fact += (n as f64).ln();
            probs.push((-mean + n as f64 * ln_mean - ln_fact).exp());
            // P(N > n) <= p_{n+1} / (1 - mean / (n + 2)) once n + 2 > mean
            if (n + 2) as f64 > 2.0 * mean {
                let next =
                    (-mean + (n + 1) as f64 * ln_mean - ln_fact - ((n + 1) as f64).ln()).exp();
                let bound = next / (1.0 - mean / (n + 2) as f64);
                if bound < TAIL_TARGET {
                    return Ok(Self {
                        probs,
                        tail_bound: bound,
                    });
                }
            }
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Vacuum probability `p_0`.
    pub fn p0(&self) -> f64 {
        self.probs[0]
    }

    /// Photon-number distribution of two independent modes detected together
    /// (tensor product of states, convolution of statistics).
    pub fn convolve(&self, other: &Self) -> Self {
        let mut probs = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, a) in self.probs.iter().enumerate() {
            for (j, b) in other.probs.iter().enumerate() {
                probs[i + j] += a * b;
            }
        }
        Self {
            probs,
            tail_bound: self.tail_bound + other.tail_bound,
        }
    }

    /// Second moment `sum n^2 p_n` over the retained entries.
    pub fn second_moment(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n) as f64 * p)
            .sum()
    }
}

fn check_transmittance(t: f64) -> Result<()> {
    check_range("T", t, 0.0, 1.0, "[0, 1]")
}

/// Probability of vacuum after a lossy channel of transmittance `t`:
/// `q0(T) = sum_n p_n (1 - T)^n`.
pub fn vacuum_after_loss(dist: &PhotonNumberDistribution, t: f64) -> Result<f64> {
    check_transmittance(t)?;
    let x = 1.0 - t;
    // Horner
    Ok(dist.probs.iter().rev().fold(0.0, |acc, p| acc * x + p))
}

/// Mean photon number `sum_n n p_n`.
pub fn mean_photon(dist: &PhotonNumberDistribution) -> MeanPhoton {
    let value = dist
        .probs
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum();
    MeanPhoton {
        value,
        error_bound: dist.n_max() as f64 * dist.tail_bound,
    }
}

/// Binomial loss map: every photon survives independently with probability
/// `t`, `p'_m = sum_{n>=m} C(n, m) T^m (1 - T)^(n - m) p_n`.
pub fn attenuate(dist: &PhotonNumberDistribution, t: f64) -> Result<PhotonNumberDistribution> {
    check_transmittance(t)?;
    let n_max = dist.n_max();
    let mut out = vec![0.0; n_max + 1];
    if t == 1.0 {
        return Ok(dist.clone());
    }
    if t == 0.0 {
        out[0] = dist.probs.iter().sum();
        return Ok(PhotonNumberDistribution {
            probs: out,
            tail_bound: dist.tail_bound,
        });
    }

    let ln_t = t.ln();
    let ln_r = (1.0 - t).ln();
    let ln_fact = ln_factorials(n_max);
    for (n, &pn) in dist.probs.iter().enumerate() {
        if pn == 0.0 {
            continue;
        }
        if n <= DIRECT_BINOMIAL_MAX {
            let mut coeff = 1.0;
            for (m, slot) in out.iter_mut().enumerate().take(n + 1) {
                *slot += pn * coeff * t.powi(m as i32) * (1.0 - t).powi((n - m) as i32);
                coeff = coeff * (n - m) as f64 / (m + 1) as f64;
            }
        } else {
            for (m, slot) in out.iter_mut().enumerate().take(n + 1) {
                let ln_c = ln_fact[n] - ln_fact[m] - ln_fact[n - m];
                *slot += pn * (ln_c + m as f64 * ln_t + (n - m) as f64 * ln_r).exp();
            }
        }
    }
    Ok(PhotonNumberDistribution {
        probs: out,
        tail_bound: dist.tail_bound,
    })
}

fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn poisson_closed_form(mean: f64, n: usize) -> f64 {
        let mut p = (-mean).exp();
        for k in 1..=n {
            p *= mean / k as f64;
        }
        p
    }

    #[test]
    fn vacuum_is_loss_invariant() {
        let d = PhotonNumberDistribution::vacuum();
        assert_eq!(vacuum_after_loss(&d, 0.7).unwrap(), 1.0);
    }

    #[test]
    fn single_photon_gives_one_minus_t() {
        let d = PhotonNumberDistribution::fock(1);
        assert_abs_diff_eq!(vacuum_after_loss(&d, 0.3).unwrap(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn poisson_vacuum_after_loss() {
        let d = PhotonNumberDistribution::poisson(0.5).unwrap();
        assert!(d.tail_bound() <= TAIL_TARGET);
        // oracle: direct truncated summation
        let direct: f64 = (0..60)
            .map(|n| poisson_closed_form(0.5, n) * 0.5f64.powi(n as i32))
            .sum();
        let got = vacuum_after_loss(&d, 0.5).unwrap();
        assert_abs_diff_eq!(got, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(got, (-0.25f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(got, 0.7788, epsilon = 1e-4);
    }

    #[test]
    fn poisson_factory_normalized_for_large_mean() {
        let d = PhotonNumberDistribution::poisson(40.0).unwrap();
        let total: f64 = d.probs().iter().sum();
        assert!((total + d.tail_bound() - 1.0).abs() < 1e-12);
        assert!(d.tail_bound() <= TAIL_TARGET);
    }

    #[test]
    fn mean_photon_examples() {
        assert_eq!(mean_photon(&PhotonNumberDistribution::vacuum()).value, 0.0);
        let half = PhotonNumberDistribution::from_probs(vec![0.5, 0.5]).unwrap();
        assert_eq!(mean_photon(&half).value, 0.5);
        let pois = PhotonNumberDistribution::poisson(0.3).unwrap();
        let m = mean_photon(&pois);
        assert_abs_diff_eq!(m.value, 0.3, epsilon = 1e-10);
        assert!(m.error_bound <= pois.n_max() as f64 * 1e-12);
    }

    #[test]
    fn attenuate_identity_and_bernoulli() {
        let d = PhotonNumberDistribution::poisson(1.3).unwrap();
        assert_eq!(attenuate(&d, 1.0).unwrap(), d);
        let one = attenuate(&PhotonNumberDistribution::fock(1), 0.4).unwrap();
        assert_abs_diff_eq!(one.probs()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(one.probs()[1], 0.4, epsilon = 1e-15);
    }

    #[test]
    fn attenuate_thins_poisson() {
        let d = PhotonNumberDistribution::poisson(0.5).unwrap();
        let thinned = attenuate(&d, 0.5).unwrap();
        for (n, p) in thinned.probs().iter().enumerate() {
            assert_abs_diff_eq!(*p, poisson_closed_form(0.25, n), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(
            thinned.probs()[0],
            vacuum_after_loss(&d, 0.5).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn attenuate_uses_log_binomials_above_cutoff() {
        // mean 30 puts mass well above n = 50
        let d = PhotonNumberDistribution::poisson(30.0).unwrap();
        assert!(d.n_max() > DIRECT_BINOMIAL_MAX);
        let thinned = attenuate(&d, 0.3).unwrap();
        for n in [0usize, 5, 9, 20] {
            assert_abs_diff_eq!(
                thinned.probs()[n],
                poisson_closed_form(9.0, n),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            PhotonNumberDistribution::from_probs(vec![0.5, 0.4]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(PhotonNumberDistribution::from_probs(vec![1.2, -0.2]).is_err());
        assert!(PhotonNumberDistribution::from_probs(vec![]).is_err());
        let d = PhotonNumberDistribution::vacuum();
        assert!(matches!(
            vacuum_after_loss(&d, 1.5),
            Err(Error::OutOfRange { name: "T", .. })
        ));
        assert!(attenuate(&d, -0.1).is_err());
        assert!(vacuum_after_loss(&d, f64::NAN).is_err());
    }

    #[test]
    fn convolution_adds_means() {
        let a = PhotonNumberDistribution::from_probs(vec![0.8, 0.2]).unwrap();
        let b = PhotonNumberDistribution::poisson(0.3).unwrap();
        let c = a.convolve(&b);
        assert_abs_diff_eq!(mean_photon(&c).value, 0.5, epsilon = 1e-10);
    }
}
