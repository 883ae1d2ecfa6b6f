//! Monte Carlo simulation of the single-detector and double-detector
//! schemes, and witness estimation from their click records.
//!
//! Runs are grouped into fixed blocks of [`BLOCK_RUNS`]. Block `b` draws from
//! its own ChaCha stream derived from `(seed, b)`, so a tally depends only on
//! the inputs and the seed, never on how many threads processed the blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::certification::{witness_variance, Scheme};
use crate::error::{check_open_unit, Error, Result};
use crate::exec::Exec;
use crate::photon_stats::{vacuum_after_loss, PhotonNumberDistribution};

/// Runs per independently seeded block.
pub const BLOCK_RUNS: u64 = 1 << 20;

/// Largest accepted number of runs.
pub const MAX_RUNS: u64 = 1_000_000_000_000;

/// Beam-splitter transmittance and detector efficiencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub t: f64,
    pub eta_a: f64,
    pub eta_b: f64,
}

impl DetectorConfig {
    pub fn new(t: f64, eta_a: f64, eta_b: f64) -> Result<Self> {
        check_open_unit("T", t)?;
        for (name, eta) in [("eta_A", eta_a), ("eta_B", eta_b)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::OutOfRange {
                    name,
                    value: eta,
                    domain: "(0, 1]",
                });
            }
        }
        Ok(Self { t, eta_a, eta_b })
    }

    pub fn ideal(t: f64) -> Result<Self> {
        Self::new(t, 1.0, 1.0)
    }

    /// Splitting ratio seen by the detectors,
    /// `eta_A T / (eta_A T + eta_B (1 - T))`.
    pub fn effective_splitting(&self) -> f64 {
        let a = self.eta_a * self.t;
        a / (a + self.eta_b * (1.0 - self.t))
    }

    /// Fraction of the signal detected by either detector.
    pub fn total_efficiency(&self) -> f64 {
        self.eta_a * self.t + self.eta_b * (1.0 - self.t)
    }
}

/// Counts of the three mutually exclusive outcomes of the double scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickTally {
    pub n_none: u64,
    pub n_b_only: u64,
    /// Detector A clicked, whatever detector B did.
    pub n_a: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
}

impl ClickTally {
    /// `(p0_hat, q0_hat)`: no click at all, and no click on detector A.
    pub fn estimates(&self) -> (f64, f64) {
        let n = self.n as f64;
        (
            self.n_none as f64 / n,
            (self.n_none + self.n_b_only) as f64 / n,
        )
    }
}

/// No-click counts of the single-detector scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleTally {
    /// No-clicks among the `k` runs with the attenuator at `T`.
    pub k0_full: u64,
    /// No-clicks among the `n - k` runs with the attenuator open.
    pub k0_open: u64,
    #[serde(rename = "K")]
    pub k: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
}

impl SingleTally {
    pub fn estimates(&self) -> (f64, f64) {
        (
            self.k0_open as f64 / (self.n - self.k) as f64,
            self.k0_full as f64 / self.k as f64,
        )
    }
}

/// Click record of either scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Observation {
    Single(SingleTally),
    Double(ClickTally),
}

/// Witness estimate from click counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessEstimate {
    pub p0_hat: f64,
    pub q0_hat: f64,
    pub w_hat: f64,
    /// Plug-in variance; `None` when the counts cannot define it.
    pub var_hat: Option<f64>,
}

/// Probabilities `(P_none, P_B_only, P_A)` of the double scheme.
pub fn event_probabilities(
    dist: &PhotonNumberDistribution,
    cfg: &DetectorConfig,
) -> Result<(f64, f64, f64)> {
    let cfg = DetectorConfig::new(cfg.t, cfg.eta_a, cfg.eta_b)?;
    let none = vacuum_after_loss(dist, cfg.total_efficiency().min(1.0))?;
    let a_silent = vacuum_after_loss(dist, cfg.eta_a * cfg.t)?;
    let b_only = (a_silent - none).max(0.0);
    Ok((none, b_only, (1.0 - a_silent).max(0.0)))
}

fn block_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn binomial(rng: &mut ChaCha8Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p)
            .expect("probability checked to lie in (0, 1)")
            .sample(rng)
    }
}

/// Multinomial draw over three outcomes by sequential conditional binomials.
fn multinomial3(rng: &mut ChaCha8Rng, n: u64, probs: (f64, f64, f64)) -> (u64, u64, u64) {
    let first = binomial(rng, n, probs.0);
    let rest = 1.0 - probs.0;
    let second = if rest > 0.0 {
        binomial(rng, n - first, (probs.1 / rest).min(1.0))
    } else {
        0
    };
    (first, second, n - first - second)
}

fn check_runs(n: u64) -> Result<()> {
    if n == 0 || n > MAX_RUNS {
        return Err(Error::InvalidParams(format!(
            "number of runs must lie in [1, {MAX_RUNS}], got {n}"
        )));
    }
    Ok(())
}

fn blocks(n: u64) -> Vec<(u64, u64)> {
    let count = n.div_ceil(BLOCK_RUNS);
    (0..count)
        .map(|b| (b, (n - b * BLOCK_RUNS).min(BLOCK_RUNS)))
        .collect()
}

/// Simulates `n` runs of the double scheme.
pub fn simulate_double(
    dist: &PhotonNumberDistribution,
    cfg: &DetectorConfig,
    n: u64,
    seed: u64,
) -> Result<ClickTally> {
    simulate_double_with(dist, cfg, n, seed, Exec::default())
}

pub fn simulate_double_with(
    dist: &PhotonNumberDistribution,
    cfg: &DetectorConfig,
    n: u64,
    seed: u64,
    exec: Exec,
) -> Result<ClickTally> {
    check_runs(n)?;
    let probs = event_probabilities(dist, cfg)?;
    let parts = exec.map_slice(&blocks(n), |&(b, runs)| {
        multinomial3(&mut block_rng(seed, b), runs, probs)
    });
    let mut tally = ClickTally {
        n_none: 0,
        n_b_only: 0,
        n_a: 0,
        n,
        seed,
    };
    for (none, b_only, a) in parts {
        tally.n_none += none;
        tally.n_b_only += b_only;
        tally.n_a += a;
    }
    Ok(tally)
}

/// Runs one independent double-scheme simulation per seed.
pub fn simulate_double_batch(
    dist: &PhotonNumberDistribution,
    cfg: &DetectorConfig,
    n: u64,
    seeds: &[u64],
    exec: Exec,
) -> Result<Vec<ClickTally>> {
    check_runs(n)?;
    event_probabilities(dist, cfg)?;
    exec.map_slice(seeds, |&seed| {
        simulate_double_with(dist, cfg, n, seed, Exec::Sequential)
    })
    .into_iter()
    .collect()
}

/// Simulates the single-detector scheme: `k` runs with the attenuator at `t`
/// and `n - k` runs with it open, all through a detector of efficiency `eta`.
pub fn simulate_single(
    dist: &PhotonNumberDistribution,
    t: f64,
    eta: f64,
    n: u64,
    k: u64,
    seed: u64,
) -> Result<SingleTally> {
    simulate_single_with(dist, t, eta, n, k, seed, Exec::default())
}

pub fn simulate_single_with(
    dist: &PhotonNumberDistribution,
    t: f64,
    eta: f64,
    n: u64,
    k: u64,
    seed: u64,
    exec: Exec,
) -> Result<SingleTally> {
    check_open_unit("T", t)?;
    check_runs(n)?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: eta,
            domain: "(0, 1]",
        });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidSplit { k, n });
    }
    let q_silent = vacuum_after_loss(dist, eta * t)?;
    let p_silent = vacuum_after_loss(dist, eta)?;

    // even streams serve the attenuated setting, odd streams the open one
    let mut jobs: Vec<(u64, u64, f64)> = blocks(k)
        .into_iter()
        .map(|(b, runs)| (2 * b, runs, q_silent))
        .collect();
    let attenuated = jobs.len();
    jobs.extend(
        blocks(n - k)
            .into_iter()
            .map(|(b, runs)| (2 * b + 1, runs, p_silent)),
    );
    let counts = exec.map_slice(&jobs, |&(stream, runs, p)| {
        binomial(&mut block_rng(seed, stream), runs, p)
    });
    Ok(SingleTally {
        k0_full: counts[..attenuated].iter().sum(),
        k0_open: counts[attenuated..].iter().sum(),
        k,
        n,
        seed,
    })
}

/// Witness estimate `q0_hat - lambda p0_hat` with its plug-in variance.
///
/// Double scheme: multinomial variance including the covariance
/// `p0 (1 - q0) / N`. Single scheme: independent binomials with `K` and
/// `N - K` runs.
pub fn estimate_witness(obs: &Observation, lambda: f64) -> WitnessEstimate {
    let (p0_hat, q0_hat, var_hat) = match obs {
        Observation::Double(tally) => {
            if tally.n == 0 {
                (f64::NAN, f64::NAN, None)
            } else {
                let (p, q) = tally.estimates();
                let var = witness_variance(Scheme::DoubleApd, p, q, lambda, tally.n as f64);
                (p, q, Some(var))
            }
        }
        Observation::Single(tally) => {
            if tally.k == 0 || tally.k >= tally.n {
                (f64::NAN, f64::NAN, None)
            } else {
                let (p, q) = tally.estimates();
                let var = q * (1.0 - q) / tally.k as f64
                    + lambda * lambda * p * (1.0 - p) / (tally.n - tally.k) as f64;
                (p, q, Some(var))
            }
        }
    };
    WitnessEstimate {
        p0_hat,
        q0_hat,
        w_hat: q0_hat - lambda * p0_hat,
        var_hat,
    }
}
