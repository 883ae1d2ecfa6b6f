//! Test states: the attenuated single photon with Poissonian background,
//! finite Fock mixtures, squeezed coherent states and products of modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certification::certification_margin;
use crate::error::{check_open_unit, Error, Result};
use crate::gaussian_boundary::{p0_gaussian, q0_gaussian, GaussianStateParams};
use crate::photon_stats::{vacuum_after_loss, PhotonNumberDistribution, TAIL_TARGET};
use crate::search::bisect_predicate;

/// Resolution of [`eta_threshold`].
pub const ETA_TOLERANCE: f64 = 1e-8;

/// Largest Fock cutoff tried when expanding a Gaussian state.
const MAX_FOCK_CUTOFF: usize = 50_000;

/// Mixture `eta |1><1| + (1 - eta) |0><0|` together with an independent
/// Poissonian noise mode of mean `nbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisySinglePhotonModel {
    pub eta: f64,
    pub nbar: f64,
}

impl NoisySinglePhotonModel {
    pub fn new(eta: f64, nbar: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParams(format!(
                "eta must lie in [0, 1], got {eta}"
            )));
        }
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "nbar must be >= 0, got {nbar}"
            )));
        }
        Ok(Self { eta, nbar })
    }
}

/// `(p0, q0(T)) = ((1 - eta) e^-nbar, (1 - eta T) e^(-nbar T))`.
pub fn noisy_single_photon_vacuum_pair(m: &NoisySinglePhotonModel, t: f64) -> Result<(f64, f64)> {
    check_open_unit("T", t)?;
    let m = NoisySinglePhotonModel::new(m.eta, m.nbar)?;
    Ok((
        (1.0 - m.eta) * (-m.nbar).exp(),
        (1.0 - m.eta * t) * (-m.nbar * t).exp(),
    ))
}

/// Photon statistics of the noisy single photon: the `{1 - eta, eta}`
/// distribution convolved with Poisson(`nbar`).
pub fn noisy_single_photon_distribution(
    m: &NoisySinglePhotonModel,
) -> Result<PhotonNumberDistribution> {
    let m = NoisySinglePhotonModel::new(m.eta, m.nbar)?;
    let signal = PhotonNumberDistribution::from_probs(vec![1.0 - m.eta, m.eta])?;
    Ok(signal.convolve(&PhotonNumberDistribution::poisson(m.nbar)?))
}

/// Photon statistics of a pure squeezed coherent state from its Fock
/// amplitudes.
///
/// The state `D(alpha) S(r) |0>` with `V = e^(-2r)` and
/// `alpha = (dx + i dp) / sqrt(2)` is annihilated by
/// `cosh(r) a + sinh(r) a^dag - gamma`, `gamma = cosh(r) alpha + sinh(r) alpha*`,
/// which gives a three-term recurrence for the amplitudes.
pub fn squeezed_coherent_distribution(s: &GaussianStateParams) -> Result<PhotonNumberDistribution> {
    let s = GaussianStateParams::new(s.v, s.dx, s.dp)?;
    let r = -0.5 * s.v.ln();
    let (mu, nu) = (r.cosh(), r.sinh());
    let alpha = Complex64::new(s.dx, s.dp) / 2f64.sqrt();
    let gamma = alpha * mu + alpha.conj() * nu;
    let c0 = (-alpha.norm_sqr() / 2.0 - alpha * alpha * (nu / (2.0 * mu))).exp() / mu.sqrt();

    let mut probs = vec![c0.norm_sqr()];
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), c0);
    let mut total = probs[0];
    let mut n = 0usize;
    while 1.0 - total >= TAIL_TARGET {
        if n >= MAX_FOCK_CUTOFF {
            return Err(Error::InvalidParams(format!(
                "Fock expansion of {s:?} did not converge below n = {MAX_FOCK_CUTOFF}"
            )));
        }
        let next = (gamma * cur - prev * (nu * (n as f64).sqrt())) / (mu * ((n + 1) as f64).sqrt());
        prev = cur;
        cur = next;
        n += 1;
        let p = cur.norm_sqr();
        probs.push(p);
        total += p;
    }
    // rounding in the running sum can push it above one by a few ulps
    let tail = (1.0 - total).max(0.0);
    PhotonNumberDistribution::new(probs, tail)
}

/// Threshold on the single-photon fraction for a given noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "eta", rename_all = "snake_case")]
pub enum EtaThreshold {
    /// Smallest certified `eta`, within [`ETA_TOLERANCE`].
    Threshold(f64),
    /// Even `eta = 1` fails at this noise level and `T`.
    NotCertifiable,
}

impl EtaThreshold {
    pub fn value(self) -> Option<f64> {
        match self {
            EtaThreshold::Threshold(eta) => Some(eta),
            EtaThreshold::NotCertifiable => None,
        }
    }
}

/// Smallest single-photon fraction whose noisy state exceeds the exact
/// Gaussian threshold, by bisection on the certification predicate.
pub fn eta_threshold(nbar: f64, t: f64) -> Result<EtaThreshold> {
    check_open_unit("T", t)?;
    NoisySinglePhotonModel::new(0.0, nbar)?;
    let certified = |eta: f64| -> bool {
        let m = NoisySinglePhotonModel { eta, nbar };
        let Ok((p0, q0)) = noisy_single_photon_vacuum_pair(&m, t) else {
            return false;
        };
        certification_margin(p0, q0, t).is_ok_and(|margin| margin > 0.0)
    };
    if !certified(1.0) {
        return Ok(EtaThreshold::NotCertifiable);
    }
    if certified(0.0) {
        return Ok(EtaThreshold::Threshold(0.0));
    }
    Ok(EtaThreshold::Threshold(bisect_predicate(
        certified,
        0.0,
        1.0,
        ETA_TOLERANCE,
    )))
}

/// One mode of a product state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModeState {
    Distribution(PhotonNumberDistribution),
    Gaussian(GaussianStateParams),
}

impl ModeState {
    fn vacuum_pair(&self, t: f64) -> Result<(f64, f64)> {
        match self {
            ModeState::Distribution(d) => Ok((d.p0(), vacuum_after_loss(d, t)?)),
            ModeState::Gaussian(g) => Ok((p0_gaussian(g)?, q0_gaussian(g, t)?)),
        }
    }
}

/// Product of independently prepared modes; vacuum probabilities multiply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodeProductState {
    pub modes: Vec<ModeState>,
}

impl MultimodeProductState {
    pub fn vacuum_pair(&self, t: f64) -> Result<(f64, f64)> {
        check_open_unit("T", t)?;
        self.modes.iter().try_fold((1.0, 1.0), |(p, q), mode| {
            let (pk, qk) = mode.vacuum_pair(t)?;
            Ok((p * pk, q * qk))
        })
    }
}

/// State description accepted on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    NoisySinglePhoton {
        eta: f64,
        nbar: f64,
    },
    FockMixture {
        probs: Vec<f64>,
    },
    SqueezedCoherent {
        #[serde(rename = "V")]
        v: f64,
        dx: f64,
        dp: f64,
    },
}

impl StateSpec {
    /// Exact `(p0, q0(T))` of the described state.
    pub fn vacuum_pair(&self, t: f64) -> Result<(f64, f64)> {
        match self {
            StateSpec::NoisySinglePhoton { eta, nbar } => {
                noisy_single_photon_vacuum_pair(&NoisySinglePhotonModel::new(*eta, *nbar)?, t)
            }
            StateSpec::FockMixture { .. } => {
                check_open_unit("T", t)?;
                let d = self.distribution()?;
                Ok((d.p0(), vacuum_after_loss(&d, t)?))
            }
            StateSpec::SqueezedCoherent { v, dx, dp } => {
                let g = GaussianStateParams::new(*v, *dx, *dp)?;
                Ok((p0_gaussian(&g)?, q0_gaussian(&g, t)?))
            }
        }
    }

    /// Photon-number distribution of the described state.
    pub fn distribution(&self) -> Result<PhotonNumberDistribution> {
        match self {
            StateSpec::NoisySinglePhoton { eta, nbar } => {
                noisy_single_photon_distribution(&NoisySinglePhotonModel::new(*eta, *nbar)?)
            }
            StateSpec::FockMixture { probs } => PhotonNumberDistribution::from_probs(probs.clone()),
            StateSpec::SqueezedCoherent { v, dx, dp } => {
                squeezed_coherent_distribution(&GaussianStateParams::new(*v, *dx, *dp)?)
            }
        }
    }
}
