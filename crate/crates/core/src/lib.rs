//! Certification of quantum non-Gaussianity from the vacuum probability `p0`
//! of a light state and the vacuum probability `q0` of its copy attenuated to
//! transmittance `T`.
//!
//! A pair `(p0, q0)` lying above the largest `q0` reachable by mixtures of
//! Gaussian states at the same `p0` proves the state is not such a mixture.
//! The crate computes that threshold, evaluates it for common states,
//! simulates the on/off detector measurements that estimate the pair and
//! plans how many runs a convincing measurement needs.

pub mod certification;
pub mod error;
pub mod exec;
pub mod gaussian_boundary;
pub mod measurement_sim;
pub mod photon_stats;
pub mod planner;
mod search;
pub mod state_models;
pub mod tables;

pub use certification::{
    certify, optimal_witness, CertificationResult, Scheme, VacuumPair, Verdict,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use gaussian_boundary::{q0_threshold, GaussianStateParams};
pub use photon_stats::PhotonNumberDistribution;
pub use planner::{required_runs, PlanResult};
pub use state_models::StateSpec;
