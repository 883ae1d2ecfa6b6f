use thiserror::Error;

/// Errors raised by the certification toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid photon-number distribution: {0}")]
    InvalidDistribution(String),

    #[error("{name} = {value} is outside {domain}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error(
        "nonphysical pair: p0 = {p0}, q0 = {q0} violates p0 <= q0 <= 1 - T(1 - p0) at T = {t}"
    )]
    NonphysicalPair { p0: f64, q0: f64, t: f64 },

    #[error("state is not certifiable: {0}")]
    NotCertifiable(String),

    #[error("invalid measurement split: K = {k}, N = {n}")]
    InvalidSplit { k: u64, n: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(Error::OutOfRange {
            name,
            value,
            domain,
        });
    }
    Ok(())
}

/// Open unit interval (0, 1).
pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(Error::OutOfRange {
            name,
            value,
            domain: "(0, 1)",
        });
    }
    Ok(())
}
