//! One function per suite. Each returns a certificate, a CSV table and any side artifacts.

mod banach;
mod dynamics;
mod indep;
mod toeplitz;

use indeplab::rational::{parse_q, Q};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cert::{Certificate, Table};
use crate::config::{Suite, SuiteConfig};

#[derive(Clone, Debug)]
pub struct SuiteOutput {
    pub certificate: Certificate,
    pub table: Table,
    /// `(file name, contents)` written next to the certificate.
    pub artifacts: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] indeplab::Error),
}

impl SuiteError {
    /// Bad input rather than a failed verification.
    pub fn is_usage(&self) -> bool {
        match self {
            SuiteError::Config(_) => true,
            SuiteError::Core(e) => matches!(
                e,
                indeplab::Error::InvalidParameter(_) | indeplab::Error::SizeMismatch { .. } | indeplab::Error::TooLarge(_)
            ),
        }
    }
}

pub type SuiteResult = std::result::Result<SuiteOutput, SuiteError>;

pub fn run_suite(cfg: &SuiteConfig) -> SuiteResult {
    cfg.validate().map_err(SuiteError::Config)?;
    match cfg.suite {
        Suite::Sauer => indep::sauer(cfg),
        Suite::EqualSplit => indep::equal_split(cfg),
        Suite::Half => indep::half(cfg),
        Suite::Census => indep::census(cfg),
        Suite::Regular => indep::regular(cfg),
        Suite::ToeplitzBuild => toeplitz::build(cfg),
        Suite::ToeplitzIndep => toeplitz::independence(cfg),
        Suite::ToeplitzEval => toeplitz::eval(cfg),
        Suite::NotIe => dynamics::not_ie(cfg),
        Suite::Sum => dynamics::sum(cfg),
        Suite::BanachChain => banach::chain(cfg),
    }
}

/// `count` trial seeds drawn from the suite seed.
pub(crate) fn trial_seeds(seed: Option<u64>, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    (0..count).map(|_| rng.next_u64()).collect()
}

pub(crate) fn rational(raw: &Option<String>, default: &str) -> std::result::Result<Q, SuiteError> {
    let s = raw.as_deref().unwrap_or(default);
    parse_q(s).map_err(|e| SuiteError::Config(format!("cannot read {s:?} as a rational: {e}")))
}

/// First failure message, if any.
pub(crate) fn first_failure(failures: &[String]) -> Option<String> {
    match failures.len() {
        0 => None,
        1 => Some(failures[0].clone()),
        n => Some(format!("{} ({} failures in total)", failures[0], n)),
    }
}
