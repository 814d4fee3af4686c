use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape: {0}")]
    Shape(String),
    #[error("aliasing: {samples} samples cannot represent band {k} (need at least {needed})")]
    Aliasing { k: usize, samples: usize, needed: usize },
    #[error("domain: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("divergence at t = {t}: {what} = {norm}")]
    Divergence { t: f64, what: &'static str, norm: f64 },
    #[error("mean drift at t = {t}: |coeff(0)| = {drift}")]
    MeanDrift { t: f64, drift: f64 },
    #[error("cancellation violation: |M4{xis:?}| = {value} exceeds {bound} on the resonant set")]
    Cancellation { xis: [i64; 4], value: f64, bound: f64 },
    #[error("member {member}: {source}")]
    Member {
        member: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("io error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag for the failure class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Aliasing { .. } => "aliasing",
            Error::Domain(_) => "domain",
            Error::Input(_) => "input",
            Error::Divergence { .. } => "divergence",
            Error::MeanDrift { .. } => "mean-drift",
            Error::Cancellation { .. } => "cancellation",
            Error::Member { source, .. } => source.kind(),
            Error::Io { .. } => "io",
            Error::Parse(_) => "parse",
        }
    }
}
