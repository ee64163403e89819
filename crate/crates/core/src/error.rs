use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order parameter s = 1 is singular")]
    SingularOrder,

    #[error("order parameter {value} is outside the admissible domain {domain}")]
    OrderOutOfDomain { value: String, domain: &'static str },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("invalid photon distribution: {0}")]
    InvalidDistribution(String),

    #[error("series diverges: |(s+1)/(s-1)| = {ratio_abs} > 1 with non-zero tail mass")]
    DivergentSeries { ratio_abs: f64 },

    #[error("series truncation bound {bound:e} exceeds tolerance {tol:e} (N_max = {n_max})")]
    SeriesUnconverged { bound: f64, tol: f64, n_max: usize },

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e}")]
    QuadratureUnconverged { estimate: f64, tol: f64 },

    #[error("beam splitter is not unitary: r = {r}, t = {t}")]
    NonUnitaryBeamSplitter { r: f64, t: f64 },

    #[error("{what}: independent routes disagree by {residual:e} (tolerance {tol:e})")]
    Consistency {
        what: &'static str,
        residual: f64,
        tol: f64,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }
}
