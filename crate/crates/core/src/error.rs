use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,
    #[error("invalid {what}: {detail}")]
    InvalidArgument { what: &'static str, detail: String },
    #[error("length mismatch: {left} values vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("x = {x} outside domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("no density")]
    NoDensity,
    #[error("non-invertible transform")]
    NonInvertible,
    #[error("{0} requires a discrete distribution")]
    NotDiscrete(&'static str),
    #[error("{0} requires a continuous distribution")]
    NotContinuous(&'static str),
    #[error("cn undefined for n = {0}")]
    CnUndefined(usize),
    #[error("no elbow detected")]
    NoElbow,
    #[error("signal proportion zero")]
    ZeroSignal,
    #[error("concavification requires non-negative support")]
    NegativeSupport,
    #[error("unsupported level beta = {0} (tabulated: 0.10, 0.05, 0.01)")]
    UnsupportedLevel(f64),
}

impl Error {
    pub fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidArgument {
            what,
            detail: detail.into(),
        }
    }
}
