use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("unsupported regime: beta = {0} < 0 (fast boundary) is not covered")]
    UnsupportedBeta(f64),
    #[error("lattice too small: N = {0}, need N >= 2")]
    LatticeTooSmall(usize),
    #[error("inconsistent {side} reservoir rates: need a > b > 0, got a = {a}, b = {b}")]
    InconsistentRates { side: &'static str, a: f64, b: f64 },
    #[error("event cap of {cap} exceeded at time {time}")]
    EventCapExceeded { cap: u64, time: f64 },
    #[error("occupation overflow at site {0}")]
    OccupationOverflow(usize),
    #[error("profile is negative ({value}) at u = {at}")]
    NegativeProfile { at: f64, value: f64 },
    #[error("lattice size mismatch: dual N = {dual}, primal N = {primal}")]
    SizeMismatch { dual: usize, primal: usize },
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("N = {n} exceeds the configured cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("pair not absorbed by t_cap in {unabsorbed} of {replicas} replicas")]
    InsufficientAbsorption { unabsorbed: usize, replicas: usize },
    #[error("grid too coarse: {0} interior points, need at least 8")]
    GridTooCoarse(usize),
    #[error("corrected test functions need beta < 1, got beta = {0}")]
    WrongRegime(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
