use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("functions live on different domains: [0, {left}] vs [0, {right}]")]
    DomainMismatch { left: f64, right: f64 },

    #[error("grid sizes differ: {left} vs {right} steps")]
    GridMismatch { left: usize, right: usize },

    #[error("set is not orthogonal: |({i},{j})| / (|a_i||a_j|) = {ratio:e} exceeds {tolerance:e}")]
    NotOrthogonal {
        i: usize,
        j: usize,
        ratio: f64,
        tolerance: f64,
    },

    #[error("member {0} of the set has zero norm")]
    ZeroMember(usize),

    #[error("empty function set")]
    EmptySet,

    #[error("weight `{0}` is not bounded and nonzero almost everywhere")]
    NotSuppInf(String),

    #[error("weight `{weight}` is incompatible with the basis: {reason}")]
    IncompatibleWeight { weight: String, reason: String },

    #[error("no compatible weight found among {0} candidate(s)")]
    NoCompatibleWeight(usize),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("functionals are defined over different basis sets")]
    BasisMismatch,

    #[error("lambda = {re}{im:+}i must have positive real part")]
    InvalidLambda { re: f64, im: f64 },

    #[error("the Feynman parameter q must be nonzero")]
    ZeroQ,

    #[error("p = {0} is outside [1, 2]")]
    InvalidP(f64),

    #[error("kernel has no Gaussian decay on axis {axis}: combined rate {re}{im:+}i")]
    NoGaussianDecay { axis: usize, re: f64, im: f64 },

    #[error("operation needs an exact kernel; this functional is Monte Carlo only")]
    SampledKernel,

    #[error("smoothness order exhausted: the variation of an order-0 functional leaves the class")]
    OrderExhausted,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
