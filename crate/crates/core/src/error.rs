use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },
    #[error("derivative of order {order} unsupported (max {max})")]
    OrderUnsupported { order: usize, max: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fit degenerate: {0}")]
    FitDegenerate(String),
    #[error("input of length {len} too large for exhaustive search (max {max})")]
    TooLarge { len: usize, max: usize },
    #[error("partial sum overflowed at term {0}")]
    Overflow(usize),
    #[error("growth classification inconclusive: {0}")]
    Inconclusive(String),
    #[error("characteristic flow is not monotone")]
    NonMonotone,
    #[error("point {x} outside flow image [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("shock reached: characteristics cross by t = {time}")]
    ShockReached { time: f64 },
    #[error("time step ceiling exceeded ({steps} steps)")]
    StepTooSmall { steps: usize },
    #[error("sampled functions have disjoint domains")]
    EmptyOverlap,
    #[error("no admissible delta: flow still non-monotone at delta = {delta:e}")]
    NoAdmissibleDelta { delta: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
