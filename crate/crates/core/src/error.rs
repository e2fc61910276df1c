use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("undefined resultant: zero polynomial input")]
    UndefinedResultant,

    #[error("root finder did not converge in {iterations} iterations")]
    RootsNotConverged { iterations: usize, best: Vec<Complex64> },

    #[error("degenerate pencil: {0}")]
    DegeneratePencil(String),

    #[error("degenerate point: {0}")]
    DegeneratePoint(String),

    #[error("evaluation at the pole z = mu[{index}]")]
    Pole { index: usize },

    #[error("x[{index}]^2 has no exact square root in Q(i); use float mode")]
    NoExactSquareRoot { index: usize },

    #[error("root a = mu[{index}] collides with a marked point; apply dimension reduction")]
    RootAtMarkedPoint { index: usize },

    #[error("x[{index}] = 0; use dimension reduction")]
    ZeroCoordinate { index: usize },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("index out of range or repeated: {0}")]
    BadIndex(String),

    #[error("sampler gave up after {0} attempts")]
    SamplingExhausted(usize),

    #[error("no witness available: {0}")]
    WitnessUnavailable(String),

    #[error("parse error: {0}")]
    Parse(String),
}
