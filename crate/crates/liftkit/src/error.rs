use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular state: eigenvalue {min:e} below floor {floor:e}")]
    SingularState { min: f64, floor: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("generator is not ergodic: {} purely imaginary eigenvalue(s), e.g. {:?}", .0.len(), .0.first())]
    NotErgodic(Vec<C64>),
    #[error("no PSD trace-one element in kernel of dimension {0}")]
    NoInvariantState(usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("negative Dirichlet form: {0:e}")]
    NegativeForm(f64),
    #[error("quadrature did not converge: relative change {0:e}")]
    Quadrature(f64),
    #[error("condition failure: {0}")]
    Condition(String),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
