use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frame is not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("tau-Jacobian rank split failed: singular values {0:?}")]
    RankDeficient(Vec<f64>),
    #[error("planes share a direction; principal angles {angles:?}")]
    Degenerate { angles: [f64; 4] },
    #[error("bad range: {0}")]
    BadRange(String),
    #[error("degenerate immersion at node {node} (Gram determinant {gram:.3e})")]
    DegenerateImmersion { node: usize, gram: f64 },
    #[error("derivative order {0} exceeds the available stencil order 2")]
    MissingDerivatives(usize),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("second differences {0:.3e} exceed the linearity tolerance")]
    NonLinearityDetected(f64),
    #[error("homogeneous ansatz did not stabilize for rate {lambda}: dims {dims:?}")]
    AnsatzExhausted { lambda: i32, dims: Vec<usize> },
    #[error("endpoint {0} coincides with a critical rate")]
    CriticalEndpoint(f64),
    #[error("signature + Euler characteristic must be even, got {0}")]
    ParityError(i64),
    #[error("rate table differs from the reference data: computed {0}")]
    RateTableMismatch(String),
    #[error("cone mismatch: {0}")]
    ConeMismatch(String),
    #[error("scale inequalities violated: {0}")]
    ScaleViolation(String),
    #[error("perturbed immersion degenerates at node {0}")]
    ImmersionDegenerate(usize),
    #[error("base margin {margin:.6} < 0.9 at node {node}")]
    MarginTooLow { node: usize, margin: f64 },
    #[error("no contraction: ratios {0:?}")]
    NoContraction(Vec<f64>),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("invalid config key `{key}`: {msg}")]
    ConfigInvalid { key: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: &str, msg: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    /// Process exit code: 2 for validation problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotOrthonormal(_)
            | Error::BadRange(_)
            | Error::GridMismatch(_)
            | Error::CriticalEndpoint(_)
            | Error::ParityError(_)
            | Error::ConeMismatch(_)
            | Error::ScaleViolation(_)
            | Error::MissingDerivatives(_)
            | Error::UnknownCommand(_)
            | Error::ConfigInvalid { .. }
            | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
