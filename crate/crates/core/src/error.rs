use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("homogeneity violated: {0}")]
    Homogeneity(String),
    #[error("identically zero polynomial: {0}")]
    ZeroPolynomial(String),
    #[error("word lacks required suffix: {0}")]
    MissingSuffix(String),
    #[error("malformed polynomial at line {line}, column {column}: {msg}")]
    Parse { msg: String, line: usize, column: usize },
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error("degenerate sampling: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::ZeroNorm => "zero_norm",
            Error::Singular(_) => "singular",
            Error::InvalidPermutation(_) => "invalid_permutation",
            Error::Homogeneity(_) => "homogeneity",
            Error::ZeroPolynomial(_) => "zero_polynomial",
            Error::MissingSuffix(_) => "missing_suffix",
            Error::Parse { .. } => "parse",
            Error::Certification(_) => "certification",
            Error::Guard(_) => "guard",
            Error::Infeasible(_) => "infeasible",
            Error::Overflow(_) => "overflow",
            Error::Degenerate(_) => "degenerate",
            Error::Invalid(_) => "invalid",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
