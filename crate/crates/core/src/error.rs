use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown generator `{name}` at {line}:{column}")]
    UnknownGenerator {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("modulus {0} is not a prime below 2^31")]
    NonPrimeModulus(u64),
    #[error("truncation bound {bound} is below relation degree {degree}")]
    BoundTooSmall { bound: usize, degree: usize },
    #[error("mismatched ambient algebra: {0}")]
    Mismatch(String),
    #[error("expected {expected} images, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("degree {degree} exceeds truncation bound {bound}")]
    Truncation { degree: usize, bound: usize },
    #[error("operation needs {needed}, field is {field}")]
    UnsupportedField { needed: &'static str, field: String },
    #[error("search space of {size} candidates exceeds the limit {limit}")]
    SearchSpace { size: u128, limit: u128 },
    #[error("open set is empty")]
    EmptyOpenSet,
    #[error("not a point: relation {relation} evaluates to {value}")]
    NotAPoint { relation: usize, value: String },
    #[error("invalid homomorphism: relation {relation} maps to nonzero {witness}")]
    InvalidHom { relation: usize, witness: String },
    #[error("invalid derivation: relation {relation} maps to nonzero {witness}")]
    InvalidDerivation { relation: usize, witness: String },
    #[error("image of generator `{generator}` is not homogeneous linear")]
    NonHomogeneous { generator: String },
    #[error("generator name `{0}` clashes with a derived name")]
    NameClash(String),
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("module dimension {dim} exceeds the search guard {limit}")]
    ModuleTooLarge { dim: usize, limit: usize },
    #[error("modules {0} and {1} are isomorphic")]
    IsomorphicModules(usize, usize),
    #[error("element marked as a unit is not invertible")]
    NotInvertible,
    #[error("jacobian is rank deficient near {0:?}")]
    RankDeficient(Vec<f64>),
    #[error("newton projection did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("step size must be positive, got {0}")]
    InvalidStep(f64),
    #[error("{0}")]
    Invalid(String),
}
