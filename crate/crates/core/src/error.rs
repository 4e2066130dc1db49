use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the admissible domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("grid needs at least one subinterval, got n = {0}")]
    EmptyGrid(usize),

    #[error("node index {index} outside 0..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("weight vectors have lengths {c0} and {c1}, expected {expected}")]
    WeightLength {
        c0: usize,
        c1: usize,
        expected: usize,
    },

    #[error("non-finite weight in rule '{0}'")]
    NonFiniteWeight(String),

    #[error("integrand '{0}' has no exact integral")]
    MissingExactIntegral(String),

    #[error("integrand '{0}' has no registered second derivative")]
    MissingSecondDerivative(String),

    #[error(
        "integrand '{name}': derivative check failed at x = {x} (residual {residual:e} > {tol:e})"
    )]
    DerivativeMismatch {
        name: String,
        x: f64,
        residual: f64,
        tol: f64,
    },

    #[error("unknown integrand '{0}'")]
    UnknownIntegrand(String),

    #[error("unknown rule '{0}'")]
    UnknownRule(String),

    #[error(
        "rule '{rule}' violates the exactness constraints: \
         |1 - sum c0| = {constant_residual:e}, |(l, e^-x)| = {exp_residual:e}"
    )]
    ConstraintViolation {
        rule: String,
        constant_residual: f64,
        exp_residual: f64,
    },

    #[error("rule '{0}' does not carry trapezoid value weights")]
    NonTrapezoidValueWeights(String),

    #[error("pivot {pivot:e} in column {column} is below the singularity threshold {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("fit for ({rule}, {integrand}) has {surviving} rows above the noise floor, need 3")]
    InsufficientData {
        rule: String,
        integrand: String,
        surviving: usize,
    },

    #[error("grid sizes must be strictly increasing")]
    UnsortedGrid,

    #[error("bound check expects rows of the optimal rule, got '{0}'")]
    NotOptimalRule(String),

    #[error("no seminorm supplied for integrand '{0}'")]
    MissingSeminorm(String),
}
