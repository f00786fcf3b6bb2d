use thiserror::Error;

/// Errors raised by the pricing engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid contract: {0}")]
    InvalidSpec(String),

    #[error("laplace exponent evaluated at pole {pole} (theta = {theta})")]
    Pole { theta: f64, pole: f64 },

    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("no sign change of Phi(theta) - {alpha} on ({lo}, {hi})")]
    Bracket { alpha: f64, lo: f64, hi: f64 },

    #[error("root iteration did not converge for alpha = {alpha} (residual {residual:e})")]
    Convergence { alpha: f64, residual: f64 },

    #[error("linear system is numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("smooth-fit residual has no sign change on ({lo}, {hi})")]
    NoBoundary { lo: f64, hi: f64 },

    #[error("smooth-fit residual changes sign {count} times; boundary is not unique")]
    MultipleBoundaries { count: usize, candidates: Vec<f64> },

    #[error("Gaver-Stehfest order {0} outside [1, 10]")]
    Order(usize),

    #[error("simulation budget exceeded: {requested} steps requested, budget {budget}")]
    Budget { requested: u128, budget: u128 },

    #[error("evaluation at theta = {theta} failed: {source}")]
    Inversion {
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::InvalidModel(_)
            | Error::InvalidSpec(_)
            | Error::Config(_)
            | Error::Order(_)
            | Error::Budget { .. } => true,
            Error::Inversion { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

impl Error {
    /// Stable snake-case tag of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Pole { .. } => "pole",
            Error::Quadrature { .. } => "quadrature",
            Error::Bracket { .. } => "bracket",
            Error::Convergence { .. } => "convergence",
            Error::SingularSystem { .. } => "singular_system",
            Error::NoBoundary { .. } => "no_boundary",
            Error::MultipleBoundaries { .. } => "multiple_boundaries",
            Error::Order(_) => "order",
            Error::Budget { .. } => "budget",
            Error::Inversion { .. } => "inversion",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
