use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{context}: {source}")]
    EvalAt {
        context: String,
        #[source]
        source: ExprError,
    },
    #[error("division by the zero complex number")]
    ComplexDivisionByZero,
    #[error("singular matrix (det = {det})")]
    SingularMatrix { det: f64 },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("defective matrix: repeated eigenvalue {eigenvalue} with a one-dimensional eigenspace")]
    DefectiveMatrix { eigenvalue: f64 },
    #[error("exponent overflow: |rate * t| = {0} exceeds 700")]
    Overflow(f64),
    #[error("point ({x}, {y}) is not an equilibrium (residual {residual:e})")]
    NotEquilibrium { x: f64, y: f64, residual: f64 },
    #[error("probe {probe} crosses a null-cline; use a smaller h than {h}")]
    ProbeCrossesNullcline { probe: &'static str, h: f64 },
    #[error("probe {probe} lies outside the domain")]
    ProbeOutsideDomain { probe: &'static str },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parameter '{0}' is not bound in the model")]
    UnknownParameter(String),
    #[error("equilibrium lost during continuation at {param} = {value}; last good value {last_good}")]
    ContinuationLost { param: String, value: f64, last_good: f64 },
    #[error("no equilibrium in the domain at the start of the scan")]
    NoStartingEquilibrium,
    #[error("unknown model '{name}'; known models: {known}")]
    UnknownModel { name: String, known: String },
    #[error("model '{name}' is unavailable: {reason}")]
    ModelUnavailable { name: String, reason: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("undeclared identifier {0}")]
    UndeclaredIdentifier(String),
}

impl Error {
    pub(crate) fn eval_at(x: f64, y: Option<f64>, source: ExprError) -> Self {
        let context = match y {
            Some(y) => format!("evaluating at ({x}, {y})"),
            None => format!("evaluating at x = {x}"),
        };
        Error::EvalAt { context, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
