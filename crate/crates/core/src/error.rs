use thiserror::Error;

/// Errors raised by the solver stack.
///
/// Hypothesis audits never raise; their failures are verdicts.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),

    #[error("lambda weight {0} outside [1/2, 1]")]
    LambdaOutOfRange(f64),

    #[error("function is not in the Lambda set (margin {margin:e})")]
    NotInLambda { margin: f64 },

    #[error("no sign change of the fibering derivative on [{t_min}, {t_max}]")]
    BracketingFailed {
        t_min: f64,
        t_max: f64,
        /// (t, zeta'(t)) rows of the failed scan.
        scan: Vec<(f64, f64)>,
    },

    #[error("fibering derivative changes sign {} times; crossings near {crossings:?}", crossings.len())]
    MultipleCrossings { crossings: Vec<f64> },

    #[error("initial iterate is not in the Lambda set (margin {margin:e})")]
    InitialIterateNotInLambda { margin: f64 },

    #[error("projection failed at iteration {iteration}: {source}")]
    ProjectionAtIterate {
        iteration: usize,
        #[source]
        source: Box<Error>,
        /// Values of the iterate that failed to project.
        iterate: Vec<f64>,
    },

    #[error("no s0 with F(s0) > V_inf s0^2 / 2 was found")]
    NoS0,

    #[error("shooting failed to bracket the initial amplitude: {0}")]
    ShootingBracketFailed(String),

    #[error("no T <= {t_max} makes the dilation-path endpoint energy negative")]
    TNotFound { t_max: f64 },

    #[error("table error: {0}")]
    Table(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
