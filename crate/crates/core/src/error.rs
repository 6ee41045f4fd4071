use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no actionable factors: every non-excluded factor is latent")]
    NoActionableFactors,
    #[error("duplicate factor id `{0}`")]
    DuplicateFactor(String),
    #[error("unknown factor `{0}`")]
    UnknownFactor(String),
    #[error("invalid level for factor `{0}`: block and sublevel must be at least 1")]
    InvalidLevel(String),
    #[error("invalid level label `{0}`")]
    InvalidLevelLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("opinion entry {value} at ({row}, {col}) of expert `{expert}` is outside the 0-6 scale")]
    OutOfScale {
        expert: String,
        row: usize,
        col: usize,
        value: i64,
    },
    #[error("no opinion matrices supplied")]
    NoOpinions,
    #[error("invalid expert weights: {0}")]
    InvalidWeights(String),
    #[error("invalid effort assignment: {0}")]
    InvalidAssignment(String),
    #[error("significance over the selected factors sums to zero")]
    ZeroSignificance,
    #[error("significance gating requested but no significant-edge set was supplied")]
    GatingWithoutEdges,
    #[error("closure diverges: the spectral radius of the influence matrix is not below 1")]
    ClosureDiverges,
    #[error("strategic path has no effective blocks")]
    NoEffectiveBlocks,
    #[error("heuristic `{0}` needs UEPF values")]
    MissingUepf(&'static str),
    #[error("path enumeration would exceed {limit} strategic paths")]
    TooManyPaths { limit: usize },
    #[error("path index {index} out of range (1..={count})")]
    PathOutOfRange { index: usize, count: usize },
    #[error("oracle bound exceeded: {0}")]
    OracleBound(String),
    #[error("project file: {0}")]
    Project(String),
    #[error("validation failed:\n{0}")]
    Validation(ValidationReport),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Parse and IO failures, as opposed to well-formed input that fails a
    /// consistency check.
    pub fn is_parse_failure(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Project(_)
                | Error::InvalidLevelLabel(_)
                | Error::OutOfScale { .. }
        )
    }
}
