use crate::rational::Rational;
use thiserror::Error;

/// Errors surfaced by the construction pipeline and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse `{0}` as a rational (expected p/q)")]
    ParseRational(String),

    #[error("malformed interval: lo={lo}, hi={hi} (need lo < hi, or a closed point)")]
    MalformedInterval { lo: String, hi: String },

    #[error("degenerate interval not allowed here: point {0}")]
    DegenerateInterval(Rational),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEps(Rational),

    #[error("operation requires a closed set")]
    NotClosed,

    #[error("operation requires a nonempty set")]
    EmptySet,

    #[error("window endpoints must satisfy lo < hi, got [{lo}, {hi}]")]
    BadWindow { lo: String, hi: String },

    #[error("spec validation failed: {0}")]
    SpecValidation(String),

    #[error("not decomposable at this resolution: {0}")]
    NotDecomposable(String),

    #[error(
        "allocation infeasible for owner {}: requested {}, free {} (deficit {})",
        .0.owner, .0.requested, .0.available, .0.deficit
    )]
    AllocationFailure(Box<AllocationDeficit>),

    #[error("construction failed at stage {stage}, index {index}: {detail}")]
    Construction {
        stage: &'static str,
        index: usize,
        detail: String,
    },

    #[error("point {0} lies in the deepest scheme level; refusing off-target analysis")]
    SuspectedTargetPoint(Rational),

    #[error("artifact is inconsistent: {0}")]
    Artifact(String),

    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Payload of an allocation failure, boxed to keep the error type small.
#[derive(Debug, Clone)]
pub struct AllocationDeficit {
    pub owner: usize,
    pub requested: Rational,
    pub available: Rational,
    pub deficit: Rational,
}

pub type Result<T> = std::result::Result<T, Error>;
