use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: rating {rating} outside scale [{min}, {max}]")]
    RatingOutOfRange {
        line: u64,
        rating: f64,
        min: f64,
        max: f64,
    },

    #[error("rating {rating} for ({user}, {item}, {year}) outside scale [{min}, {max}]")]
    EventOutOfRange {
        user: String,
        item: String,
        year: i32,
        rating: f64,
        min: f64,
        max: f64,
    },

    #[error("duplicate rating event ({user}, {item}, {year})")]
    DuplicateEvent { user: String, item: String, year: i32 },

    #[error("paper {paper} cites itself in {year}")]
    SelfCitation { paper: String, year: i32 },

    #[error("graph has no events")]
    EmptyGraph,

    #[error("year {0} is not present in the graph")]
    UnknownYear(i32),

    #[error("year {0} has no ratings")]
    EmptyYear(i32),

    #[error("invalid rating scale: {0}")]
    InvalidScale(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate size: {0}")]
    DegenerateSize(String),

    #[error("every temporary reputation is zero; redistribution is undefined")]
    DegenerateReputation,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
