use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("map parse error: {0}")]
    MapParse(String),

    #[error("map validation error: {0}")]
    MapValidation(String),

    #[error("rule parse error: {0}")]
    RuleParse(String),

    #[error("weight snapshot parse error: {0}")]
    SnapshotParse(String),

    #[error("degenerate episode: no steps recorded")]
    DegenerateEpisode,

    #[error("cell ({0}, {1}) is out of bounds")]
    OutOfBounds(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
