use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid game config: {0}")]
    InvalidConfig(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("strategy parse error at line {line}, column {column}: {reason}")]
    StrategyParse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("card value {0} is outside [0, 1]")]
    CardOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation requires the continuous card model")]
    ContinuousModelRequired,

    #[error("operation requires a discrete card model")]
    DiscreteModelRequired,

    #[error("deck of {0} cards is too large to enumerate (limit {1})")]
    DeckTooLarge(u32, u32),

    #[error("hand did not settle after {0} consecutive replays")]
    ReplayLimit(u32),

    #[error("every deal replays; the game value is undefined")]
    DegenerateReplay,
}
