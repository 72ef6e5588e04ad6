use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("variable index {index} out of range for {nvars} variables")]
    VarOutOfRange { index: usize, nvars: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid extension: {0}")]
    InvalidSpec(String),

    #[error("element {0} is algebraic over the base field")]
    NotTranscendental(String),

    #[error("dependent input: {0}")]
    Dependent(String),

    #[error("search space cap exceeded: {0}")]
    SearchCap(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("anchor mismatch between j-tuples")]
    AnchorMismatch,

    #[error("geometry map does not preserve rank: {0}")]
    RankNotPreserved(String),

    #[error("unassigned symbol `{0}`")]
    Unassigned(String),

    #[error("missing witness: {0}")]
    MissingWitness(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
