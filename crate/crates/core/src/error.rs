use thiserror::Error;

/// Errors raised by the QES toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QesError {
    #[error("truncation size {got} is below the minimum {min}")]
    TruncationTooSmall { got: usize, min: usize },

    #[error("series has {len} coefficients but {needed} are required")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("series has a nonzero coefficient at negative power z^{power}")]
    NonAnalytic { power: i64 },

    #[error("logarithmic resonance in the {channel}-channel at z^{power}")]
    Resonance { channel: char, power: i64 },

    #[error("inadmissible subspace parameters: {}", .0.join("; "))]
    Inadmissible(Vec<String>),

    #[error("pole in {0}")]
    Pole(String),

    #[error("unknown helper `{0}`")]
    UnknownHelper(String),

    #[error("helper `{name}` expects {expected} arguments, got {got}")]
    HelperArity { name: String, expected: usize, got: usize },

    #[error("cannot parse rational `{0}`")]
    ParseRational(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("cut-off conditions violated (max residual {0:e}); block does not represent H on the subspace")]
    CutoffViolated(f64),

    #[error("{0} requires a spin-half subspace with a_mm = 0")]
    NotApplicable(&'static str),

    #[error("Fock norm of a basis vector diverges at truncation {m}")]
    NormDivergence { m: usize },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, QesError>;
