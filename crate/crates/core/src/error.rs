use alloc::string::String;

/// Errors raised by network validation, operator construction, propagation
/// and scheduling.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("network needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("duplicate site label `{0}`")]
    DuplicateLabel(String),
    #[error("site index {index} out of range for a {len}-site network")]
    SiteOutOfRange { index: usize, len: usize },
    #[error("self-coupling declared on site `{0}`")]
    SelfCoupling(String),
    #[error("coupling {a}-{b} declared more than once")]
    DuplicatePair { a: String, b: String },
    #[error("non-finite value for {0}")]
    NonFinite(String),
    #[error("sites must differ, got `{0}` twice")]
    IdenticalSites(String),
    #[error("sites `{a}` and `{b}` are not coupled")]
    NotCoupled { a: String, b: String },
    #[error("sites `{a}` and `{b}` have equal shifts; the pair cannot be addressed")]
    DegenerateShift { a: String, b: String },
    #[error("recipe has no terms")]
    EmptyRecipe,
    #[error("operator is not Hermitian (max |M - M^H| = {0:e})")]
    NotHermitian(f64),
    #[error("basis mismatch: expected dimension {expected}, got {found}")]
    BasisMismatch { expected: usize, found: usize },
    #[error("{0}-axis pulses leave the single-excitation sector; use the full basis")]
    PulseOutsideSector(char),
    #[error("invalid duration {0}")]
    InvalidDuration(f64),
    #[error("repetition count must be at least 1")]
    ZeroRepetitions,
    #[error("invalid toggling sequence: {0}")]
    InvalidSequence(&'static str),
    #[error("pathway needs at least 2 sites, got {0}")]
    PathwayTooShort(usize),
    #[error("no common multiple of the {a}-{b} and {b}-{c} periods within n <= {n_max}")]
    NoCommonMultiple { a: String, b: String, c: String, n_max: u32 },
    #[error("empty search grid")]
    EmptySearch,
    #[error("full basis with {0} sites is too large")]
    BasisTooLarge(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
