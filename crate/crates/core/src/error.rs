use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tuple arity {arity} exceeds variable count {n}")]
    ArityExceedsVariables { n: usize, arity: usize },

    #[error("tuple count 2^{arity} * {n}!/({n}-{arity})! overflows u64")]
    CountOverflow { n: usize, arity: usize },

    #[error("variable {var} repeated in tuple")]
    RepeatedVariable { var: usize },

    #[error("variable {var} out of range for {n} variables")]
    VariableOutOfRange { var: usize, n: usize },

    #[error("index {index} out of range [0, {size})")]
    IndexOutOfRange { index: u64, size: u64 },

    #[error("expected arity {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid position set: {0}")]
    InvalidPositions(String),

    #[error("arity k = {0} is unsupported (1 <= k <= 16)")]
    UnsupportedArity(usize),

    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },

    #[error("negative or non-finite weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("distribution is uniform: no nonzero Fourier coefficient of positive degree")]
    UniformDistribution,

    #[error("witness coefficient {value:e} is within the zero tolerance")]
    DegenerateWitness { value: f64 },

    #[error("witness set is not minimal: coefficient of subset {subset:?} is {value:e}")]
    NonMinimalWitness { subset: Vec<usize>, value: f64 },

    #[error("marginal on witness deviates from the parity table by {deviation:e}")]
    NotParityMarginal { deviation: f64 },

    #[error("probability {0} outside [0, 1]")]
    Probability(f64),

    #[error("variable count {n} smaller than arity {k}")]
    TooFewVariables { n: usize, k: usize },

    #[error("assignment has length {got}, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },

    #[error("assignment entry {value} at {index} is not +-1")]
    AssignmentValue { index: usize, value: i8 },

    #[error("model mismatch: {0}")]
    ModelMismatch(&'static str),

    #[error("invalid model config: {0}")]
    Config(String),

    #[error("oracle budget of {budget} samples exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("query returned {value}, outside range {range}")]
    QueryOutOfRange { value: usize, range: usize },

    #[error("query range must be at least 2, got {0}")]
    QueryRange(usize),

    #[error("subset specification is empty or contains an empty/out-of-range set")]
    EmptySubsetSpec,

    #[error("exact expectations unavailable: sample domain too large to enumerate")]
    NotEnumerable,

    #[error("vector length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index space of {entries} entries exceeds the cap of {cap} ({bytes} bytes required)")]
    TooLarge { entries: u64, cap: u64, bytes: u64 },

    #[error("enumerable domain of {size} points exceeds the cap of {cap}")]
    DomainTooLarge { size: u64, cap: u64 },

    #[error("family of {size} distributions exceeds the sign-enumeration cap of {cap}")]
    FamilyTooLarge { size: usize, cap: usize },

    #[error("parity decode failed: inconsistent system")]
    Inconsistent,

    #[error("parity decode failed: {free} free variables exceed the cap of {cap}")]
    Underdetermined { free: usize, cap: usize },

    #[error("no candidate assignments")]
    NoCandidates,

    #[error("every candidate has zero likelihood on the held-out samples")]
    ZeroLikelihood,

    #[error("clause budget {budget} too small: need at least {needed}")]
    BudgetTooSmall { budget: usize, needed: usize },

    #[error("query range {got} below required {needed}")]
    RangeTooSmall { needed: usize, got: usize },

    #[error("dimacs parse error at line {line}: {msg}")]
    Dimacs { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
