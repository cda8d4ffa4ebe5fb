use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("site {site}, entry {entry}: invalid toppling vector {delta:?}: {reason}")]
    InvalidTopplingVector {
        site: usize,
        entry: usize,
        delta: Vec<i64>,
        reason: String,
    },
    #[error("{context}: probabilities sum to {sum}, expected exactly 1")]
    ProbabilitiesDoNotSumToOne { context: String, sum: String },
    #[error("site {site}, entry {entry}: duplicates support entry {first}")]
    DuplicateSupportVector {
        site: usize,
        entry: usize,
        first: usize,
    },
    #[error("site {site}: empty toppling support")]
    EmptySupport { site: usize },
    #[error("{context}: invalid probability {value}: {reason}")]
    InvalidProbability {
        context: String,
        value: String,
        reason: String,
    },
    #[error("cannot parse rational {input:?}: {reason}")]
    ParseRational { input: String, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("site index {value} out of range 1..={n_sites}")]
    InvalidSite { value: usize, n_sites: usize },
    #[error("invalid configuration {grains:?}: every site needs at least one grain")]
    InvalidConfiguration { grains: Vec<i64> },
    #[error("site {site} is not unstable")]
    SiteNotUnstable { site: usize },
    #[error("explicit deck of site {site} has no card at position {position}")]
    ExplicitDeckExhausted { site: usize, position: usize },
    #[error("stabilization exceeded fuel of {fuel} topplings")]
    FuelExhausted { fuel: u64 },
    #[error("model is not dissipative: sites {witness:?} never lose grains outside the set")]
    NotDissipative { witness: Vec<usize> },
    #[error("state space exceeds cap of {cap} states")]
    StateSpaceTooLarge { cap: usize },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("stationary system is singular: {reason}")]
    SingularSystem { reason: String },
    #[error("recurrent classes differ between addition distributions {first} and {other}")]
    RecurrentClassMismatch { first: usize, other: usize },
    #[error("no recurrent class selected: {reason}")]
    NoRecurrentClass { reason: String },
    #[error("invalid routing for site {site}: {reason}")]
    InvalidRouting { site: usize, reason: String },
    #[error(
        "site {site}: the all-silent Bernoulli outcome has probability > 0 and cannot be rejected"
    )]
    NullTopplingNotRepresentable { site: usize },
    #[error("invalid multigraph: {reason}")]
    InvalidGraph { reason: String },
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
