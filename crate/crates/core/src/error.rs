use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("integer overflow in offset arithmetic")]
    Overflow,

    #[error("relation `{relation}` has arity {arity}; tuple {index} has {found} components, expected {expected}")]
    TupleLength {
        relation: String,
        arity: usize,
        index: usize,
        found: usize,
        expected: usize,
    },

    #[error("relation `{0}` must have arity at least 1")]
    ZeroArity(String),

    #[error("relation `{0}` has no tuple body (it is FULL or EMPTY)")]
    NotTuples(String),

    #[error("coordinates ({i}, {j}) are invalid for relation `{relation}` of arity {arity}")]
    Coordinates {
        relation: String,
        arity: usize,
        i: usize,
        j: usize,
    },

    #[error("relation `{relation}` has arity {expected}, got {found} arguments")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate relation name `{0}`")]
    DuplicateRelation(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("constraint {constraint}: variable {var} out of range for {num_vars} variables")]
    VariableOutOfRange {
        constraint: usize,
        var: usize,
        num_vars: usize,
    },

    #[error("instance must have at least one variable")]
    NoVariables,

    #[error("assignment has {found} values, instance has {expected} variables")]
    AssignmentLength { expected: usize, found: usize },

    #[error("template has no Gaifman edges (every relation is FULL, EMPTY or diagonal)")]
    NoGaifmanEdges,

    #[error("template is disconnected: gcd of Gaifman distances is {0}")]
    Disconnected(u64),

    #[error("search window exceeded {0} before a path was found")]
    WindowExhausted(u64),

    #[error("search space estimate {estimate} exceeds the cap {cap}")]
    SearchCap { estimate: u128, cap: u128 },

    #[error("invalid periodic map: {0}")]
    InvalidMap(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
