use thiserror::Error;

/// Errors surfaced by the library. Exact arithmetic has no tolerance knobs,
/// so every failure is structural: a malformed input, a violated precondition,
/// or an inconclusive randomized search.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("containment violation: {0}")]
    ContainmentViolation(String),
    #[error("induced map is not well-defined: {0}")]
    NotWellDefined(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("unknown arrow {0}")]
    UnknownArrow(String),
    #[error("invalid quiver: {0}")]
    InvalidQuiver(String),
    #[error("quiver has a loop at {0}")]
    LoopPresent(String),
    #[error("2-cycle at vertex {0}")]
    TwoCycleAtK(String),
    #[error("not a 2-cycle: {0}")]
    NotTwoCycle(String),
    #[error("overlapping 2-cycle pairs: {0}")]
    OverlappingPairs(String),
    #[error("not a cycle: {0}")]
    NotACycle(String),
    #[error("arrows not composable: {0}")]
    ArrowsNotComposable(String),
    #[error("quiver mismatch: {0}")]
    QuiverMismatch(String),
    #[error("path is not composable: {0}")]
    BadPath(String),
    #[error("degree overflow: nonzero term of degree {degree} discarded (bound {bound})")]
    DegreeOverflow { degree: usize, bound: usize },
    #[error("potential is not splittable: {0}")]
    NotSplittable(String),
    #[error("degenerate quadratic part: {0}")]
    DegenerateQuadraticPart(String),
    #[error("relation violated at arrow {arrow}: entry ({row},{col}) = {value}")]
    RelationViolated {
        arrow: String,
        row: usize,
        col: usize,
        value: String,
    },
    #[error("representation is not nilpotent")]
    NotNilpotent,
    #[error("representations live over different QPs: {0}")]
    QpMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("not a morphism: {0}")]
    NotAMorphism(String),
    #[error("isomorphism test inconclusive over a small field")]
    Inconclusive,
    #[error("instance generation exhausted its retry budget: {0}")]
    GenerationExhausted(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
