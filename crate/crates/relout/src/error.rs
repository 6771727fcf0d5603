use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("invalid free factor system: {0}")]
    InvalidSystem(String),
    #[error("inverse images do not invert the automorphism: {0}")]
    UnverifiedInverse(String),
    #[error("invalid marked graph: {0}")]
    InvalidGraph(String),
    #[error("element is elliptic")]
    EllipticElement,
    #[error("non-positive scale factor")]
    NonPositiveScale,
    #[error("collapsing this forest leaves the space (face at infinity)")]
    FaceAtInfinity,
    #[error("edge set is not a forest")]
    NotAForest,
    #[error("linear program has an empty feasible region")]
    EmptySimplex,
    #[error("zero matrix")]
    ZeroMatrix,
    #[error("transition matrix is reducible")]
    ReducibleMatrix,
    #[error("map is not expanding (Lip <= 1)")]
    NotExpanding,
    #[error("map is not a train track: {0}")]
    NotTrainTrack(String),
    #[error("no train track found within the budget: {0}")]
    TrainTrackFailure(String),
    #[error("automorphism is reducible: {0}")]
    ReducibleDetected(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("point is not in the atlas")]
    NotInAtlas,
}

pub type Result<T> = std::result::Result<T, Error>;
