use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a polygon needs at least 3 vertices, got {count}")]
    TooFewVertices { count: usize },
    #[error("vertex {index} duplicates an earlier vertex")]
    DuplicateVertex { index: usize },
    #[error("polygon is not strictly convex at vertex {index}")]
    NonConvex { index: usize },
    #[error("point ({x}, {y}) is not on the polygon boundary")]
    NotOnBoundary { x: f64, y: f64 },
    #[error("chord endpoints coincide")]
    DegenerateChord,
    #[error("cut area {area} must lie strictly between 0 and half the polygon area {half}")]
    AreaOutOfRange { area: f64, half: f64 },
    #[error("map is not smooth here: an orbit point lies on a polygon vertex")]
    VertexNonSmooth,
    #[error("chord endpoint lies on a polygon vertex; side assignment is ambiguous")]
    VertexAmbiguous,
    #[error("chord endpoints lie on the same side")]
    SameSide,
    #[error("invalid bracket: {reason}")]
    BracketInvalid { reason: String },
    #[error("no closed orbit: displacement does not change sign on the bracket")]
    NoClosure,
    #[error("lines are parallel")]
    ParallelLines,
    #[error("projective map is singular")]
    SingularMap,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid polygon file: {0}")]
    Parse(String),
}
