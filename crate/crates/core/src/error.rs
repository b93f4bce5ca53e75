use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed record in a text or binary file. `location` is
    /// `file:line` for text formats and `file@offset` for binary ones.
    #[error("{location}: {message}")]
    Parse { location: String, message: String },

    #[error("triangle {triangle} references vertex {index}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("alignment is degenerate: {0}")]
    AlignmentDegenerate(String),

    #[error("mesh has no non-degenerate triangles")]
    NoSurface,

    #[error("triangle has zero area")]
    DegenerateTriangle,

    #[error("degenerate landmarks: {0}")]
    DegenerateLandmarks(String),

    #[error("face region is empty (centre [{:.3}, {:.3}, {:.3}], radius {radius:.3})", centre[0], centre[1], centre[2])]
    EmptyRegion { centre: [f64; 3], radius: f64 },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate camera configuration: {0}")]
    DegenerateCamera(String),

    #[error("linear system is singular: {0}")]
    SingularSystem(String),

    #[error("{given} images exceed the capacity of {capacity} slots")]
    Capacity { given: usize, capacity: usize },

    #[error("cascade stage {stage}: {source}")]
    CascadeStage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("manifest {location}: {message}")]
    Manifest { location: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
