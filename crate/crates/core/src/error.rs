use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("rotation block is not orthonormal with determinant +1")]
    NotARotation,
    #[error("non-finite value in geometric input")]
    NonFinite,
    #[error("rotation axis is not unit length (norm {0})")]
    NonUnitAxis(f64),
    #[error("surface extents must be positive")]
    InvalidExtent,
    #[error("invalid grid spacing {0}")]
    InvalidSpacing(f64),
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl SceneError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        SceneError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanicsError {
    #[error("inclination after transition leaves [0, 90] deg (init {init} rad, target {target} rad)")]
    AngleOutOfRange { init: f64, target: f64 },
    #[error("grasp point {0} m from the pivot is too close to carry load")]
    DegenerateGrasp(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("rotation step {0} rad outside its allowed range")]
    StepOutOfRange(f64),
    #[error("grasp set is empty")]
    EmptyGraspSet,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no path between start and goal")]
    NoPath,
    #[error("selector did not resolve: {0}")]
    UnresolvedSelector(String),
    #[error("graph cache was built for scene {found}, expected {expected}")]
    CacheMismatch { expected: String, found: String },
    #[error("unsupported graph cache version {0}")]
    CacheVersion(u32),
    #[error("graph cache I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("graph cache parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotionError {
    #[error("droop condition violated at waypoint {index}")]
    DroopConditionViolated { index: usize },
    #[error("object lost contact at waypoint {index} (gap {gap} m)")]
    ContactLost { index: usize, gap: f64 },
    #[error("gripper outside the reachable workspace at waypoint {index}")]
    ReachExceeded { index: usize },
    #[error("gripper body hits the surface at waypoint {index}")]
    CollisionInTransit { index: usize },
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("edge {edge} ({from} -> {to}): {source}")]
    Segment {
        edge: usize,
        from: usize,
        to: usize,
        #[source]
        source: Box<MotionError>,
    },
    #[error("assembled trajectory failed verification: {0}")]
    Verification(String),
}
