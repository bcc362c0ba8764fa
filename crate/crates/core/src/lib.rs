//! Planning engine for reposing long, heavy objects with one arm.
//!
//! The planner combines regrasping at stable placements with constrained
//! drooping: one end of the object stays on the support surface while the
//! gripper height changes, letting the object rotate in hand under gravity.
//! Planning happens on a manipulation graph whose nodes are grasp poses on
//! contact-preserving object poses; Cartesian interpolation then connects the
//! critical poses of the searched path.

pub mod error;
pub mod geometry;
pub mod graph;
pub mod mechanics;
pub mod motion;
pub mod output;
pub mod planner;
pub mod sampling;
pub mod scene;

pub use error::{GeometryError, GraphError, MechanicsError, MotionError, SamplingError, SceneError};
pub use geometry::{discretize_surface, rotate_about_point, PlacementPoint, SupportSurface, Transform};
pub use scene::{load_scene, object_lowest_point, Scene, TaskSpec};
