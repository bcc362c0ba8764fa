//! Contact-preserving pose bouquets, stable placements, grasp annotations and
//! feasibility filtering of candidate graph nodes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{SamplingError, SceneError};
use crate::geometry::{ContactCoords, PlacementPoint, Transform};
use crate::mechanics::{check_payload, gripper_load_share, Support};
use crate::scene::Scene;

const STEP_TOL: f64 = 1e-9;
/// Allowed penetration of the gripper body into the surface plane (m).
const CLEARANCE_TOL: f64 = 1e-9;

/// Pose discretization used when sampling graph nodes. Angles in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub grid_spacing: f64,
    pub x_steps: Vec<f64>,
    pub z_steps: Vec<f64>,
    pub stable_yaws: Vec<f64>,
}

impl Default for Discretization {
    fn default() -> Self {
        let deg = |v: &[f64]| v.iter().map(|d| d.to_radians()).collect::<Vec<_>>();
        Self {
            grid_spacing: 0.05,
            x_steps: deg(&[0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0]),
            z_steps: (0..12).map(|i| (30.0 * i as f64).to_radians()).collect(),
            stable_yaws: deg(&[0.0, 90.0, 180.0, 270.0]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspAnnotation {
    pub id: u32,
    /// Gripper pose in the object frame.
    pub grasp_in_object: Transform,
    pub phi: f64,
    /// Distance of the grasp point from the pivot end along the object axis.
    pub grasp_point_offset: f64,
    pub jaw_width: f64,
}

impl GraspAnnotation {
    /// Builds an annotation from a gripper pose in the object frame, deriving
    /// the in-hand angle and the grasp-point offset.
    pub fn from_pose(scene: &Scene, id: u32, grasp_in_object: Transform, jaw_width: f64) -> Result<Self, SceneError> {
        let field = |f: &str| format!("grasp[{id}].{f}");
        if !(jaw_width > 0.0) || jaw_width > scene.gripper.jaw_max_open {
            return Err(SceneError::invalid(
                field("jaw_width"),
                format!("must be in (0, {}]", scene.gripper.jaw_max_open),
            ));
        }
        let offset = grasp_in_object.translation().y;
        let length = scene.object.length();
        if !(-1e-9..=length + 1e-9).contains(&offset) {
            return Err(SceneError::invalid(field("position"), format!("grasp point must lie within [0, {length}] along the object")));
        }
        let approach = grasp_in_object.rotation().column(2).into_owned();
        let phi = (-approach.y).clamp(-1.0, 1.0).acos();
        Ok(Self {
            id,
            grasp_in_object,
            phi,
            grasp_point_offset: offset.clamp(0.0, length),
            jaw_width,
        })
    }

    /// Grasp at the free end, on the line through the pivot, with approach
    /// axis in the object's YZ plane, `phi` measured from the direction
    /// towards the pivot.
    pub fn at_end(scene: &Scene, id: u32, phi: f64) -> Self {
        let pose = Transform::rot_x(phi + FRAC_PI_2).with_translation(Vector3::new(0.0, scene.object.length(), 0.0));
        Self::from_pose(scene, id, pose, scene.object.grip_thickness())
            .expect("end grasp within object and jaw limits")
    }
}

/// Five end grasps with in-hand angles 0, 45, 90, 135 and 180 degrees (ids 1..=5).
pub fn default_grasp_set(scene: &Scene) -> Vec<GraspAnnotation> {
    (0..5)
        .map(|i| GraspAnnotation::at_end(scene, i + 1, (45.0 * i as f64).to_radians()))
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraspFile {
    grasp: Vec<GraspRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraspRecord {
    id: u32,
    position: [f64; 3],
    axis_angle_deg: [f64; 3],
    jaw_width: f64,
}

pub fn parse_grasp_set(scene: &Scene, text: &str) -> Result<Vec<GraspAnnotation>, SceneError> {
    let file: GraspFile = toml::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
    if file.grasp.is_empty() {
        return Err(SceneError::invalid("grasp", "at least one grasp is required"));
    }
    let mut out: Vec<GraspAnnotation> = Vec::with_capacity(file.grasp.len());
    for rec in file.grasp {
        if out.iter().any(|g| g.id == rec.id) {
            return Err(SceneError::invalid(format!("grasp[{}].id", rec.id), "duplicate id"));
        }
        let pose = Transform::from_rotation_vector(
            Vector3::from(rec.axis_angle_deg).map(f64::to_radians),
            Vector3::from(rec.position),
        );
        out.push(GraspAnnotation::from_pose(scene, rec.id, pose, rec.jaw_width)?);
    }
    Ok(out)
}

pub fn load_grasp_set(scene: &Scene, path: impl AsRef<Path>) -> Result<Vec<GraspAnnotation>, SceneError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_grasp_set(scene, &text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BouquetPose {
    pub pose: Transform,
    pub x_rotation: f64,
    pub z_rotation: f64,
}

/// Object poses sharing one placement point on the surface.
#[derive(Clone, Debug, PartialEq)]
pub struct Bouquet {
    pub placement: PlacementPoint,
    pub poses: Vec<BouquetPose>,
}

/// Flat pose at `placement`, tilted about the placement X axis by each x step,
/// then turned about the placement Z axis by each z step. X steps vary slowest.
pub fn generate_bouquet(
    _scene: &Scene,
    placement: &PlacementPoint,
    x_steps: &[f64],
    z_steps: &[f64],
) -> Result<Bouquet, SamplingError> {
    for &x in x_steps {
        if !(-STEP_TOL..=FRAC_PI_2 + STEP_TOL).contains(&x) {
            return Err(SamplingError::StepOutOfRange(x));
        }
    }
    for &z in z_steps {
        if !(-STEP_TOL..2.0 * PI - STEP_TOL).contains(&z) {
            return Err(SamplingError::StepOutOfRange(z));
        }
    }
    let mut poses = Vec::with_capacity(x_steps.len() * z_steps.len());
    for &x in x_steps {
        let tilted = Transform::rot_x(x);
        for &z in z_steps {
            let pose = placement
                .world_transform
                .compose(&Transform::rot_z(z))
                .compose(&tilted);
            poses.push(BouquetPose {
                pose,
                x_rotation: x,
                z_rotation: z,
            });
        }
    }
    Ok(Bouquet {
        placement: placement.clone(),
        poses,
    })
}

/// Flat object poses at each placement and yaw whose footprint lies on the surface.
pub fn sample_stable_placements(scene: &Scene, placements: &[PlacementPoint], yaw_steps: &[f64]) -> Vec<Transform> {
    let hull = scene.object.hull_points();
    let mut out = Vec::new();
    for p in placements {
        for &yaw in yaw_steps {
            let pose = p.world_transform.compose(&Transform::rot_z(yaw));
            let inside = hull
                .iter()
                .all(|h| scene.surface.contains_world(&pose.transform_point(h), 1e-9));
            if inside {
                out.push(pose);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Drooping,
    Regrasp,
    Connecting,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Drooping => "drooping",
            NodeKind::Regrasp => "regrasp",
            NodeKind::Connecting => "connecting",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectReason {
    Unreachable,
    Collision,
    Payload,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Unreachable => "unreachable",
            RejectReason::Collision => "collision",
            RejectReason::Payload => "payload",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateNode {
    pub object_pose: Transform,
    pub grasp: GraspAnnotation,
    pub gripper_world: Transform,
    pub kind: NodeKind,
    pub feasible: bool,
    pub reject_reason: Option<RejectReason>,
}

impl CandidateNode {
    pub fn contact(&self) -> ContactCoords {
        ContactCoords::from_pose(&self.object_pose)
    }
}

/// One candidate per grasp, gripper pose by composition; feasibility pending.
pub fn annotate_grasps(
    object_pose: &Transform,
    grasp_set: &[GraspAnnotation],
    kind: NodeKind,
) -> Result<Vec<CandidateNode>, SamplingError> {
    if grasp_set.is_empty() {
        return Err(SamplingError::EmptyGraspSet);
    }
    Ok(grasp_set
        .iter()
        .map(|g| CandidateNode {
            object_pose: *object_pose,
            grasp: g.clone(),
            gripper_world: object_pose.compose(&g.grasp_in_object),
            kind,
            feasible: true,
            reject_reason: None,
        })
        .collect())
}

/// Lowest world Z of the gripper (origin and body box) minus the surface height.
pub fn gripper_clearance(scene: &Scene, gripper_world: &Transform) -> f64 {
    let origin_z = gripper_world.translation().z;
    let lowest = scene
        .gripper
        .body_corners()
        .iter()
        .map(|c| gripper_world.transform_point(c).z)
        .fold(origin_z, f64::min);
    lowest - scene.surface.height()
}

/// Why this candidate is infeasible, if it is.
pub fn rejection(scene: &Scene, c: &CandidateNode) -> Option<RejectReason> {
    if gripper_clearance(scene, &c.gripper_world) < -CLEARANCE_TOL {
        return Some(RejectReason::Collision);
    }
    if !scene.robot.reaches(c.gripper_world.translation()) {
        return Some(RejectReason::Unreachable);
    }
    let support = Support::Held {
        grasp_offset: c.grasp.grasp_point_offset,
    };
    match gripper_load_share(scene, &c.object_pose, support) {
        Ok(f) if check_payload(scene, f) => None,
        _ => Some(RejectReason::Payload),
    }
}

/// Marks every candidate feasible or not; infeasible ones keep their reason.
pub fn filter_feasible(scene: &Scene, candidates: Vec<CandidateNode>) -> Vec<CandidateNode> {
    candidates
        .into_iter()
        .map(|mut c| {
            c.reject_reason = rejection(scene, &c);
            c.feasible = c.reject_reason.is_none();
            c
        })
        .collect()
}
