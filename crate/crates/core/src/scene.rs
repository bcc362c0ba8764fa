//! Object, gripper, robot and scene models plus the scene configuration file.
//!
//! Object frame convention: the pivot (the end that stays on the surface) is
//! the frame origin and the long axis runs along +Y. A stick is modeled as
//! the segment from the origin to `(0, length, 0)`; its diameter only enters
//! jaw widths and collision extents. A board occupies
//! `[-width/2, width/2] x [0, length] x [0, thickness]`.
//!
//! Gripper frame convention: origin at the grasp point between the finger
//! pads, +Z is the approach axis (wrist towards fingertips), +X is the
//! jaw-closing axis, which is also the axis the object droops about.

use std::fs;
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::SceneError;
use crate::geometry::{SupportSurface, Transform};

pub const DEFAULT_GRAVITY: f64 = 9.81;
/// Tolerance for non-penetration checks (m).
pub const PENETRATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ObjectShape {
    Stick { length: f64, diameter: f64 },
    Board { length: f64, width: f64, thickness: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectModel {
    pub name: String,
    pub shape: ObjectShape,
    pub mass: f64,
    pub com_offset: Vector3<f64>,
}

impl ObjectModel {
    pub fn length(&self) -> f64 {
        match self.shape {
            ObjectShape::Stick { length, .. } | ObjectShape::Board { length, .. } => length,
        }
    }

    /// Geometric center, used as the default center of mass.
    pub fn centroid(shape: &ObjectShape) -> Vector3<f64> {
        match *shape {
            ObjectShape::Stick { length, .. } => Vector3::new(0.0, length / 2.0, 0.0),
            ObjectShape::Board {
                length, thickness, ..
            } => Vector3::new(0.0, length / 2.0, thickness / 2.0),
        }
    }

    /// Points whose convex hull is the contact geometry of the object.
    pub fn hull_points(&self) -> Vec<Vector3<f64>> {
        match self.shape {
            ObjectShape::Stick { length, .. } => {
                vec![Vector3::zeros(), Vector3::new(0.0, length, 0.0)]
            }
            ObjectShape::Board {
                length,
                width,
                thickness,
            } => {
                let mut pts = Vec::with_capacity(8);
                for &z in &[0.0, thickness] {
                    for &y in &[0.0, length] {
                        for &x in &[-width / 2.0, width / 2.0] {
                            pts.push(Vector3::new(x, y, z));
                        }
                    }
                }
                pts
            }
        }
    }

    /// Thickness of the object across the gripper jaws.
    pub fn grip_thickness(&self) -> f64 {
        match self.shape {
            ObjectShape::Stick { diameter, .. } => diameter,
            ObjectShape::Board { thickness, .. } => thickness,
        }
    }

    fn contains(&self, p: &Vector3<f64>) -> bool {
        let eps = 1e-12;
        match self.shape {
            ObjectShape::Stick { length, diameter } => {
                p.y >= -eps
                    && p.y <= length + eps
                    && p.x.abs() <= diameter / 2.0 + eps
                    && p.z.abs() <= diameter / 2.0 + eps
            }
            ObjectShape::Board {
                length,
                width,
                thickness,
            } => {
                p.y >= -eps
                    && p.y <= length + eps
                    && p.x.abs() <= width / 2.0 + eps
                    && p.z >= -eps
                    && p.z <= thickness + eps
            }
        }
    }

    fn validate(&self) -> Result<(), SceneError> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SceneError::invalid(field, format!("must be > 0, got {v}")))
            }
        };
        positive("object.mass", self.mass)?;
        match self.shape {
            ObjectShape::Stick { length, diameter } => {
                positive("object.length", length)?;
                positive("object.diameter", diameter)?;
            }
            ObjectShape::Board {
                length,
                width,
                thickness,
            } => {
                positive("object.length", length)?;
                positive("object.width", width)?;
                positive("object.thickness", thickness)?;
            }
        }
        if !self.contains(&self.com_offset) {
            return Err(SceneError::invalid(
                "object.com_offset",
                "center of mass lies outside the object's bounding volume",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    pub ee_length: f64,
    pub jaw_max_open: f64,
    pub grip_force: f64,
    /// Effective torsional lever of the soft pads (m).
    pub pad_torsion_coefficient: f64,
    /// Body box extents (x, y, z); the box spans gripper-frame Z in
    /// `[-ee_length, -ee_length + body_box.z]`, i.e. it starts at the flange.
    pub body_box: Vector3<f64>,
}

impl GripperModel {
    /// Friction torque the pads can resist before the object droops (N m).
    pub fn pad_friction_torque_limit(&self) -> f64 {
        self.pad_torsion_coefficient * self.grip_force
    }

    /// Body box corners in the gripper frame.
    pub fn body_corners(&self) -> [Vector3<f64>; 8] {
        let b = self.body_box;
        let mut out = [Vector3::zeros(); 8];
        let mut i = 0;
        for &z in &[-self.ee_length, -self.ee_length + b.z] {
            for &y in &[-b.y / 2.0, b.y / 2.0] {
                for &x in &[-b.x / 2.0, b.x / 2.0] {
                    out[i] = Vector3::new(x, y, z);
                    i += 1;
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), SceneError> {
        if !(self.ee_length > 0.0) {
            return Err(SceneError::invalid("gripper.ee_length", "must be > 0"));
        }
        if !(self.jaw_max_open > 0.0) {
            return Err(SceneError::invalid("gripper.jaw_max_open", "must be > 0"));
        }
        if !(self.grip_force >= 0.0) {
            return Err(SceneError::invalid("gripper.grip_force", "must be >= 0"));
        }
        if !(self.pad_torsion_coefficient >= 0.0) {
            return Err(SceneError::invalid("gripper.pad_torsion_coefficient", "must be >= 0"));
        }
        if !self.body_box.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return Err(SceneError::invalid("gripper.body_box", "extents must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub base_pose: Transform,
    pub reach_min: f64,
    pub reach_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    /// Largest vertical force the arm may carry at the gripper (N).
    pub payload: f64,
}

impl RobotModel {
    /// Reachability proxy: point inside the spherical shell around the base and within the Z band.
    pub fn reaches(&self, p: &Vector3<f64>) -> bool {
        let d = (p - self.base_pose.translation()).norm();
        d >= self.reach_min && d <= self.reach_max && p.z >= self.z_min && p.z <= self.z_max
    }

    fn validate(&self) -> Result<(), SceneError> {
        if !(self.reach_min >= 0.0) {
            return Err(SceneError::invalid("robot.reach_min", "must be >= 0"));
        }
        if !(self.reach_max > self.reach_min) {
            return Err(SceneError::invalid("robot.reach_max", "must exceed reach_min"));
        }
        if !(self.z_max > self.z_min) {
            return Err(SceneError::invalid("robot.z_max", "must exceed z_min"));
        }
        if !(self.payload > 0.0) {
            return Err(SceneError::invalid("robot.payload", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub surface: SupportSurface,
    pub object: ObjectModel,
    pub gripper: GripperModel,
    pub robot: RobotModel,
    pub gravity: f64,
}

impl Scene {
    pub fn weight(&self) -> f64 {
        self.object.mass * self.gravity
    }

    pub fn from_toml_str(text: &str) -> Result<Scene, SceneError> {
        let raw: SceneFile = toml::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))?;
        raw.into_scene()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&SceneFile::from_scene(self)).expect("scene serializes")
    }

    /// Stable content hash of the scene (hex sha256 of its canonical TOML form).
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_toml_string().as_bytes()))
    }
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SceneError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scene::from_toml_str(&text)
}

/// World point of the object with the smallest Z.
///
/// Ties (within 1e-9 m) go to the point with the smaller world Y, then X, so a
/// flat stick reports its end nearer -Y.
pub fn object_lowest_point(object: &ObjectModel, pose: &Transform) -> Vector3<f64> {
    let mut best: Option<Vector3<f64>> = None;
    for p in object.hull_points() {
        let w = pose.transform_point(&p);
        best = Some(match best {
            None => w,
            Some(b) => {
                let dz = w.z - b.z;
                if dz < -1e-9 || (dz.abs() <= 1e-9 && (w.y, w.x) < (b.y, b.x)) {
                    w
                } else {
                    b
                }
            }
        });
    }
    best.expect("object has hull points")
}

/// Start and goal object poses for one reposing task.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec {
    pub start_pose: Transform,
    pub goal_pose: Transform,
}

impl TaskSpec {
    pub fn new(scene: &Scene, start_pose: Transform, goal_pose: Transform) -> Result<Self, SceneError> {
        check_resting_pose(scene, &start_pose, "task.start")?;
        check_resting_pose(scene, &goal_pose, "task.goal")?;
        Ok(Self {
            start_pose,
            goal_pose,
        })
    }
}

fn check_resting_pose(scene: &Scene, pose: &Transform, field: &str) -> Result<(), SceneError> {
    let low = object_lowest_point(&scene.object, pose);
    let h = scene.surface.height();
    if low.z < h - PENETRATION_TOL {
        return Err(SceneError::invalid(field, format!("object penetrates the surface by {:.6} m", h - low.z)));
    }
    if low.z > h + 1e-3 {
        return Err(SceneError::invalid(field, "object is not in contact with the surface"));
    }
    if !scene.surface.contains_world(&low, 1e-9) {
        return Err(SceneError::invalid(field, "contact point lies outside the surface extents"));
    }
    Ok(())
}

/// An object pose as written in configuration files: either a raw transform
/// or contact coordinates relative to the surface frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PoseSpec {
    Contact {
        /// Pivot position in surface coordinates (m).
        placement: [f64; 2],
        yaw_deg: f64,
        tilt_deg: f64,
    },
    Raw {
        position: [f64; 3],
        axis_angle_deg: [f64; 3],
    },
}

impl PoseSpec {
    pub fn resolve(&self, surface: &SupportSurface) -> Transform {
        match *self {
            PoseSpec::Contact {
                placement,
                yaw_deg,
                tilt_deg,
            } => surface
                .frame_at(&Vector2::new(placement[0], placement[1]))
                .compose(&Transform::rot_z(yaw_deg.to_radians()))
                .compose(&Transform::rot_x(tilt_deg.to_radians())),
            PoseSpec::Raw {
                position,
                axis_angle_deg,
            } => Transform::from_rotation_vector(
                Vector3::from(axis_angle_deg).map(f64::to_radians),
                Vector3::from(position),
            ),
        }
    }
}

// ---- configuration file ----

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    surface: SurfaceSection,
    object: ObjectSection,
    gripper: GripperSection,
    robot: RobotSection,
    #[serde(default)]
    gravity: Option<GravitySection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SurfaceSection {
    corner: [f64; 2],
    #[serde(default)]
    yaw_deg: f64,
    height: f64,
    extent_x: f64,
    extent_y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectSection {
    name: String,
    shape: String,
    length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    thickness: Option<f64>,
    mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    com_offset: Option<[f64; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GripperSection {
    ee_length: f64,
    jaw_max_open: f64,
    grip_force: f64,
    pad_torsion_coefficient: f64,
    body_box: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotSection {
    base_position: [f64; 3],
    #[serde(default)]
    base_yaw_deg: f64,
    reach_min: f64,
    reach_max: f64,
    z_min: f64,
    z_max: f64,
    payload: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GravitySection {
    g: f64,
}

impl SceneFile {
    fn into_scene(self) -> Result<Scene, SceneError> {
        let s = &self.surface;
        let surface = SupportSurface::new(
            Vector2::from(s.corner),
            s.yaw_deg.to_radians(),
            s.height,
            s.extent_x,
            s.extent_y,
        )
        .map_err(|e| SceneError::invalid("surface", e.to_string()))?;

        let o = &self.object;
        let need = |field: &str, v: Option<f64>| {
            v.ok_or_else(|| SceneError::invalid(format!("object.{field}"), "missing for this shape"))
        };
        let forbid = |field: &str, v: Option<f64>| match v {
            Some(_) => Err(SceneError::invalid(format!("object.{field}"), "not used by this shape")),
            None => Ok(()),
        };
        let shape = match o.shape.as_str() {
            "stick" => {
                forbid("width", o.width)?;
                forbid("thickness", o.thickness)?;
                ObjectShape::Stick {
                    length: o.length,
                    diameter: need("diameter", o.diameter)?,
                }
            }
            "board" => {
                forbid("diameter", o.diameter)?;
                ObjectShape::Board {
                    length: o.length,
                    width: need("width", o.width)?,
                    thickness: need("thickness", o.thickness)?,
                }
            }
            other => {
                return Err(SceneError::invalid(
                    "object.shape",
                    format!("unknown shape `{other}` (expected `stick` or `board`)"),
                ))
            }
        };
        let com_offset = o
            .com_offset
            .map(Vector3::from)
            .unwrap_or_else(|| ObjectModel::centroid(&shape));
        let object = ObjectModel {
            name: o.name.clone(),
            shape,
            mass: o.mass,
            com_offset,
        };
        object.validate()?;

        let g = &self.gripper;
        let gripper = GripperModel {
            ee_length: g.ee_length,
            jaw_max_open: g.jaw_max_open,
            grip_force: g.grip_force,
            pad_torsion_coefficient: g.pad_torsion_coefficient,
            body_box: Vector3::from(g.body_box),
        };
        gripper.validate()?;

        let r = &self.robot;
        let robot = RobotModel {
            base_pose: Transform::rot_z(r.base_yaw_deg.to_radians())
                .with_translation(Vector3::from(r.base_position)),
            reach_min: r.reach_min,
            reach_max: r.reach_max,
            z_min: r.z_min,
            z_max: r.z_max,
            payload: r.payload,
        };
        robot.validate()?;

        let gravity = self.gravity.map(|g| g.g).unwrap_or(DEFAULT_GRAVITY);
        if !(gravity > 0.0 && gravity.is_finite()) {
            return Err(SceneError::invalid("gravity.g", "must be > 0"));
        }
        Ok(Scene {
            surface,
            object,
            gripper,
            robot,
            gravity,
        })
    }

    fn from_scene(scene: &Scene) -> Self {
        let corner = scene.surface.origin().translation();
        let (shape, diameter, width, thickness) = match scene.object.shape {
            ObjectShape::Stick { diameter, .. } => ("stick", Some(diameter), None, None),
            ObjectShape::Board {
                width, thickness, ..
            } => ("board", None, Some(width), Some(thickness)),
        };
        let base = scene.robot.base_pose;
        let base_rot = base.rotation();
        SceneFile {
            surface: SurfaceSection {
                corner: [corner.x, corner.y],
                yaw_deg: scene.surface.yaw().to_degrees(),
                height: scene.surface.height(),
                extent_x: scene.surface.extent_x(),
                extent_y: scene.surface.extent_y(),
            },
            object: ObjectSection {
                name: scene.object.name.clone(),
                shape: shape.to_string(),
                length: scene.object.length(),
                diameter,
                width,
                thickness,
                mass: scene.object.mass,
                com_offset: Some(scene.object.com_offset.into()),
            },
            gripper: GripperSection {
                ee_length: scene.gripper.ee_length,
                jaw_max_open: scene.gripper.jaw_max_open,
                grip_force: scene.gripper.grip_force,
                pad_torsion_coefficient: scene.gripper.pad_torsion_coefficient,
                body_box: scene.gripper.body_box.into(),
            },
            robot: RobotSection {
                base_position: (*base.translation()).into(),
                base_yaw_deg: base_rot[(1, 0)].atan2(base_rot[(0, 0)]).to_degrees(),
                reach_min: scene.robot.reach_min,
                reach_max: scene.robot.reach_max,
                z_min: scene.robot.z_min,
                z_max: scene.robot.z_max,
                payload: scene.robot.payload,
            },
            gravity: Some(GravitySection { g: scene.gravity }),
        }
    }
}
