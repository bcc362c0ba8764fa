//! Rigid transforms, rotations about arbitrary lines, and support-surface grids.
//!
//! Rotations are kept as 3x3 matrices. Angle parameterizations (axis-angle,
//! yaw/tilt) are derived views only, so that two poses built along different
//! routes can still be compared through [`PoseKey`].

use std::fmt;

use nalgebra::{Matrix3, Rotation3, Unit, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Tolerance used when checking orthonormality of a rotation block.
pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Translation quantum used for pose hashing (m).
pub const POSE_KEY_TRANSLATION_QUANTUM: f64 = 1e-4;
/// Rotation quantum used for pose hashing (rad, applied to matrix entries).
pub const POSE_KEY_ROTATION_QUANTUM: f64 = 1e-3;

/// A rigid motion: `x -> rotation * x + translation`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.translation;
        let r = self.axis_angle();
        write!(
            f,
            "Transform(t=[{:.6}, {:.6}, {:.6}], rotvec=[{:.6}, {:.6}, {:.6}])",
            t.x, t.y, t.z, r.x, r.y, r.z
        )
    }
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a transform, checking that `rotation` is a proper rotation.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        if !is_rotation(&rotation, ORTHONORMAL_TOL) {
            return Err(GeometryError::NotARotation);
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation about `axis` (not necessarily unit, must be nonzero) through the origin.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64) -> Self {
        let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self {
            rotation: *rotation.matrix(),
            translation: Vector3::zeros(),
        }
    }

    /// Pose from a rotation vector (axis times angle, radians) and a translation.
    pub fn from_rotation_vector(rotvec: Vector3<f64>, translation: Vector3<f64>) -> Self {
        let rotation = Rotation3::new(rotvec);
        Self {
            rotation: *rotation.matrix(),
            translation,
        }
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_axis_angle(Vector3::x(), angle)
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_axis_angle(Vector3::y(), angle)
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(Vector3::z(), angle)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn with_translation(mut self, translation: Vector3<f64>) -> Self {
        self.translation = translation;
        self
    }

    /// "Apply `other`, then `self`".
    pub fn compose(&self, other: &Transform) -> Transform {
        Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Rotation vector (axis * angle) of the rotation block, angle in [0, pi].
    pub fn axis_angle(&self) -> Vector3<f64> {
        Rotation3::from_matrix_unchecked(self.rotation).scaled_axis()
    }

    /// Angle of the relative rotation between `self` and `other` (rad).
    pub fn rotation_angle_to(&self, other: &Transform) -> f64 {
        let rel = self.rotation.transpose() * other.rotation;
        let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }

    pub fn translation_distance_to(&self, other: &Transform) -> f64 {
        (self.translation - other.translation).norm()
    }

    /// Largest elementwise difference between the two 3x4 matrices.
    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        let r = (self.rotation - other.rotation).abs().max();
        let t = (self.translation - other.translation).abs().max();
        r.max(t)
    }

    pub fn approx_eq(&self, other: &Transform, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn is_valid(&self) -> bool {
        is_rotation(&self.rotation, ORTHONORMAL_TOL)
    }

    /// Quantized identity used to bucket poses (see [`PoseKey`]).
    pub fn key(&self) -> PoseKey {
        PoseKey::of(self)
    }

    /// Linear interpolation of translation and spherical interpolation of
    /// rotation; `s = 0` gives `self`, `s = 1` gives `other`.
    pub fn interpolate(&self, other: &Transform, s: f64) -> Transform {
        let q0 = UnitQuaternion::from_matrix(&self.rotation);
        let q1 = UnitQuaternion::from_matrix(&other.rotation);
        let q = q0.try_slerp(&q1, s, 1e-12).unwrap_or(if s < 0.5 { q0 } else { q1 });
        Transform {
            rotation: *q.to_rotation_matrix().matrix(),
            translation: self.translation.lerp(&other.translation, s),
        }
    }

    /// Re-orthonormalizes the rotation block (polar projection).
    pub fn renormalized(&self) -> Transform {
        let svd = self.rotation.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * vt;
        if r.determinant() < 0.0 {
            let mut u2 = u;
            u2.column_mut(2).neg_mut();
            r = u2 * vt;
        }
        Transform {
            rotation: r,
            translation: self.translation,
        }
    }
}

pub fn is_rotation(m: &Matrix3<f64>, tol: f64) -> bool {
    if !m.iter().all(|v| v.is_finite()) {
        return false;
    }
    let orth = (m.transpose() * m - Matrix3::identity()).abs().max();
    orth <= tol && (m.determinant() - 1.0).abs() <= tol
}

/// Quantized pose identity: translation to 0.1 mm, rotation entries to 1e-3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PoseKey {
    translation: [i64; 3],
    rotation: [i64; 9],
}

impl PoseKey {
    pub fn of(t: &Transform) -> Self {
        let q = |v: f64, quantum: f64| {
            let r = (v / quantum).round() as i64;
            // keep -0 and 0 in the same bucket
            if r == 0 {
                0
            } else {
                r
            }
        };
        let tr = t.translation();
        let rot = t.rotation();
        let mut rotation = [0i64; 9];
        for (i, v) in rot.iter().enumerate() {
            rotation[i] = q(*v, POSE_KEY_ROTATION_QUANTUM);
        }
        PoseKey {
            translation: [
                q(tr.x, POSE_KEY_TRANSLATION_QUANTUM),
                q(tr.y, POSE_KEY_TRANSLATION_QUANTUM),
                q(tr.z, POSE_KEY_TRANSLATION_QUANTUM),
            ],
            rotation,
        }
    }
}

/// Rotates `pose` rigidly about the line through `point` along `axis`.
pub fn rotate_about_point(
    pose: &Transform,
    point: &Vector3<f64>,
    axis: &Vector3<f64>,
    angle: f64,
) -> Result<Transform, GeometryError> {
    let norm = axis.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(GeometryError::NonUnitAxis(norm));
    }
    let motion = about_line(point, axis, angle);
    Ok(motion.compose(pose))
}

/// World motion rotating about the line through `point` with direction `axis`.
pub(crate) fn about_line(point: &Vector3<f64>, axis: &Vector3<f64>, angle: f64) -> Transform {
    let rot = Transform::from_axis_angle(*axis, angle);
    let shift = point - rot.transform_vector(point);
    rot.with_translation(shift)
}

/// Flat rectangular support surface. Its frame has Z up; the usable area is
/// `[0, extent_x] x [0, extent_y]` in that frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSurface {
    origin: Transform,
    extent_x: f64,
    extent_y: f64,
}

impl SupportSurface {
    /// `corner` is the surface-frame origin in world XY; the plane sits at `height`.
    pub fn new(
        corner: Vector2<f64>,
        yaw: f64,
        height: f64,
        extent_x: f64,
        extent_y: f64,
    ) -> Result<Self, GeometryError> {
        if !(extent_x > 0.0 && extent_y > 0.0) || !extent_x.is_finite() || !extent_y.is_finite() {
            return Err(GeometryError::InvalidExtent);
        }
        if !(corner.x.is_finite() && corner.y.is_finite() && yaw.is_finite() && height.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let origin = Transform::rot_z(yaw).with_translation(Vector3::new(corner.x, corner.y, height));
        Ok(Self {
            origin,
            extent_x,
            extent_y,
        })
    }

    pub fn origin(&self) -> &Transform {
        &self.origin
    }

    pub fn extent_x(&self) -> f64 {
        self.extent_x
    }

    pub fn extent_y(&self) -> f64 {
        self.extent_y
    }

    /// World Z of the surface plane.
    pub fn height(&self) -> f64 {
        self.origin.translation().z
    }

    /// Yaw of the surface frame about world Z.
    pub fn yaw(&self) -> f64 {
        let r = self.origin.rotation();
        r[(1, 0)].atan2(r[(0, 0)])
    }

    /// Surface-frame XY of a world point.
    pub fn to_local(&self, world: &Vector3<f64>) -> Vector2<f64> {
        let p = self.origin.inverse().transform_point(world);
        Vector2::new(p.x, p.y)
    }

    pub fn contains_local(&self, p: &Vector2<f64>, tol: f64) -> bool {
        p.x >= -tol && p.y >= -tol && p.x <= self.extent_x + tol && p.y <= self.extent_y + tol
    }

    /// True if the world point projects inside the surface rectangle.
    pub fn contains_world(&self, world: &Vector3<f64>, tol: f64) -> bool {
        self.contains_local(&self.to_local(world), tol)
    }

    /// World pose of a point on the surface, axes aligned with the surface frame.
    pub fn frame_at(&self, local: &Vector2<f64>) -> Transform {
        self.origin
            .compose(&Transform::from_translation(Vector3::new(local.x, local.y, 0.0)))
    }
}

/// One grid point of a discretized surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementPoint {
    pub position: Vector2<f64>,
    pub world_transform: Transform,
}

/// Regular grid with the given spacing, anchored at the surface origin corner,
/// row-major (X varies fastest).
pub fn discretize_surface(
    surface: &SupportSurface,
    spacing: f64,
) -> Result<Vec<PlacementPoint>, GeometryError> {
    if !(spacing > 0.0) || spacing > surface.extent_x.min(surface.extent_y) + 1e-12 {
        return Err(GeometryError::InvalidSpacing(spacing));
    }
    let count = |extent: f64| (extent / spacing + 1e-9).floor() as usize + 1;
    let (nx, ny) = (count(surface.extent_x), count(surface.extent_y));
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let position = Vector2::new(
                (i as f64 * spacing).min(surface.extent_x),
                (j as f64 * spacing).min(surface.extent_y),
            );
            out.push(PlacementPoint {
                world_transform: surface.frame_at(&position),
                position,
            });
        }
    }
    Ok(out)
}

/// Contact coordinates of an object pose resting on a surface: pivot position,
/// yaw about world Z, and tilt about the rotated X axis.
///
/// A pose `frame * Rz(yaw) * Rx(tilt)` with the pivot at the frame origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactCoords {
    pub pivot: Vector3<f64>,
    pub yaw: f64,
    pub tilt: f64,
}

impl ContactCoords {
    /// Splits an object pose into (pivot, yaw, tilt), yaw measured in world.
    pub fn from_pose(pose: &Transform) -> Self {
        let r = pose.rotation();
        let yaw = r[(1, 0)].atan2(r[(0, 0)]);
        let unyawed = Transform::rot_z(-yaw).rotation() * r;
        let tilt = unyawed[(2, 1)].atan2(unyawed[(1, 1)]);
        Self {
            pivot: *pose.translation(),
            yaw,
            tilt,
        }
    }

    pub fn to_pose(&self) -> Transform {
        Transform::rot_z(self.yaw)
            .compose(&Transform::rot_x(self.tilt))
            .with_translation(self.pivot)
    }
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}
