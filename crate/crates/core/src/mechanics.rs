//! Quasi-static drooping mechanics: gravity torque about the jaw axis, the
//! droop predicate, grasp-transition height distances, and the split of the
//! object weight between gripper and support surface.

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::MechanicsError;
use crate::geometry::Transform;
use crate::scene::{GripperModel, Scene};

/// Slack on angle range checks (rad).
const ANGLE_TOL: f64 = 1e-9;

/// Gripper inclination, in-hand angle and CoM distance for one grasp.
///
/// * `theta`: angle between the approach axis and straight down, in `[0, pi/2]`.
/// * `phi`: angle between the approach axis and the object axis (pointing from
///   the grasp towards the pivot); `0` means the object extends the gripper.
/// * `r_com`: distance from the grasp point to the object's center of mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspState {
    pub theta: f64,
    pub phi: f64,
    pub r_com: f64,
}

impl GraspState {
    pub fn new(theta: f64, phi: f64, r_com: f64) -> Option<Self> {
        let ok = (-ANGLE_TOL..=FRAC_PI_2 + ANGLE_TOL).contains(&theta)
            && (-ANGLE_TOL..=std::f64::consts::PI + ANGLE_TOL).contains(&phi)
            && r_com >= 0.0;
        ok.then_some(Self { theta, phi, r_com })
    }

    /// Derives the state from world poses of object and gripper.
    pub fn from_poses(scene: &Scene, object_pose: &Transform, gripper_world: &Transform) -> Self {
        let approach = gripper_world.rotation().column(2).into_owned();
        let toward_pivot = -object_pose.rotation().column(1).into_owned();
        let theta = (-approach.z).clamp(-1.0, 1.0).acos().min(FRAC_PI_2);
        let phi = approach.dot(&toward_pivot).clamp(-1.0, 1.0).acos();
        let grasp_point = object_pose.inverse().transform_point(gripper_world.translation());
        let r_com = (scene.object.com_offset - grasp_point).norm();
        Self { theta, phi, r_com }
    }
}

fn lever_bracket(scene: &Scene, gs: &GraspState) -> f64 {
    let (s, c) = gs.phi.sin_cos();
    s * (gs.r_com * s) + c * (scene.gripper.ee_length + gs.r_com * c)
}

/// Gravity torque about the jaw axis (N m):
/// `(mg/2) sin(theta) sin(phi) (r sin(phi)) + (mg/2) sin(theta) cos(phi) (EE + r cos(phi))`.
pub fn gravity_torque(scene: &Scene, gs: &GraspState) -> f64 {
    let half_weight = scene.weight() / 2.0;
    half_weight * gs.theta.sin() * lever_bracket(scene, gs)
}

/// Analytic partial derivative of [`gravity_torque`] with respect to `theta`.
pub fn gravity_torque_dtheta(scene: &Scene, gs: &GraspState) -> f64 {
    scene.weight() / 2.0 * gs.theta.cos() * lever_bracket(scene, gs)
}

pub fn friction_torque_limit(gripper: &GripperModel) -> f64 {
    gripper.pad_friction_torque_limit()
}

/// True when gravity torque exceeds the pads' friction capacity.
pub fn droop_occurs(scene: &Scene, gs: &GraspState) -> bool {
    gravity_torque(scene, gs) > friction_torque_limit(&scene.gripper)
}

/// Inclination where gravity torque equals the friction limit, if one exists in `[0, pi/2]`.
pub fn droop_threshold_angle(scene: &Scene, phi: f64, r_com: f64) -> Option<f64> {
    let gs = GraspState {
        theta: FRAC_PI_2,
        phi,
        r_com,
    };
    let peak = gravity_torque(scene, &gs);
    let limit = friction_torque_limit(&scene.gripper);
    if peak <= 0.0 || limit > peak {
        return None;
    }
    Some((limit / peak).asin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }
}

/// A vertical gripper move that changes the in-hand grasp by `theta_target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionCommand {
    pub direction: Direction,
    pub distance: f64,
    /// Object inclination before the move.
    pub theta_init: f64,
    /// Angle between the two grasps.
    pub theta_target: f64,
}

impl TransitionCommand {
    pub fn new(
        direction: Direction,
        lever: f64,
        theta_init: f64,
        theta_target: f64,
    ) -> Result<Self, MechanicsError> {
        let distance = match direction {
            Direction::Up => transition_distance_up(lever, theta_init, theta_target)?,
            Direction::Down => transition_distance_down(lever, theta_init, theta_target)?,
        };
        Ok(Self {
            direction,
            distance,
            theta_init,
            theta_target,
        })
    }

    /// Object inclination after the move.
    pub fn theta_final(&self) -> f64 {
        match self.direction {
            Direction::Up => self.theta_init + self.theta_target,
            Direction::Down => self.theta_init - self.theta_target,
        }
    }

    /// The command that undoes this one.
    pub fn mirrored(&self) -> Self {
        Self {
            direction: self.direction.opposite(),
            distance: self.distance,
            theta_init: self.theta_final(),
            theta_target: self.theta_target,
        }
    }

    /// Signed gripper height change.
    pub fn signed_distance(&self) -> f64 {
        match self.direction {
            Direction::Up => self.distance,
            Direction::Down => -self.distance,
        }
    }
}

fn in_quarter(a: f64) -> bool {
    (-ANGLE_TOL..=FRAC_PI_2 + ANGLE_TOL).contains(&a)
}

/// Height the gripper must rise so the object's inclination grows by `theta_target`.
pub fn transition_distance_up(l_stick: f64, theta_init: f64, theta_target: f64) -> Result<f64, MechanicsError> {
    let end = theta_init + theta_target;
    if !in_quarter(theta_init) || theta_target < -ANGLE_TOL || !in_quarter(end) {
        return Err(MechanicsError::AngleOutOfRange {
            init: theta_init,
            target: theta_target,
        });
    }
    Ok(l_stick * (end.sin() - theta_init.sin()))
}

/// Height the gripper must descend so the inclination shrinks by `theta_target`.
pub fn transition_distance_down(l_stick: f64, theta_init: f64, theta_target: f64) -> Result<f64, MechanicsError> {
    let end = theta_init - theta_target;
    if !in_quarter(theta_init) || theta_target < -ANGLE_TOL || !in_quarter(end) {
        return Err(MechanicsError::AngleOutOfRange {
            init: theta_init,
            target: theta_target,
        });
    }
    Ok(l_stick * (theta_init.sin() - end.sin()))
}

/// How the gripper relates to the object when computing its load.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    /// Gripper holds the object `grasp_offset` meters from the pivot along its axis.
    Held { grasp_offset: f64 },
    /// Object released and resting on the surface.
    Released,
}

/// Vertical force the gripper carries, from a moment balance about the pivot.
pub fn gripper_load_share(scene: &Scene, object_pose: &Transform, support: Support) -> Result<f64, MechanicsError> {
    let grasp_offset = match support {
        Support::Released => return Ok(0.0),
        Support::Held { grasp_offset } => grasp_offset,
    };
    if grasp_offset <= 1e-6 {
        return Err(MechanicsError::DegenerateGrasp(grasp_offset));
    }
    let axis = object_pose.rotation().column(1).into_owned();
    let horizontal = Vector3::new(axis.x, axis.y, 0.0);
    let com = scene.object.com_offset;
    let ratio = if horizontal.norm() < 1e-9 {
        com.y / grasp_offset
    } else {
        let dir = horizontal.normalize();
        let com_arm = object_pose.transform_vector(&com).dot(&dir);
        let grasp_arm = (axis * grasp_offset).dot(&dir);
        com_arm / grasp_arm
    };
    Ok(scene.weight() * ratio.max(0.0))
}

/// Boundary inclusive.
pub fn check_payload(scene: &Scene, f_grip: f64) -> bool {
    f_grip <= scene.robot.payload
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Scene;

    fn stick() -> Scene {
        Scene::from_toml_str(include_str!("../fixtures/stick_scene.toml")).unwrap()
    }

    fn board() -> Scene {
        Scene::from_toml_str(include_str!("../fixtures/duckboard_scene.toml")).unwrap()
    }

    fn gs(theta_deg: f64, phi_deg: f64, r: f64) -> GraspState {
        GraspState::new(theta_deg.to_radians(), phi_deg.to_radians(), r).unwrap()
    }

    #[test]
    fn torque_zero_when_level() {
        let s = stick();
        for phi in [0.0, 45.0, 90.0, 180.0] {
            assert_eq!(gravity_torque(&s, &gs(0.0, phi, 0.3)), 0.0);
        }
    }

    #[test]
    fn torque_reference_values() {
        let mut s = stick();
        // 0.28 * 9.81 / 2 * 0.328
        let t = gravity_torque(&s, &gs(90.0, 90.0, 0.328));
        assert!((t - 0.450_52).abs() < 1e-4, "{t}");
        s.gripper.ee_length = 0.17;
        // 1.3734 * 0.5 * (0.17 + 0.328)
        let t = gravity_torque(&s, &gs(30.0, 0.0, 0.328));
        assert!((t - 0.341_98).abs() < 1e-4, "{t}");
    }

    #[test]
    fn droop_predicate() {
        let mut s = stick();
        assert!(!droop_occurs(&s, &gs(0.0, 90.0, 0.328)));
        s.gripper.pad_torsion_coefficient = 0.0;
        assert!(droop_occurs(&s, &gs(90.0, 90.0, 0.328)));
        // limit 0.2 N m -> threshold asin(0.2 / 0.4505) = 26.36 deg
        s.gripper.pad_torsion_coefficient = 0.01;
        s.gripper.grip_force = 20.0;
        let th = droop_threshold_angle(&s, 90f64.to_radians(), 0.328).unwrap();
        assert!((th.to_degrees() - 26.36).abs() < 0.01, "{}", th.to_degrees());
        assert!(!droop_occurs(&s, &gs(26.3, 90.0, 0.328)));
        assert!(droop_occurs(&s, &gs(26.4, 90.0, 0.328)));
    }

    #[test]
    fn transition_distances() {
        assert_eq!(transition_distance_up(0.656, 0.3, 0.0).unwrap(), 0.0);
        assert_eq!(transition_distance_down(0.656, 0.3, 0.0).unwrap(), 0.0);
        let up = transition_distance_up(0.656, 30f64.to_radians(), 45f64.to_radians()).unwrap();
        let down = transition_distance_down(0.656, 75f64.to_radians(), 45f64.to_radians()).unwrap();
        assert!((up - 0.3056).abs() < 5e-5, "{up}");
        assert!((down - up).abs() < 1e-12);
        assert!(transition_distance_up(0.656, 60f64.to_radians(), 45f64.to_radians()).is_err());
        assert!(transition_distance_down(0.656, 30f64.to_radians(), 45f64.to_radians()).is_err());
        assert!(transition_distance_up(0.656, -0.1, 0.2).is_err());
    }

    #[test]
    fn command_mirror() {
        let c = TransitionCommand::new(Direction::Up, 0.656, 0.2, 0.5).unwrap();
        let m = c.mirrored();
        assert_eq!(m.direction, Direction::Down);
        assert!((m.theta_init - 0.7).abs() < 1e-15);
        let m2 = TransitionCommand::new(Direction::Down, 0.656, 0.7, 0.5).unwrap();
        assert!((m2.distance - c.distance).abs() < 1e-12);
        assert!((c.signed_distance() + m.signed_distance()).abs() < 1e-15);
    }

    #[test]
    fn load_share_uniform_stick_end_grasp() {
        let s = stick();
        for deg in [5.0, 30.0, 60.0, 85.0] {
            let pose = Transform::rot_x(f64::to_radians(deg));
            let f = gripper_load_share(&s, &pose, Support::Held { grasp_offset: 0.656 }).unwrap();
            assert!((f - 1.3734).abs() < 1e-9, "{deg}: {f}");
        }
        // vertical: arc-length ratio
        let f = gripper_load_share(&s, &Transform::rot_x(FRAC_PI_2), Support::Held { grasp_offset: 0.656 }).unwrap();
        assert!((f - 1.3734).abs() < 1e-9);
    }

    #[test]
    fn load_share_edge_cases() {
        let s = stick();
        let pose = Transform::rot_x(0.4);
        assert_eq!(gripper_load_share(&s, &pose, Support::Released).unwrap(), 0.0);
        let f = gripper_load_share(&s, &pose, Support::Held { grasp_offset: 0.328 }).unwrap();
        assert!((f - s.weight()).abs() < 1e-9);
        assert!(matches!(
            gripper_load_share(&s, &pose, Support::Held { grasp_offset: 0.0 }),
            Err(MechanicsError::DegenerateGrasp(_))
        ));
    }

    #[test]
    fn payload_boundary() {
        let mut b = board();
        assert!(check_payload(&b, 0.0));
        assert!(check_payload(&b, b.robot.payload));
        b.robot.payload = 5.0;
        let full = b.weight();
        assert!((full - 9.0252).abs() < 1e-9);
        assert!(!check_payload(&b, full));
        assert!(check_payload(&b, full / 2.0));
    }

    #[test]
    fn grasp_state_from_poses() {
        let s = stick();
        // object tilted 30 deg, gripper approach in the object's YZ plane with phi = 45 deg
        let obj = Transform::rot_x(30f64.to_radians());
        let grasp = Transform::rot_x((45f64 + 90.0).to_radians()).with_translation(Vector3::new(0.0, 0.656, 0.0));
        let g = obj.compose(&grasp);
        let st = GraspState::from_poses(&s, &obj, &g);
        assert!((st.phi.to_degrees() - 45.0).abs() < 1e-9);
        // psi = tilt + phi = 75 deg, theta = 90 - 75
        assert!((st.theta.to_degrees() - 15.0).abs() < 1e-9);
        assert!((st.r_com - 0.328).abs() < 1e-12);
    }
}
