//! Cartesian interpolation between consecutive critical poses, and the
//! waypoint-level checks (contact, droop, payload, reach, step size) that
//! every assembled trajectory has to pass.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::MotionError;
use crate::geometry::{wrap_angle, ContactCoords, Transform};
use crate::graph::{EdgeKind, GraphNode, ManipulationGraph, PlanPath};
use crate::mechanics::{
    friction_torque_limit, gravity_torque, gripper_load_share, Direction, GraspState, Support, TransitionCommand,
};
use crate::sampling::{gripper_clearance, GraspAnnotation};
use crate::scene::{object_lowest_point, Scene, PENETRATION_TOL};

const STEP_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionParams {
    /// Largest gripper translation between waypoints (m).
    pub translation_step: f64,
    /// Largest gripper rotation between waypoints (rad).
    pub rotation_step: f64,
    /// Largest allowed gap between the object's lowest point and the surface (m).
    pub contact_tolerance: f64,
    /// Retreat distance along the approach axis before a regrasp (m).
    pub retreat_clearance: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        Self {
            translation_step: 0.005,
            rotation_step: 2f64.to_radians(),
            contact_tolerance: 1e-3,
            retreat_clearance: 0.05,
        }
    }
}

impl MotionParams {
    pub fn is_valid(&self) -> bool {
        [self.translation_step, self.rotation_step, self.contact_tolerance]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
            && self.retreat_clearance.is_finite()
            && self.retreat_clearance >= 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Gripper holds the object.
    Carry,
    Retreat,
    Transit,
    Approach,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Carry => "carry",
            Phase::Retreat => "retreat",
            Phase::Transit => "transit",
            Phase::Approach => "approach",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub gripper_pose: Transform,
    pub object_pose: Transform,
    pub grasp: GraspAnnotation,
    /// Lowest object point above the surface (m).
    pub contact_gap: f64,
    /// Object inclination above the surface (rad).
    pub theta: f64,
    /// Vertical load carried by the gripper (N).
    pub f_grip: f64,
    pub phase: Phase,
    /// Whether the jaws are closed on the object.
    pub holding: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: EdgeKind,
    pub from: usize,
    pub to: usize,
    pub command: Option<TransitionCommand>,
    /// Waypoints of this segment. Every segment after the first omits its
    /// starting waypoint, which is the previous segment's last.
    pub waypoints: Vec<Waypoint>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn total_waypoints(&self) -> usize {
        self.segments.iter().map(|s| s.waypoints.len()).sum()
    }

    /// `(segment index, waypoint)` in execution order.
    pub fn waypoints(&self) -> impl Iterator<Item = (usize, &Waypoint)> {
        self.segments
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.waypoints.iter().map(move |w| (i, w)))
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

fn object_gap(scene: &Scene, object_pose: &Transform) -> f64 {
    object_lowest_point(&scene.object, object_pose).z - scene.surface.height()
}

fn held_load(scene: &Scene, object_pose: &Transform, grasp: &GraspAnnotation) -> f64 {
    let support = Support::Held {
        grasp_offset: grasp.grasp_point_offset,
    };
    gripper_load_share(scene, object_pose, support).unwrap_or(f64::INFINITY)
}

fn droop_margin(scene: &Scene, object_pose: &Transform, gripper: &Transform) -> f64 {
    let gs = GraspState::from_poses(scene, object_pose, gripper);
    gravity_torque(scene, &gs) - friction_torque_limit(&scene.gripper)
}

/// Grasp annotation re-derived from the current object and gripper poses.
fn grasp_between(template: &GraspAnnotation, object_pose: &Transform, gripper: &Transform) -> GraspAnnotation {
    let rel = object_pose.inverse().compose(gripper);
    let approach = rel.rotation().column(2).into_owned();
    GraspAnnotation {
        grasp_in_object: rel,
        phi: (-approach.y).clamp(-1.0, 1.0).acos(),
        ..template.clone()
    }
}

fn carry_waypoint(scene: &Scene, object_pose: Transform, gripper: Transform, grasp: GraspAnnotation) -> Waypoint {
    Waypoint {
        contact_gap: object_gap(scene, &object_pose),
        theta: ContactCoords::from_pose(&object_pose).tilt.clamp(0.0, std::f64::consts::FRAC_PI_2),
        f_grip: held_load(scene, &object_pose, &grasp),
        gripper_pose: gripper,
        object_pose,
        grasp,
        phase: Phase::Carry,
        holding: true,
    }
}

fn steps(amount: f64, step: f64) -> usize {
    (amount / step - 1e-9).ceil().max(0.0) as usize
}

/// Gripper moves by `cmd` while the object pivots about its fixed contact
/// point; the gripper orientation stays constant and the grasp slides.
pub fn interpolate_transition(
    scene: &Scene,
    from: &GraphNode,
    to: &GraphNode,
    cmd: &TransitionCommand,
    params: &MotionParams,
) -> Result<Vec<Waypoint>, MotionError> {
    let (ca, cb) = (from.candidate.contact(), to.candidate.contact());
    if (ca.pivot - cb.pivot).norm() > 1e-6 {
        return Err(MotionError::InvalidEdge("transition endpoints have different pivots".into()));
    }
    if (wrap_angle(cb.tilt - ca.tilt) - (cmd.theta_final() - cmd.theta_init)).abs() > 1e-6 {
        return Err(MotionError::InvalidEdge("transition command does not match the endpoint tilts".into()));
    }
    let start = &from.candidate;
    if droop_margin(scene, &start.object_pose, &start.gripper_world) <= 0.0 {
        return Err(MotionError::DroopConditionViolated { index: 0 });
    }
    let lever = start.grasp.grasp_point_offset;
    let h_a = lever * ca.tilt.sin();
    let h_b = match cmd.direction {
        Direction::Up => h_a + cmd.distance,
        Direction::Down => h_a - cmd.distance,
    };
    let n = steps(cmd.distance, params.translation_step);
    if n == 0 {
        return Ok(vec![carry_waypoint(
            scene,
            start.object_pose,
            start.gripper_world,
            start.grasp.clone(),
        )]);
    }
    let grip_rotation = *start.gripper_world.rotation();
    let grasp_point = *start.grasp.grasp_in_object.translation();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let wp = if k == n {
            carry_waypoint(scene, to.candidate.object_pose, to.candidate.gripper_world, to.candidate.grasp.clone())
        } else if k == 0 {
            carry_waypoint(scene, start.object_pose, start.gripper_world, start.grasp.clone())
        } else {
            let h = h_a + (h_b - h_a) * k as f64 / n as f64;
            let tilt = (h / lever).clamp(-1.0, 1.0).asin();
            let object = ContactCoords { tilt, ..ca }.to_pose();
            let gripper = Transform::new(grip_rotation, object.transform_point(&grasp_point))
                .expect("rotation copied from a valid transform");
            let grasp = grasp_between(&start.grasp, &object, &gripper);
            carry_waypoint(scene, object, gripper, grasp)
        };
        if droop_margin(scene, &wp.object_pose, &wp.gripper_pose) <= 0.0 {
            return Err(MotionError::DroopConditionViolated { index: k });
        }
        check_carry(scene, &wp, k, params)?;
        out.push(wp);
    }
    Ok(out)
}

fn check_carry(scene: &Scene, wp: &Waypoint, index: usize, params: &MotionParams) -> Result<(), MotionError> {
    if !(-PENETRATION_TOL..=params.contact_tolerance).contains(&wp.contact_gap) {
        return Err(MotionError::ContactLost {
            index,
            gap: wp.contact_gap,
        });
    }
    if !scene.robot.reaches(wp.gripper_pose.translation()) {
        return Err(MotionError::ReachExceeded { index });
    }
    Ok(())
}

/// Same-grasp motion: pivot, yaw and tilt move linearly, and each pose is
/// snapped back onto the surface.
pub fn interpolate_translation(
    scene: &Scene,
    from: &GraphNode,
    to: &GraphNode,
    params: &MotionParams,
) -> Result<Vec<Waypoint>, MotionError> {
    if from.grasp_id() != to.grasp_id() {
        return Err(MotionError::InvalidEdge("translation endpoints carry different grasps".into()));
    }
    let grasp = from.candidate.grasp.clone();
    let (ca, cb) = (from.candidate.contact(), to.candidate.contact());
    let d_pivot = cb.pivot - ca.pivot;
    let d_yaw = wrap_angle(cb.yaw - ca.yaw);
    let d_tilt = cb.tilt - ca.tilt;
    let turn = d_yaw.abs() + d_tilt.abs();
    let radius = grasp.grasp_in_object.translation().norm();
    let n = steps(d_pivot.norm() + radius * turn, params.translation_step)
        .max(steps(turn, params.rotation_step))
        .max(1);
    if d_pivot.norm() < 1e-12 && turn < 1e-12 {
        return Ok(vec![carry_waypoint(
            scene,
            from.candidate.object_pose,
            from.candidate.gripper_world,
            grasp,
        )]);
    }
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let object = if k == 0 {
            from.candidate.object_pose
        } else if k == n {
            to.candidate.object_pose
        } else {
            let s = k as f64 / n as f64;
            let raw = ContactCoords {
                pivot: ca.pivot + d_pivot * s,
                yaw: ca.yaw + d_yaw * s,
                tilt: ca.tilt + d_tilt * s,
            }
            .to_pose();
            let gap = object_gap(scene, &raw);
            if gap.abs() > params.contact_tolerance {
                return Err(MotionError::ContactLost { index: k, gap });
            }
            raw.with_translation(raw.translation() - Vector3::new(0.0, 0.0, gap))
        };
        let gripper = object.compose(&grasp.grasp_in_object);
        let wp = carry_waypoint(scene, object, gripper, grasp.clone());
        check_carry(scene, &wp, k, params)?;
        out.push(wp);
    }
    Ok(out)
}

/// Release, move the gripper to the other grasp, and close again. The object
/// rests flat the whole time.
pub fn interpolate_regrasp(
    scene: &Scene,
    from: &GraphNode,
    to: &GraphNode,
    params: &MotionParams,
) -> Result<Vec<Waypoint>, MotionError> {
    if from.grasp_id() == to.grasp_id() {
        return Err(MotionError::InvalidEdge("regrasp needs two different grasps".into()));
    }
    let object = from.candidate.object_pose;
    if !object.approx_eq(&to.candidate.object_pose, 1e-4) {
        return Err(MotionError::InvalidEdge("regrasp endpoints are at different object poses".into()));
    }
    let retreat_of = |g: &Transform| {
        let back = g.transform_vector(&Vector3::new(0.0, 0.0, -params.retreat_clearance));
        g.with_translation(g.translation() + back)
    };
    let (g_a, g_b) = (from.candidate.gripper_world, to.candidate.gripper_world);
    let (r_a, r_b) = (retreat_of(&g_a), retreat_of(&g_b));

    let n_retreat = steps(params.retreat_clearance, params.translation_step).max(1);
    let n_transit = steps(r_a.translation_distance_to(&r_b), params.translation_step)
        .max(steps(r_a.rotation_angle_to(&r_b), params.rotation_step))
        .max(1);

    let released = |gripper: Transform, grasp: &GraspAnnotation, phase| Waypoint {
        gripper_pose: gripper,
        object_pose: object,
        grasp: grasp.clone(),
        contact_gap: object_gap(scene, &object),
        theta: ContactCoords::from_pose(&object).tilt.clamp(0.0, std::f64::consts::FRAC_PI_2),
        f_grip: 0.0,
        phase,
        holding: false,
    };
    let (ga, gb) = (&from.candidate.grasp, &to.candidate.grasp);
    let mut out = vec![carry_waypoint(scene, object, g_a, ga.clone())];
    for k in 1..=n_retreat {
        out.push(released(g_a.interpolate(&r_a, k as f64 / n_retreat as f64), ga, Phase::Retreat));
    }
    for k in 1..n_transit {
        out.push(released(r_a.interpolate(&r_b, k as f64 / n_transit as f64), ga, Phase::Transit));
    }
    for k in 0..n_retreat {
        out.push(released(r_b.interpolate(&g_b, k as f64 / n_retreat as f64), gb, Phase::Approach));
    }
    out.push(carry_waypoint(scene, object, g_b, gb.clone()));

    for (i, wp) in out.iter().enumerate() {
        if gripper_clearance(scene, &wp.gripper_pose) < -PENETRATION_TOL {
            return Err(MotionError::CollisionInTransit { index: i });
        }
        if !scene.robot.reaches(wp.gripper_pose.translation()) {
            return Err(MotionError::ReachExceeded { index: i });
        }
    }
    Ok(out)
}

/// Interpolates every edge of `path`, joins the pieces and verifies the result.
pub fn assemble_trajectory(
    scene: &Scene,
    graph: &ManipulationGraph,
    path: &PlanPath,
    params: &MotionParams,
) -> Result<Trajectory, MotionError> {
    let mut traj = Trajectory::default();
    for (i, edge) in path.edges.iter().enumerate() {
        let (a, b) = (graph.node(edge.from), graph.node(edge.to));
        let piece = match edge.kind {
            EdgeKind::GraspTransition => match &edge.command {
                Some(cmd) => interpolate_transition(scene, a, b, cmd, params),
                None => Err(MotionError::InvalidEdge("transition edge without a command".into())),
            },
            EdgeKind::Translation => interpolate_translation(scene, a, b, params),
            EdgeKind::Regrasp => interpolate_regrasp(scene, a, b, params),
        };
        let mut waypoints = piece.map_err(|source| MotionError::Segment {
            edge: i,
            from: edge.from,
            to: edge.to,
            source: Box::new(source),
        })?;
        if i > 0 {
            waypoints.remove(0);
        }
        traj.segments.push(Segment {
            kind: edge.kind,
            from: edge.from,
            to: edge.to,
            command: edge.command,
            waypoints,
        });
    }
    let report = verify_trajectory(scene, &traj, params);
    if let Some(v) = report.violations.first() {
        return Err(MotionError::Verification(format!(
            "{} violation(s), first: {v:?}",
            report.violations.len()
        )));
    }
    Ok(traj)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaypointCheck {
    pub index: usize,
    pub segment: usize,
    pub contact_gap: f64,
    pub theta: f64,
    /// Gravity torque minus friction limit, for waypoints that must droop.
    pub droop_margin: Option<f64>,
    pub f_grip: f64,
    pub reachable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ContactLost { index: usize, gap: f64 },
    DroopConditionViolated { index: usize },
    PayloadExceeded { index: usize, f_grip: f64 },
    ReachExceeded { index: usize },
    ThetaOutOfRange { index: usize, theta: f64 },
    StepTooLarge { index: usize, translation: f64, rotation: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub waypoints: Vec<WaypointCheck>,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks every waypoint from its poses alone. Indices are global, in
/// execution order. Steps inside transition segments are measured vertically,
/// since the commanded motion is a height change.
pub fn verify_trajectory(scene: &Scene, traj: &Trajectory, params: &MotionParams) -> VerificationReport {
    let mut report = VerificationReport::default();
    let mut prev: Option<&Waypoint> = None;
    for (index, (seg_idx, wp)) in traj.waypoints().enumerate() {
        let seg = &traj.segments[seg_idx];
        let gap = object_gap(scene, &wp.object_pose);
        if !(-PENETRATION_TOL..=params.contact_tolerance).contains(&gap) {
            report.violations.push(Violation::ContactLost { index, gap });
        }
        let theta = ContactCoords::from_pose(&wp.object_pose).tilt;
        if !(-1e-9..=std::f64::consts::FRAC_PI_2 + 1e-9).contains(&theta) {
            report.violations.push(Violation::ThetaOutOfRange { index, theta });
        }
        let droop = (seg.kind == EdgeKind::GraspTransition)
            .then(|| droop_margin(scene, &wp.object_pose, &wp.gripper_pose));
        if droop.is_some_and(|m| m <= 0.0) {
            report.violations.push(Violation::DroopConditionViolated { index });
        }
        let f_grip = if wp.holding {
            held_load(scene, &wp.object_pose, &wp.grasp)
        } else {
            0.0
        };
        if f_grip > scene.robot.payload {
            report.violations.push(Violation::PayloadExceeded { index, f_grip });
        }
        let reachable = scene.robot.reaches(wp.gripper_pose.translation());
        if !reachable {
            report.violations.push(Violation::ReachExceeded { index });
        }
        if let Some(p) = prev {
            let delta = wp.gripper_pose.translation() - p.gripper_pose.translation();
            let translation = if seg.kind == EdgeKind::GraspTransition {
                delta.z.abs()
            } else {
                delta.norm()
            };
            let rotation = p.gripper_pose.rotation_angle_to(&wp.gripper_pose);
            if translation > params.translation_step + STEP_SLACK || rotation > params.rotation_step + STEP_SLACK {
                report.violations.push(Violation::StepTooLarge {
                    index,
                    translation,
                    rotation,
                });
            }
        }
        report.waypoints.push(WaypointCheck {
            index,
            segment: seg_idx,
            contact_gap: gap,
            theta,
            droop_margin: droop,
            f_grip,
            reachable,
        });
        prev = Some(wp);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ContactCoords;
    use crate::graph::{EdgeCosts, GraphEdge};
    use crate::mechanics::transition_distance_up;
    use crate::sampling::{annotate_grasps, NodeKind};
    use std::f64::consts::FRAC_PI_2;

    fn scene() -> Scene {
        let mut s = Scene::from_toml_str(include_str!("../fixtures/stick_scene.toml")).unwrap();
        s.robot.z_max = 1.0;
        s.robot.reach_max = 2.0;
        s
    }

    fn node(scene: &Scene, id: usize, pivot: Vector3<f64>, yaw: f64, tilt: f64, phi_deg: f64) -> GraphNode {
        let pose = ContactCoords { pivot, yaw, tilt }.to_pose();
        let grasp = GraspAnnotation::at_end(scene, (phi_deg / 45.0) as u32 + 1, phi_deg.to_radians());
        let c = annotate_grasps(&pose, &[grasp], NodeKind::Drooping).unwrap().remove(0);
        GraphNode {
            id,
            kind: c.kind,
            candidate: c,
        }
    }

    fn pivot() -> Vector3<f64> {
        Vector3::new(0.45, 0.1, 0.0)
    }

    fn transition_pair(s: &Scene) -> (GraphNode, GraphNode, TransitionCommand) {
        let a = node(s, 0, pivot(), 0.0, 30f64.to_radians(), 135.0);
        let b = node(s, 1, pivot(), 0.0, 75f64.to_radians(), 90.0);
        let cmd = TransitionCommand::new(Direction::Up, 0.656, 30f64.to_radians(), 45f64.to_radians()).unwrap();
        (a, b, cmd)
    }

    #[test]
    fn transition_waypoint_count_and_pivot() {
        let s = scene();
        let (a, b, cmd) = transition_pair(&s);
        let expected_d = 0.656 * (75f64.to_radians().sin() - 30f64.to_radians().sin());
        assert!((cmd.distance - expected_d).abs() < 1e-12);
        let wps = interpolate_transition(&s, &a, &b, &cmd, &MotionParams::default()).unwrap();
        assert_eq!(wps.len(), (expected_d / 0.005).ceil() as usize + 1);
        assert_eq!(wps.len(), 63);
        for w in &wps {
            assert!((w.object_pose.translation() - pivot()).norm() <= 1e-6);
            assert!(w.contact_gap.abs() <= 1e-9);
            // inclination follows the height of the grasp point above the pivot
            let h = w.gripper_pose.translation().z;
            assert!((w.theta - (h / 0.656).asin()).abs() < 1e-6);
        }
        assert!(wps[0].gripper_pose.approx_eq(&a.candidate.gripper_world, 1e-12));
        assert!(wps.last().unwrap().gripper_pose.approx_eq(&b.candidate.gripper_world, 1e-9));
        assert_eq!(wps.last().unwrap().grasp.id, b.grasp_id());
        // gripper orientation never changes
        for w in &wps {
            assert!(w.gripper_pose.rotation_angle_to(&a.candidate.gripper_world) < 1e-9);
        }
    }

    #[test]
    fn transition_mirror_retraces_profile() {
        let s = scene();
        let (a, b, cmd) = transition_pair(&s);
        let p = MotionParams::default();
        let up = interpolate_transition(&s, &a, &b, &cmd, &p).unwrap();
        let mut down = interpolate_transition(&s, &b, &a, &cmd.mirrored(), &p).unwrap();
        down.reverse();
        assert_eq!(up.len(), down.len());
        for (u, d) in up.iter().zip(&down) {
            assert!(u.object_pose.approx_eq(&d.object_pose, 1e-9));
            assert!(u.gripper_pose.approx_eq(&d.gripper_pose, 1e-9));
        }
    }

    #[test]
    fn zero_distance_transition_is_single_waypoint() {
        let s = scene();
        let a = node(&s, 0, pivot(), 0.0, 30f64.to_radians(), 135.0);
        let cmd = TransitionCommand {
            direction: Direction::Up,
            distance: 0.0,
            theta_init: 30f64.to_radians(),
            theta_target: 0.0,
        };
        let wps = interpolate_transition(&s, &a, &a, &cmd, &MotionParams::default()).unwrap();
        assert_eq!(wps.len(), 1);
        assert!(wps[0].object_pose.approx_eq(a.object_pose(), 0.0));
    }

    #[test]
    fn transition_without_droop_fails_at_start() {
        let mut s = scene();
        s.gripper.pad_torsion_coefficient = 1.0;
        let (a, b, cmd) = transition_pair(&s);
        let err = interpolate_transition(&s, &a, &b, &cmd, &MotionParams::default()).unwrap_err();
        assert!(matches!(err, MotionError::DroopConditionViolated { index: 0 }));
    }

    #[test]
    fn flat_slide_has_41_waypoints_in_contact() {
        let s = scene();
        let a = node(&s, 0, Vector3::new(0.2, 0.1, 0.0), 0.0, 0.0, 90.0);
        let b = node(&s, 1, Vector3::new(0.4, 0.1, 0.0), 0.0, 0.0, 90.0);
        let wps = interpolate_translation(&s, &a, &b, &MotionParams::default()).unwrap();
        assert_eq!(wps.len(), 41);
        for w in &wps {
            let low = object_lowest_point(&s.object, &w.object_pose);
            assert!(low.z.abs() < 1e-12);
            assert_eq!(w.contact_gap, low.z);
            assert_eq!(w.grasp.id, a.grasp_id());
        }
    }

    #[test]
    fn pivot_rotation_keeps_pivot_fixed() {
        let s = scene();
        let a = node(&s, 0, pivot(), 0.0, 40f64.to_radians(), 90.0);
        let b = node(&s, 1, pivot(), 60f64.to_radians(), 40f64.to_radians(), 90.0);
        let wps = interpolate_translation(&s, &a, &b, &MotionParams::default()).unwrap();
        assert!(wps.len() > 2);
        for w in &wps {
            assert!((w.object_pose.translation() - pivot()).norm() <= 1e-6);
        }
    }

    #[test]
    fn identical_translation_endpoints() {
        let s = scene();
        let a = node(&s, 0, pivot(), 0.0, 0.0, 90.0);
        let wps = interpolate_translation(&s, &a, &a, &MotionParams::default()).unwrap();
        assert_eq!(wps.len(), 1);
    }

    #[test]
    fn regrasp_phases() {
        let s = scene();
        let a = node(&s, 0, Vector3::new(0.45, 0.05, 0.0), 0.0, 0.0, 45.0);
        let b = node(&s, 1, Vector3::new(0.45, 0.05, 0.0), 0.0, 0.0, 90.0);
        let wps = interpolate_regrasp(&s, &a, &b, &MotionParams::default()).unwrap();
        for w in &wps {
            assert!(w.object_pose.approx_eq(a.object_pose(), 0.0));
        }
        let count = |p: Phase| wps.iter().filter(|w| w.phase == p).count();
        // retreat phase includes the grasp it starts from
        assert_eq!(count(Phase::Retreat) + 1, 11);
        assert!(count(Phase::Transit) > 0);
        assert!(wps.iter().filter(|w| w.phase == Phase::Transit).all(|w| w.f_grip == 0.0));
        assert!(wps.last().unwrap().gripper_pose.approx_eq(&b.candidate.gripper_world, 1e-12));
        let err = interpolate_regrasp(&s, &a, &a, &MotionParams::default()).unwrap_err();
        assert!(matches!(err, MotionError::InvalidEdge(_)));
    }

    fn single_segment(kind: EdgeKind, waypoints: Vec<Waypoint>) -> Trajectory {
        Trajectory {
            segments: vec![Segment {
                kind,
                from: 0,
                to: 1,
                command: None,
                waypoints,
            }],
        }
    }

    #[test]
    fn verify_flags_lifted_waypoint() {
        let s = scene();
        let a = node(&s, 0, Vector3::new(0.2, 0.1, 0.0), 0.0, 0.0, 90.0);
        let b = node(&s, 1, Vector3::new(0.25, 0.1, 0.0), 0.0, 0.0, 90.0);
        let p = MotionParams::default();
        let mut wps = interpolate_translation(&s, &a, &b, &p).unwrap();
        assert!(verify_trajectory(&s, &single_segment(EdgeKind::Translation, wps.clone()), &p).passed());
        let lift = Transform::from_translation(Vector3::new(0.0, 0.0, 0.005));
        wps[4].object_pose = lift.compose(&wps[4].object_pose);
        wps[4].gripper_pose = lift.compose(&wps[4].gripper_pose);
        let report = verify_trajectory(&s, &single_segment(EdgeKind::Translation, wps), &p);
        assert!(!report.passed());
        assert!(matches!(report.violations[0], Violation::ContactLost { index: 4, .. }));
        assert!((report.waypoints[4].contact_gap - 0.005).abs() < 1e-12);
    }

    #[test]
    fn verify_flags_missing_droop() {
        let mut s = scene();
        let (a, b, cmd) = transition_pair(&s);
        let p = MotionParams::default();
        let wps = interpolate_transition(&s, &a, &b, &cmd, &p).unwrap();
        let traj = single_segment(EdgeKind::GraspTransition, wps);
        assert!(verify_trajectory(&s, &traj, &p).passed());
        // friction limit just above the gravity torque at the first waypoint
        let gs = GraspState::from_poses(&s, a.object_pose(), &a.candidate.gripper_world);
        let tg = gravity_torque(&s, &gs);
        s.gripper.pad_torsion_coefficient = tg / s.gripper.grip_force * 1.01;
        let report = verify_trajectory(&s, &traj, &p);
        assert_eq!(report.violations[0], Violation::DroopConditionViolated { index: 0 });
    }

    #[test]
    fn assemble_dedupes_boundaries() {
        let s = scene();
        let (a, b, cmd) = transition_pair(&s);
        let c = node(&s, 2, Vector3::new(0.55, 0.1, 0.0), 0.0, 75f64.to_radians(), 90.0);
        let nodes = vec![a, b, GraphNode { id: 2, ..c }];
        let edges = vec![GraphEdge {
            from: 0,
            to: 1,
            kind: EdgeKind::GraspTransition,
            cost: 3.0,
            command: Some(cmd),
        }];
        let mut nodes = nodes;
        nodes[1].candidate.grasp.id = 3;
        nodes[2].candidate.grasp.id = 3;
        let g = ManipulationGraph::from_parts(nodes, edges, EdgeCosts::default());
        let path = crate::graph::search_path(
            &g,
            &crate::graph::NodeSelector::Node(0),
            &crate::graph::NodeSelector::Node(2),
        )
        .unwrap();
        assert_eq!(path.edge_kinds(), vec![EdgeKind::GraspTransition, EdgeKind::Translation]);
        let p = MotionParams::default();
        let traj = assemble_trajectory(&s, &g, &path, &p).unwrap();
        assert_eq!(traj.segments.len(), 2);
        assert_eq!(traj.segments[0].waypoints.len(), 63);
        let slide = interpolate_translation(&s, g.node(1), g.node(2), &p).unwrap();
        assert_eq!(traj.segments[1].waypoints.len(), slide.len() - 1);
        assert!(verify_trajectory(&s, &traj, &p).passed());
        let empty = PlanPath {
            nodes: vec![0],
            edges: vec![],
            total_cost: 0.0,
            counts: Default::default(),
        };
        assert!(assemble_trajectory(&s, &g, &empty, &p).unwrap().is_empty());
        let _ = (transition_distance_up, FRAC_PI_2);
    }
}
