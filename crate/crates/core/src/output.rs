//! Text, JSON and SVG renderings of plans, trajectories and verification
//! reports. Every format is line-oriented with fixed decimal precision so two
//! runs on the same inputs produce identical bytes.

use std::fmt::Write as _;

use nalgebra::Vector3;
use serde::Serialize;

use crate::geometry::{ContactCoords, Transform};
use crate::graph::{EdgeKind, GraphEdge, ManipulationGraph, PlanPath};
use crate::motion::{Trajectory, VerificationReport, Violation};
use crate::scene::{object_lowest_point, Scene};

pub const PLAN_FORMAT: &str = "repose-plan 1";
pub const TRAJECTORY_FORMAT: &str = "repose-trajectory 1";
pub const VERIFICATION_FORMAT: &str = "repose-verification 1";

/// SVG frame scale (pixels per metre).
pub const FRAME_SCALE: f64 = 500.0;
/// Blank border around the drawn scene (px).
pub const FRAME_MARGIN: f64 = 40.0;

/// Fixed-point number without a negative zero.
fn num(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn vec3(v: &Vector3<f64>, decimals: usize) -> String {
    format!("{} {} {}", num(v.x, decimals), num(v.y, decimals), num(v.z, decimals))
}

/// Position (m) followed by rotation vector (deg).
fn pose(t: &Transform) -> String {
    format!("{} {}", vec3(t.translation(), 6), vec3(&t.axis_angle().map(f64::to_degrees), 4))
}

fn command_text(edge: &GraphEdge) -> String {
    match &edge.command {
        Some(c) => format!(
            "{} distance={} theta_init_deg={} alpha_deg={}",
            c.direction.as_str(),
            num(c.distance, 6),
            num(c.theta_init.to_degrees(), 4),
            num(c.theta_target.to_degrees(), 4)
        ),
        None => "none".into(),
    }
}

fn node_text(graph: &ManipulationGraph, id: usize) -> String {
    let n = graph.node(id);
    let c = ContactCoords::from_pose(n.object_pose());
    format!(
        "id={} kind={} grasp={} pivot={} yaw_deg={} tilt_deg={} gripper={}",
        id,
        n.kind.as_str(),
        n.grasp_id(),
        vec3(&c.pivot, 6),
        num(c.yaw.to_degrees(), 4),
        num(c.tilt.to_degrees(), 4),
        vec3(n.candidate.gripper_world.translation(), 6)
    )
}

/// Line-oriented plan summary:
///
/// ```text
/// repose-plan 1
/// total_cost <f>
/// count <edge kind> <n>          one line per kind, fixed order
/// node <i> id=.. kind=.. grasp=.. pivot=x y z yaw_deg=.. tilt_deg=.. gripper=x y z
/// edge <i> <from>-><to> kind=.. cost=.. command=<dir distance=.. theta_init_deg=.. alpha_deg=..|none>
/// ```
pub fn plan_text(graph: &ManipulationGraph, path: &PlanPath) -> String {
    let mut out = format!("{PLAN_FORMAT}\ntotal_cost {}\n", num(path.total_cost, 6));
    for kind in [EdgeKind::GraspTransition, EdgeKind::Translation, EdgeKind::Regrasp] {
        let _ = writeln!(out, "count {} {}", kind.as_str(), path.count(kind));
    }
    for (i, &id) in path.nodes.iter().enumerate() {
        let _ = writeln!(out, "node {i} {}", node_text(graph, id));
    }
    for (i, e) in path.edges.iter().enumerate() {
        let _ = writeln!(
            out,
            "edge {i} {}->{} kind={} cost={} command={}",
            e.from,
            e.to,
            e.kind.as_str(),
            num(e.cost, 6),
            command_text(e)
        );
    }
    out
}

#[derive(Serialize)]
struct JsonNode {
    id: usize,
    kind: &'static str,
    grasp: u32,
    pivot: [f64; 3],
    yaw_deg: f64,
    tilt_deg: f64,
    gripper_position: [f64; 3],
}

#[derive(Serialize)]
struct JsonPlan<'a> {
    format: &'static str,
    total_cost: f64,
    counts: std::collections::BTreeMap<&'static str, usize>,
    nodes: Vec<JsonNode>,
    edges: &'a [GraphEdge],
}

/// The same content as [`plan_text`], as pretty-printed JSON.
pub fn plan_json(graph: &ManipulationGraph, path: &PlanPath) -> String {
    let nodes = path
        .nodes
        .iter()
        .map(|&id| {
            let n = graph.node(id);
            let c = ContactCoords::from_pose(n.object_pose());
            let g = n.candidate.gripper_world.translation();
            JsonNode {
                id,
                kind: n.kind.as_str(),
                grasp: n.grasp_id(),
                pivot: [c.pivot.x, c.pivot.y, c.pivot.z],
                yaw_deg: c.yaw.to_degrees(),
                tilt_deg: c.tilt.to_degrees(),
                gripper_position: [g.x, g.y, g.z],
            }
        })
        .collect();
    let counts = [EdgeKind::GraspTransition, EdgeKind::Translation, EdgeKind::Regrasp]
        .into_iter()
        .map(|k| (k.as_str(), path.count(k)))
        .collect();
    let doc = JsonPlan {
        format: PLAN_FORMAT,
        total_cost: path.total_cost,
        counts,
        nodes,
        edges: &path.edges,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plan serializes");
    s.push('\n');
    s
}

/// Trajectory file:
///
/// ```text
/// repose-trajectory 1
/// segment <s> kind=.. from=.. to=.. waypoints=<n> command=..
/// <index> <gripper x y z rx ry rz> <object x y z rx ry rz> <grasp id> <theta deg> <gap mm> <f_grip N> <phase>
/// ```
///
/// Positions in metres, rotation vectors in degrees. The index counts
/// waypoints across the whole trajectory.
pub fn trajectory_text(traj: &Trajectory) -> String {
    let mut out = format!("{TRAJECTORY_FORMAT}\n");
    let mut index = 0;
    for (s, seg) in traj.segments.iter().enumerate() {
        let cmd = match &seg.command {
            Some(c) => format!("{} distance={}", c.direction.as_str(), num(c.distance, 6)),
            None => "none".into(),
        };
        let _ = writeln!(
            out,
            "segment {s} kind={} from={} to={} waypoints={} command={cmd}",
            seg.kind.as_str(),
            seg.from,
            seg.to,
            seg.waypoints.len()
        );
        for wp in &seg.waypoints {
            let _ = writeln!(
                out,
                "{index} {} {} {} {} {} {} {}",
                pose(&wp.gripper_pose),
                pose(&wp.object_pose),
                wp.grasp.id,
                num(wp.theta.to_degrees(), 4),
                num(wp.contact_gap * 1e3, 4),
                num(wp.f_grip, 4),
                wp.phase.as_str()
            );
            index += 1;
        }
    }
    out
}

fn violation_text(v: &Violation) -> String {
    match v {
        Violation::ContactLost { index, gap } => format!("contact_lost {index} gap_mm={}", num(gap * 1e3, 4)),
        Violation::DroopConditionViolated { index } => format!("droop_condition_violated {index}"),
        Violation::PayloadExceeded { index, f_grip } => format!("payload_exceeded {index} f_grip={}", num(*f_grip, 4)),
        Violation::ReachExceeded { index } => format!("reach_exceeded {index}"),
        Violation::ThetaOutOfRange { index, theta } => {
            format!("theta_out_of_range {index} theta_deg={}", num(theta.to_degrees(), 4))
        }
        Violation::StepTooLarge { index, translation, rotation } => format!(
            "step_too_large {index} translation_mm={} rotation_deg={}",
            num(translation * 1e3, 4),
            num(rotation.to_degrees(), 4)
        ),
    }
}

/// Verification report:
///
/// ```text
/// repose-verification 1
/// result pass|fail
/// waypoints <n>
/// max_contact_gap_mm <f>
/// min_contact_gap_mm <f>
/// max_f_grip <f>
/// violation <kind> <index> ...      one per violation
/// <index> <segment> <gap mm> <theta deg> <droop margin Nm|-> <f_grip N> <reachable 0|1>
/// ```
pub fn verification_text(report: &VerificationReport) -> String {
    let mut out = format!(
        "{VERIFICATION_FORMAT}\nresult {}\nwaypoints {}\n",
        if report.passed() { "pass" } else { "fail" },
        report.waypoints.len()
    );
    let gaps = report.waypoints.iter().map(|w| w.contact_gap);
    let max_gap = gaps.clone().fold(f64::NEG_INFINITY, f64::max);
    let min_gap = gaps.fold(f64::INFINITY, f64::min);
    let max_f = report.waypoints.iter().map(|w| w.f_grip).fold(0.0, f64::max);
    if !report.waypoints.is_empty() {
        let _ = writeln!(out, "max_contact_gap_mm {}", num(max_gap * 1e3, 6));
        let _ = writeln!(out, "min_contact_gap_mm {}", num(min_gap * 1e3, 6));
        let _ = writeln!(out, "max_f_grip {}", num(max_f, 4));
    }
    for v in &report.violations {
        let _ = writeln!(out, "violation {}", violation_text(v));
    }
    for w in &report.waypoints {
        let margin = w.droop_margin.map_or_else(|| "-".to_string(), |m| num(m, 6));
        let _ = writeln!(
            out,
            "{} {} {} {} {margin} {} {}",
            w.index,
            w.segment,
            num(w.contact_gap * 1e3, 4),
            num(w.theta.to_degrees(), 4),
            num(w.f_grip, 4),
            u8::from(w.reachable)
        );
    }
    out
}

/// Maps world XZ to SVG pixels for one frame. `x_min` and `z_min` are the
/// world coordinates drawn at the bottom-left corner of the inner area.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameProjection {
    pub x_min: f64,
    pub z_min: f64,
    pub width: f64,
    pub height: f64,
}

impl FrameProjection {
    pub fn to_px(&self, p: &Vector3<f64>) -> (f64, f64) {
        (
            FRAME_MARGIN + (p.x - self.x_min) * FRAME_SCALE,
            self.height - FRAME_MARGIN - (p.z - self.z_min) * FRAME_SCALE,
        )
    }
}

/// Convex hull of 2D points (monotone chain), counter-clockwise.
fn hull_2d(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn polygon(pts: &[(f64, f64)]) -> String {
    pts.iter()
        .map(|(x, y)| format!("{},{}", num(*x, 2), num(*y, 2)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Side view (world XZ) of one critical pose: surface line, object outline,
/// gripper body outline, finger line to the tool centre point, and a contact marker at the object's lowest point.
/// The contact marker is the `circle` with `id="contact"`.
pub fn frame_svg(scene: &Scene, object_pose: &Transform, gripper_pose: &Transform, title: &str) -> (String, FrameProjection) {
    let object: Vec<Vector3<f64>> = scene.object.hull_points().iter().map(|p| object_pose.transform_point(p)).collect();
    let mut gripper: Vec<Vector3<f64>> = scene
        .gripper
        .body_corners()
        .iter()
        .map(|p| gripper_pose.transform_point(p))
        .collect();
    // the gripper frame sits at the tool centre point, the body behind it
    let tcp = *gripper_pose.translation();
    let wrist = gripper_pose.transform_point(&Vector3::new(0.0, 0.0, -scene.gripper.ee_length));
    gripper.push(tcp);
    let contact = object_lowest_point(&scene.object, object_pose);

    // surface extent along world X
    let corners = [(0.0, 0.0), (scene.surface.extent_x(), 0.0), (0.0, scene.surface.extent_y()), (scene.surface.extent_x(), scene.surface.extent_y())];
    let surface_x: Vec<f64> = corners
        .iter()
        .map(|&(x, y)| scene.surface.frame_at(&nalgebra::Vector2::new(x, y)).translation().x)
        .collect();
    let surf_lo = surface_x.iter().copied().fold(f64::INFINITY, f64::min);
    let surf_hi = surface_x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let h = scene.surface.height();

    let all_x = object.iter().chain(&gripper).map(|p| p.x).chain([surf_lo, surf_hi]);
    let all_z = object.iter().chain(&gripper).map(|p| p.z).chain([h]);
    let x_min = all_x.clone().fold(f64::INFINITY, f64::min);
    let x_max = all_x.fold(f64::NEG_INFINITY, f64::max);
    let z_min = all_z.clone().fold(f64::INFINITY, f64::min);
    let z_max = all_z.fold(f64::NEG_INFINITY, f64::max);
    let proj = FrameProjection {
        x_min,
        z_min,
        width: (x_max - x_min) * FRAME_SCALE + 2.0 * FRAME_MARGIN,
        height: (z_max - z_min) * FRAME_SCALE + 2.0 * FRAME_MARGIN,
    };

    let obj_px = hull_2d(object.iter().map(|p| proj.to_px(p)).collect());
    let grip_px = hull_2d(gripper[..8].iter().map(|p| proj.to_px(p)).collect());
    let (sx0, sy) = proj.to_px(&Vector3::new(surf_lo, 0.0, h));
    let (sx1, _) = proj.to_px(&Vector3::new(surf_hi, 0.0, h));
    let (tx, tz) = proj.to_px(&tcp);
    let (cx, cz) = proj.to_px(&contact);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{hh}" viewBox="0 0 {w} {hh}">"#,
        w = num(proj.width, 2),
        hh = num(proj.height, 2)
    );
    let _ = writeln!(svg, "  <title>{}</title>", xml_escape(title));
    let _ = writeln!(
        svg,
        r##"  <line id="surface" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#555" stroke-width="2"/>"##,
        num(sx0, 2),
        num(sy, 2),
        num(sx1, 2),
        num(sy, 2)
    );
    let _ = writeln!(
        svg,
        r##"  <polygon id="object" points="{}" fill="#d9b38c" stroke="#7a5230"/>"##,
        polygon(&obj_px)
    );
    let _ = writeln!(
        svg,
        r##"  <polygon id="gripper" points="{}" fill="none" stroke="#2a5db0"/>"##,
        polygon(&grip_px)
    );
    let _ = writeln!(
        svg,
        r##"  <line id="fingers" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#2a5db0" stroke-dasharray="4 2"/>"##,
        num(proj.to_px(&wrist).0, 2),
        num(proj.to_px(&wrist).1, 2),
        num(tx, 2),
        num(tz, 2)
    );
    let _ = writeln!(
        svg,
        r##"  <circle id="contact" cx="{}" cy="{}" r="4" fill="#c0392b"/>"##,
        num(cx, 2),
        num(cz, 2)
    );
    svg.push_str("</svg>\n");
    (svg, proj)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
