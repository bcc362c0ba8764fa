#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use repose::geometry::ContactCoords;
use repose::graph::{block_edges, EdgeCosts, EdgeKind, GraphEdge, GraphNode, ManipulationGraph, NodeSelector};
use repose::planner::{run_plan, PlanOutcome, RunConfig};
use repose::sampling::{annotate_grasps, default_grasp_set, GraspAnnotation, NodeKind};
use repose::scene::Scene;
use repose::Transform;

pub const TASKS: [&str; 4] = [
    "task1_transition.toml",
    "task2_blocked.toml",
    "task3_regrasp.toml",
    "task4_duckboard.toml",
];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn stick() -> Scene {
    repose::load_scene(fixture("stick_scene.toml")).unwrap()
}

pub fn board() -> Scene {
    repose::load_scene(fixture("duckboard_scene.toml")).unwrap()
}

/// Object pose from surface placement, yaw and tilt (degrees).
pub fn contact_pose(scene: &Scene, x: f64, y: f64, yaw_deg: f64, tilt_deg: f64) -> Transform {
    let pivot = *scene.surface.frame_at(&nalgebra::Vector2::new(x, y)).translation();
    ContactCoords {
        pivot,
        yaw: yaw_deg.to_radians(),
        tilt: tilt_deg.to_radians(),
    }
    .to_pose()
}

pub fn grasp(scene: &Scene, id: u32) -> GraspAnnotation {
    default_grasp_set(scene).into_iter().find(|g| g.id == id).unwrap()
}

pub fn gnode(id: usize, pose: Transform, grasp: &GraspAnnotation, kind: NodeKind) -> GraphNode {
    let mut c = annotate_grasps(&pose, std::slice::from_ref(grasp), kind).unwrap().remove(0);
    c.kind = kind;
    GraphNode { id, candidate: c, kind }
}

pub fn config(task: &str, out: &std::path::Path) -> RunConfig {
    RunConfig {
        task: Some(fixture(task)),
        out_dir: out.to_path_buf(),
        ..RunConfig::default()
    }
}

pub fn plan_task(task: &str) -> PlanOutcome {
    let dir = tempfile::tempdir().unwrap();
    run_plan(&config(task, dir.path())).unwrap_or_else(|e| panic!("{task}: {e}"))
}

/// Random graph with up to `max_nodes` nodes: random kinds and grasp ids
/// (so implicit translation cliques form), random explicit edges with
/// random costs, and a few random blocked pairs.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize) -> ManipulationGraph {
    let s = stick();
    let grasps = default_grasp_set(&s);
    let n = rng.gen_range(2..=max_nodes);
    let nodes: Vec<GraphNode> = (0..n)
        .map(|i| {
            let kind = match rng.gen_range(0..3) {
                0 => NodeKind::Drooping,
                1 => NodeKind::Regrasp,
                _ => NodeKind::Connecting,
            };
            let g = &grasps[rng.gen_range(0..grasps.len())];
            let pose = contact_pose(&s, rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.6), 0.0, 0.0);
            gnode(i, pose, g, kind)
        })
        .collect();
    let m = rng.gen_range(0..3 * n);
    let edges: Vec<GraphEdge> = (0..m)
        .map(|_| {
            let kind = if rng.gen_bool(0.5) {
                EdgeKind::GraspTransition
            } else {
                EdgeKind::Regrasp
            };
            GraphEdge {
                from: rng.gen_range(0..n),
                to: rng.gen_range(0..n),
                kind,
                cost: rng.gen_range(0..8) as f64 * 0.5,
                command: None,
            }
        })
        .collect();
    let costs = EdgeCosts {
        translation: rng.gen_range(1..4) as f64,
        ..EdgeCosts::default()
    };
    let mut graph = ManipulationGraph::from_parts(nodes, edges, costs);
    let blocks: Vec<_> = (0..rng.gen_range(0..=n / 4))
        .map(|_| (NodeSelector::Node(rng.gen_range(0..n)), NodeSelector::Node(rng.gen_range(0..n))))
        .collect();
    block_edges(&mut graph, &blocks).unwrap();
    graph
}
