use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{EdgeCosts, EdgeKind, GraphEdge, GraphNode, ManipulationGraph};
use crate::error::SamplingError;
use crate::geometry::{discretize_surface, ContactCoords, PoseKey};
use crate::mechanics::{droop_occurs, Direction, GraspState, TransitionCommand};
use crate::sampling::{
    annotate_grasps, filter_feasible, generate_bouquet, sample_stable_placements, CandidateNode,
    Discretization, GraspAnnotation, NodeKind, RejectReason,
};
use crate::scene::Scene;

/// Tolerance on the transition-height criterion and angle matching.
const TRANSITION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub placements: usize,
    pub bouquet_poses: usize,
    pub stable_poses: usize,
    pub candidates: usize,
    pub rejected: BTreeMap<RejectReason, usize>,
}

/// Samples nodes over the whole surface and builds the combined
/// drooping + regrasp graph.
pub fn build_manipulation_graph(
    scene: &Scene,
    grasps: &[GraspAnnotation],
    disc: &Discretization,
    costs: EdgeCosts,
) -> Result<(ManipulationGraph, BuildStats), SamplingError> {
    let grid = discretize_surface(&scene.surface, disc.grid_spacing)?;
    let mut stats = BuildStats {
        placements: grid.len(),
        ..BuildStats::default()
    };

    let mut seen: HashMap<(PoseKey, u32), ()> = HashMap::new();
    let mut drooping = Vec::new();
    let mut keep = |c: CandidateNode, stats: &mut BuildStats, out: &mut Vec<GraphNode>| {
        stats.candidates += 1;
        if let Some(r) = c.reject_reason {
            *stats.rejected.entry(r).or_insert(0) += 1;
            return;
        }
        if seen.insert((c.object_pose.key(), c.grasp.id), ()).is_none() {
            out.push(GraphNode {
                id: out.len(),
                kind: c.kind,
                candidate: c,
            });
        }
    };
    for placement in &grid {
        let bouquet = generate_bouquet(scene, placement, &disc.x_steps, &disc.z_steps)?;
        stats.bouquet_poses += bouquet.poses.len();
        for bp in &bouquet.poses {
            let cands = filter_feasible(scene, annotate_grasps(&bp.pose, grasps, NodeKind::Drooping)?);
            for c in cands {
                keep(c, &mut stats, &mut drooping);
            }
        }
    }
    let graph = build_drooping_graph(scene, drooping, costs);

    let stable = sample_stable_placements(scene, &grid, &disc.stable_yaws);
    stats.stable_poses = stable.len();
    let mut stable_nodes = Vec::new();
    for pose in &stable {
        for c in filter_feasible(scene, annotate_grasps(pose, grasps, NodeKind::Regrasp)?) {
            stats.candidates += 1;
            match c.reject_reason {
                Some(r) => *stats.rejected.entry(r).or_insert(0) += 1,
                None => stable_nodes.push(GraphNode {
                    id: stable_nodes.len(),
                    kind: NodeKind::Regrasp,
                    candidate: c,
                }),
            }
        }
    }
    Ok((expand_with_regrasp(scene, graph, stable_nodes), stats))
}

fn direction_key(c: &ContactCoords) -> (i64, i64) {
    let q = |v: f64| (v * 1e4).round() as i64;
    (q(c.yaw.cos()), q(c.yaw.sin()))
}

fn pivot_key(c: &ContactCoords) -> [i64; 3] {
    let q = |v: f64| (v * 1e4).round() as i64;
    [q(c.pivot.x), q(c.pivot.y), q(c.pivot.z)]
}

/// Upward transition command taking `lower` to `upper`, if the pair satisfies
/// the grasp-transition criterion.
pub(crate) fn transition_between(scene: &Scene, lower: &CandidateNode, upper: &CandidateNode) -> Option<TransitionCommand> {
    if lower.grasp.id == upper.grasp.id {
        return None;
    }
    let (cl, cu) = (lower.contact(), upper.contact());
    let alpha = cu.tilt - cl.tilt;
    if alpha <= TRANSITION_TOL {
        return None;
    }
    // gripper orientation stays fixed while the object rotates in hand
    if (alpha - (lower.grasp.phi - upper.grasp.phi)).abs() > TRANSITION_TOL {
        return None;
    }
    let lever = lower.grasp.grasp_point_offset;
    if (lever - upper.grasp.grasp_point_offset).abs() > 1e-9 {
        return None;
    }
    if (lower.gripper_world.rotation() - upper.gripper_world.rotation()).abs().max() > TRANSITION_TOL {
        return None;
    }
    let droops = |c: &CandidateNode| droop_occurs(scene, &GraspState::from_poses(scene, &c.object_pose, &c.gripper_world));
    if !droops(lower) || !droops(upper) {
        return None;
    }
    let cmd = TransitionCommand::new(Direction::Up, lever, cl.tilt, alpha).ok()?;
    let rise = upper.gripper_world.translation().z - lower.gripper_world.translation().z;
    ((rise - cmd.distance).abs() <= TRANSITION_TOL).then_some(cmd)
}

/// Adds grasp-transition edges (as up/down mirror pairs) between nodes that
/// share a pivot and yaw. Translation edges follow implicitly from node kinds.
pub fn build_drooping_graph(scene: &Scene, nodes: Vec<GraphNode>, costs: EdgeCosts) -> ManipulationGraph {
    let mut groups: BTreeMap<([i64; 3], (i64, i64)), Vec<usize>> = BTreeMap::new();
    for n in &nodes {
        let c = n.candidate.contact();
        groups.entry((pivot_key(&c), direction_key(&c))).or_default().push(n.id);
    }
    let mut edges = Vec::new();
    for members in groups.values() {
        for &a in members {
            for &b in members {
                let Some(up) = transition_between(scene, &nodes[a].candidate, &nodes[b].candidate) else {
                    continue;
                };
                edges.push((a, b, up));
            }
        }
    }
    edges.sort_by_key(|(a, b, _)| (*a, *b));
    let mut explicit = Vec::with_capacity(edges.len() * 2);
    for (a, b, up) in edges {
        explicit.push(GraphEdge {
            from: a,
            to: b,
            kind: EdgeKind::GraspTransition,
            cost: costs.grasp_transition,
            command: Some(up),
        });
        explicit.push(GraphEdge {
            from: b,
            to: a,
            kind: EdgeKind::GraspTransition,
            cost: costs.grasp_transition,
            command: Some(up.mirrored()),
        });
    }
    ManipulationGraph::from_parts(nodes, explicit, costs)
}

/// Merges stable-placement nodes into the graph. Nodes already present as
/// flat bouquet members become `connecting`; every pair of grasps on the same
/// stable pose is joined by a regrasp edge in both directions.
pub fn expand_with_regrasp(_scene: &Scene, mut graph: ManipulationGraph, stable_nodes: Vec<GraphNode>) -> ManipulationGraph {
    let mut index: HashMap<(PoseKey, u32), usize> = graph
        .nodes
        .iter()
        .map(|n| ((n.object_pose().key(), n.grasp_id()), n.id))
        .collect();

    let mut pose_groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of: HashMap<PoseKey, usize> = HashMap::new();
    for s in stable_nodes {
        let key = s.object_pose().key();
        let id = match index.get(&(key, s.grasp_id())) {
            Some(&id) => {
                let n = &mut graph.nodes[id];
                if n.kind == NodeKind::Drooping {
                    n.kind = NodeKind::Connecting;
                }
                id
            }
            None => {
                let id = graph.nodes.len();
                index.insert((key, s.grasp_id()), id);
                graph.nodes.push(GraphNode {
                    id,
                    kind: NodeKind::Regrasp,
                    candidate: s.candidate,
                });
                graph.adjacency.push(Vec::new());
                id
            }
        };
        let g = *group_of.entry(key).or_insert_with(|| {
            pose_groups.push(Vec::new());
            pose_groups.len() - 1
        });
        if !pose_groups[g].contains(&id) {
            pose_groups[g].push(id);
        }
    }

    let cost = graph.costs.regrasp;
    for members in &pose_groups {
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                if graph.nodes[a].grasp_id() == graph.nodes[b].grasp_id() {
                    continue;
                }
                for (from, to) in [(a, b), (b, a)] {
                    graph.push_edge(GraphEdge {
                        from,
                        to,
                        kind: EdgeKind::Regrasp,
                        cost,
                        command: None,
                    });
                }
            }
        }
    }
    graph.rebuild_groups();
    graph
}
