//! Manipulation graph over grasp poses.
//!
//! Nodes are feasible grasps on contact-preserving object poses. Grasp
//! transition and regrasp edges are stored explicitly. Translation edges join
//! every pair of nodes that share a grasp annotation inside one family
//! (drooping poses, or flat stable poses); they form cliques and are kept
//! implicit, enumerated on demand.

mod build;
mod cache;
mod search;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::geometry::Transform;
use crate::mechanics::TransitionCommand;
use crate::sampling::{CandidateNode, NodeKind};

pub use build::{build_drooping_graph, build_manipulation_graph, expand_with_regrasp, BuildStats};
pub use cache::{build_hash, load_cache, save_cache, GraphCache, CACHE_VERSION};
pub use search::{block_edges, brute_force_cost, search_path, NodeSelector, PlanPath};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: usize,
    pub candidate: CandidateNode,
    pub kind: NodeKind,
}

impl GraphNode {
    pub fn object_pose(&self) -> &Transform {
        &self.candidate.object_pose
    }

    pub fn grasp_id(&self) -> u32 {
        self.candidate.grasp.id
    }

    pub fn families(&self) -> &'static [Family] {
        match self.kind {
            NodeKind::Drooping => &[Family::Drooping],
            NodeKind::Regrasp => &[Family::Regrasp],
            NodeKind::Connecting => &[Family::Drooping, Family::Regrasp],
        }
    }
}

/// Which pose set a node belongs to for translation purposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Drooping,
    Regrasp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    GraspTransition,
    Translation,
    Regrasp,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::GraspTransition => "grasp_transition",
            EdgeKind::Translation => "translation",
            EdgeKind::Regrasp => "regrasp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    pub cost: f64,
    pub command: Option<TransitionCommand>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCosts {
    pub translation: f64,
    pub grasp_transition: f64,
    pub regrasp: f64,
}

impl Default for EdgeCosts {
    fn default() -> Self {
        Self {
            translation: 1.0,
            grasp_transition: 3.0,
            regrasp: 5.0,
        }
    }
}

impl EdgeCosts {
    pub fn of(&self, kind: EdgeKind) -> f64 {
        match kind {
            EdgeKind::Translation => self.translation,
            EdgeKind::GraspTransition => self.grasp_transition,
            EdgeKind::Regrasp => self.regrasp,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.translation, self.grasp_transition, self.regrasp]
            .iter()
            .all(|c| *c >= 0.0 && c.is_finite())
    }
}

type GroupKey = (Family, u32);

#[derive(Clone, Debug, Default)]
pub struct ManipulationGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
    adjacency: Vec<Vec<usize>>,
    groups: BTreeMap<GroupKey, Vec<usize>>,
    costs: EdgeCosts,
    blocked: BTreeSet<(usize, usize)>,
}

impl ManipulationGraph {
    /// Assembles a graph from nodes (ids must equal their index) and explicit
    /// transition/regrasp edges. Panics on out-of-order ids, out-of-range
    /// endpoints, or an explicit translation edge.
    pub fn from_parts(nodes: Vec<GraphNode>, edges: Vec<GraphEdge>, costs: EdgeCosts) -> Self {
        for (i, n) in nodes.iter().enumerate() {
            assert_eq!(n.id, i, "node ids must be dense and ordered");
        }
        let mut g = ManipulationGraph {
            adjacency: vec![Vec::new(); nodes.len()],
            nodes,
            edges: Vec::new(),
            groups: BTreeMap::new(),
            costs,
            blocked: BTreeSet::new(),
        };
        for e in edges {
            g.push_edge(e);
        }
        g.rebuild_groups();
        g
    }

    pub(crate) fn push_edge(&mut self, e: GraphEdge) {
        assert!(e.kind != EdgeKind::Translation, "translation edges are implicit");
        assert!(e.from < self.nodes.len() && e.to < self.nodes.len());
        self.adjacency[e.from].push(self.edges.len());
        self.edges.push(e);
    }

    pub(crate) fn rebuild_groups(&mut self) {
        self.groups.clear();
        for n in &self.nodes {
            for f in n.families() {
                self.groups.entry((*f, n.grasp_id())).or_default().push(n.id);
            }
        }
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &GraphNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Explicit (transition and regrasp) edges.
    pub fn explicit_edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn costs(&self) -> &EdgeCosts {
        &self.costs
    }

    pub fn blocked(&self) -> &BTreeSet<(usize, usize)> {
        &self.blocked
    }

    pub fn is_blocked(&self, from: usize, to: usize) -> bool {
        self.blocked.contains(&(from, to))
    }

    pub(crate) fn block(&mut self, from: usize, to: usize) {
        self.blocked.insert((from, to));
    }

    pub fn clear_blocked(&mut self) {
        self.blocked.clear();
    }

    pub(crate) fn explicit_out(&self, from: usize) -> impl Iterator<Item = &GraphEdge> {
        self.adjacency[from].iter().map(move |&i| &self.edges[i])
    }

    pub(crate) fn group_members(&self, key: &GroupKey) -> &[usize] {
        self.groups.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn share_translation_group(&self, a: usize, b: usize) -> bool {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        a != b
            && na.grasp_id() == nb.grasp_id()
            && na.families().iter().any(|f| nb.families().contains(f))
    }

    fn translation_edge(&self, from: usize, to: usize) -> GraphEdge {
        GraphEdge {
            from,
            to,
            kind: EdgeKind::Translation,
            cost: self.costs.translation,
            command: None,
        }
    }

    /// The cheapest edge `from -> to`, if any (blocked or not).
    pub fn edge_between(&self, from: usize, to: usize) -> Option<GraphEdge> {
        let explicit = self
            .explicit_out(from)
            .filter(|e| e.to == to)
            .min_by(|a, b| a.cost.total_cmp(&b.cost))
            .cloned();
        let translation = self
            .share_translation_group(from, to)
            .then(|| self.translation_edge(from, to));
        match (explicit, translation) {
            (Some(e), Some(t)) => Some(if t.cost < e.cost { t } else { e }),
            (e, t) => e.or(t),
        }
    }

    /// All directed edges leaving `from`, translations included.
    pub fn out_edges(&self, from: usize) -> Vec<GraphEdge> {
        let mut out: Vec<GraphEdge> = self.explicit_out(from).cloned().collect();
        let mut seen = BTreeSet::new();
        for f in self.nodes[from].families() {
            for &to in self.group_members(&(*f, self.nodes[from].grasp_id())) {
                if to != from && seen.insert(to) {
                    out.push(self.translation_edge(from, to));
                }
            }
        }
        out
    }

    /// Every directed edge in the graph. Quadratic in group sizes; meant for
    /// small graphs, diagnostics and tests.
    pub fn all_edges(&self) -> Vec<GraphEdge> {
        (0..self.nodes.len()).flat_map(|u| self.out_edges(u)).collect()
    }

    /// Directed edge counts per kind, translations counted combinatorially.
    pub fn edge_counts(&self) -> BTreeMap<EdgeKind, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.edges {
            *counts.entry(e.kind).or_insert(0) += 1;
        }
        let mut translations = 0usize;
        for ((family, _), members) in &self.groups {
            let n = members.len();
            translations += n * n.saturating_sub(1);
            if *family == Family::Regrasp {
                // pairs of connecting nodes were already counted in the drooping family
                let c = members
                    .iter()
                    .filter(|&&m| self.nodes[m].kind == NodeKind::Connecting)
                    .count();
                translations -= c * c.saturating_sub(1);
            }
        }
        counts.insert(EdgeKind::Translation, translations);
        counts
    }

    pub fn node_counts(&self) -> BTreeMap<NodeKind, usize> {
        let mut counts = BTreeMap::new();
        for n in &self.nodes {
            *counts.entry(n.kind).or_insert(0) += 1;
        }
        counts
    }

    /// Node ids whose object pose matches `pose` (0.1 mm, 1e-3 rotation entries).
    pub fn nodes_at_pose(&self, pose: &Transform) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| poses_match(n.object_pose(), pose))
            .map(|n| n.id)
            .collect()
    }
}

pub(crate) fn poses_match(a: &Transform, b: &Transform) -> bool {
    a.translation_distance_to(b) <= 1e-4 && (a.rotation() - b.rotation()).abs().max() <= 1e-3
}
