use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use super::{EdgeKind, GraphEdge, GroupKey, ManipulationGraph};
use crate::error::GraphError;
use crate::geometry::Transform;

/// Picks graph nodes for a search endpoint or a blocked pair.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeSelector {
    /// Every node whose object pose matches, whatever the grasp.
    Pose(Transform),
    /// The node at this pose carrying this grasp id.
    PoseGrasp(Transform, u32),
    Node(usize),
}

impl NodeSelector {
    pub fn resolve(&self, graph: &ManipulationGraph) -> Result<Vec<usize>, GraphError> {
        let ids = match self {
            NodeSelector::Pose(p) => graph.nodes_at_pose(p),
            NodeSelector::PoseGrasp(p, g) => graph
                .nodes_at_pose(p)
                .into_iter()
                .filter(|&i| graph.node(i).grasp_id() == *g)
                .collect(),
            NodeSelector::Node(i) => {
                if *i < graph.len() {
                    vec![*i]
                } else {
                    vec![]
                }
            }
        };
        if ids.is_empty() {
            Err(GraphError::UnresolvedSelector(format!("{self:?}")))
        } else {
            Ok(ids)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanPath {
    pub nodes: Vec<usize>,
    pub edges: Vec<GraphEdge>,
    pub total_cost: f64,
    pub counts: BTreeMap<EdgeKind, usize>,
}

impl PlanPath {
    pub fn count(&self, kind: EdgeKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn edge_kinds(&self) -> Vec<EdgeKind> {
        self.edges.iter().map(|e| e.kind).collect()
    }

    /// Consecutive nodes joined by existing, unblocked edges.
    pub fn is_valid_in(&self, graph: &ManipulationGraph) -> bool {
        self.nodes.len() == self.edges.len() + 1
            && self.edges.iter().zip(self.nodes.windows(2)).all(|(e, w)| {
                e.from == w[0]
                    && e.to == w[1]
                    && !graph.is_blocked(e.from, e.to)
                    && graph.out_edges(e.from).iter().any(|x| x == e)
            })
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Default)]
struct GroupState {
    expanded: bool,
    /// Members skipped by earlier expansions because the edge was blocked.
    pending: Vec<usize>,
}

struct Frontier {
    dist: Vec<f64>,
    pred: Vec<Option<GraphEdge>>,
    done: Vec<bool>,
    heap: BinaryHeap<Reverse<(Cost, usize)>>,
}

impl Frontier {
    fn relax(&mut self, edge: GraphEdge, base: f64) {
        let v = edge.to;
        if self.done[v] {
            return;
        }
        let nd = base + edge.cost;
        let better = match &self.pred[v] {
            _ if nd < self.dist[v] => true,
            Some(p) => nd == self.dist[v] && edge.from < p.from,
            None => false,
        };
        if better {
            let improved = nd < self.dist[v];
            self.dist[v] = nd;
            self.pred[v] = Some(edge);
            if improved {
                self.heap.push(Reverse((Cost(nd), v)));
            }
        }
    }
}

/// Minimum-cost path from any start node to any goal node.
///
/// Dijkstra over explicit edges plus the implicit translation cliques. A
/// clique is expanded once, from its first settled member; later members only
/// retry targets that were blocked for earlier ones. Ties resolve towards
/// smaller node ids, both for the goal reached and for predecessors.
pub fn search_path(graph: &ManipulationGraph, start: &NodeSelector, goal: &NodeSelector) -> Result<PlanPath, GraphError> {
    let starts = start.resolve(graph)?;
    let goals = goal.resolve(graph)?;
    let n = graph.len();
    let mut is_goal = vec![false; n];
    for &g in &goals {
        is_goal[g] = true;
    }
    let mut f = Frontier {
        dist: vec![f64::INFINITY; n],
        pred: vec![None; n],
        done: vec![false; n],
        heap: BinaryHeap::new(),
    };
    for &s in &starts {
        f.dist[s] = 0.0;
        f.heap.push(Reverse((Cost(0.0), s)));
    }
    let mut groups: HashMap<GroupKey, GroupState> = HashMap::new();
    let mut reached = None;
    while let Some(Reverse((Cost(d), u))) = f.heap.pop() {
        if f.done[u] || d > f.dist[u] {
            continue;
        }
        f.done[u] = true;
        if is_goal[u] {
            reached = Some(u);
            break;
        }
        let explicit: Vec<GraphEdge> = graph
            .explicit_out(u)
            .filter(|e| !graph.is_blocked(u, e.to))
            .cloned()
            .collect();
        for e in explicit {
            f.relax(e, d);
        }
        let node = graph.node(u);
        for family in node.families() {
            let key = (*family, node.grasp_id());
            let state = groups.entry(key).or_default();
            let targets: Vec<usize> = if state.expanded {
                std::mem::take(&mut state.pending)
            } else {
                state.expanded = true;
                graph.group_members(&key).to_vec()
            };
            let mut still_pending = Vec::new();
            for v in targets {
                if v == u || f.done[v] {
                    continue;
                }
                if graph.is_blocked(u, v) {
                    still_pending.push(v);
                    continue;
                }
                f.relax(graph.translation_edge(u, v), d);
            }
            groups.get_mut(&key).expect("group state").pending.extend(still_pending);
        }
    }
    let goal_node = reached.ok_or(GraphError::NoPath)?;

    let mut edges = Vec::new();
    let mut cur = goal_node;
    while let Some(e) = f.pred[cur].clone() {
        cur = e.from;
        edges.push(e);
    }
    edges.reverse();
    let mut nodes = vec![cur];
    nodes.extend(edges.iter().map(|e| e.to));
    let mut counts = BTreeMap::new();
    for e in &edges {
        *counts.entry(e.kind).or_insert(0) += 1;
    }
    Ok(PlanPath {
        nodes,
        edges,
        total_cost: f.dist[goal_node],
        counts,
    })
}

/// Marks every edge between nodes selected by each pair as blocked, in both directions.
pub fn block_edges(graph: &mut ManipulationGraph, pairs: &[(NodeSelector, NodeSelector)]) -> Result<(), GraphError> {
    let mut resolved = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        resolved.push((a.resolve(graph)?, b.resolve(graph)?));
    }
    for (from, to) in resolved {
        for &a in &from {
            for &b in &to {
                if graph.edge_between(a, b).is_some() {
                    graph.block(a, b);
                }
                if graph.edge_between(b, a).is_some() {
                    graph.block(b, a);
                }
            }
        }
    }
    Ok(())
}

/// Exhaustive Bellman-Ford optimum over every enumerated, unblocked edge.
/// Independent of [`search_path`]; used as a test oracle on small graphs.
pub fn brute_force_cost(graph: &ManipulationGraph, starts: &[usize], goals: &[usize]) -> Option<f64> {
    let n = graph.len();
    let edges: Vec<GraphEdge> = graph
        .all_edges()
        .into_iter()
        .filter(|e| !graph.is_blocked(e.from, e.to))
        .collect();
    let mut dist = vec![f64::INFINITY; n];
    for &s in starts {
        dist[s] = 0.0;
    }
    for _ in 0..n {
        let mut changed = false;
        for e in &edges {
            let nd = dist[e.from] + e.cost;
            if nd < dist[e.to] {
                dist[e.to] = nd;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    goals
        .iter()
        .map(|&g| dist[g])
        .filter(|d| d.is_finite())
        .min_by(|a, b| a.total_cmp(b))
}
