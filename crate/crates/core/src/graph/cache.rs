//! On-disk graph cache: a versioned JSON document holding nodes, explicit
//! edges and edge costs, keyed by a hash of everything the build depends on.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EdgeCosts, GraphEdge, GraphNode, ManipulationGraph};
use crate::error::GraphError;
use crate::sampling::{Discretization, GraspAnnotation};
use crate::scene::Scene;

pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphCache {
    pub version: u32,
    /// Hash of scene, grasp set, discretization and edge costs.
    pub scene_hash: String,
    pub costs: EdgeCosts,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl GraphCache {
    pub fn from_graph(graph: &ManipulationGraph, scene_hash: &str) -> Self {
        Self {
            version: CACHE_VERSION,
            scene_hash: scene_hash.to_string(),
            costs: *graph.costs(),
            nodes: graph.nodes().to_vec(),
            edges: graph.explicit_edges().to_vec(),
        }
    }

    pub fn into_graph(self) -> ManipulationGraph {
        ManipulationGraph::from_parts(self.nodes, self.edges, self.costs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph cache serializes")
    }
}

pub fn build_hash(scene: &Scene, grasps: &[GraspAnnotation], disc: &Discretization, costs: &EdgeCosts) -> String {
    let mut h = Sha256::new();
    h.update(scene.to_toml_string().as_bytes());
    h.update(serde_json::to_vec(grasps).expect("grasps serialize"));
    h.update(serde_json::to_vec(disc).expect("discretization serializes"));
    h.update(serde_json::to_vec(costs).expect("costs serialize"));
    hex::encode(h.finalize())
}

pub fn save_cache(path: &Path, graph: &ManipulationGraph, scene_hash: &str) -> Result<(), GraphError> {
    fs::write(path, GraphCache::from_graph(graph, scene_hash).to_json()).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a cache, rejecting it when it was built from different inputs.
pub fn load_cache(path: &Path, expected_hash: &str) -> Result<ManipulationGraph, GraphError> {
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cache = parse_cache(&text)?;
    if cache.scene_hash != expected_hash {
        return Err(GraphError::CacheMismatch {
            expected: expected_hash.to_string(),
            found: cache.scene_hash,
        });
    }
    Ok(cache.into_graph())
}

pub(crate) fn parse_cache(text: &str) -> Result<GraphCache, GraphError> {
    #[derive(Deserialize)]
    struct Header {
        version: u32,
    }
    let header: Header = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    if header.version != CACHE_VERSION {
        return Err(GraphError::CacheVersion(header.version));
    }
    let cache: GraphCache = serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    for (i, n) in cache.nodes.iter().enumerate() {
        if n.id != i {
            return Err(GraphError::Parse(format!("node {i} carries id {}", n.id)));
        }
    }
    if cache
        .edges
        .iter()
        .any(|e| e.from >= cache.nodes.len() || e.to >= cache.nodes.len() || e.kind == super::EdgeKind::Translation)
    {
        return Err(GraphError::Parse("edge list references unknown nodes".into()));
    }
    Ok(cache)
}
