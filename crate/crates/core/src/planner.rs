//! End-to-end commands: load scene and task files, build or load the graph,
//! search, interpolate, verify and write artifacts.
//!
//! Every command computes all of its output in memory first and writes files
//! only once nothing can fail any more, so a failed run leaves no artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::error::{GraphError, MotionError, SamplingError, SceneError};
use crate::geometry::{ContactCoords, Transform};
use crate::graph::{
    block_edges, build_hash, build_manipulation_graph, search_path, BuildStats, EdgeCosts, EdgeKind, GraphCache,
    ManipulationGraph, NodeSelector, PlanPath,
};
use crate::motion::{assemble_trajectory, verify_trajectory, MotionParams, Trajectory, VerificationReport};
use crate::output::{frame_svg, plan_json, plan_text, trajectory_text, verification_text};
use crate::sampling::{
    annotate_grasps, default_grasp_set, filter_feasible, load_grasp_set, Discretization, GraspAnnotation, NodeKind,
};
use crate::scene::{load_scene, PoseSpec, Scene, TaskSpec};

/// Environment variable naming the default graph cache directory.
pub const CACHE_DIR_ENV: &str = "REPOSE_CACHE_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        RunError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 0 ok, 2 validation, 3 no path, 4 verification, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scene(SceneError::Io { .. }) | RunError::Graph(GraphError::Io { .. }) | RunError::Write { .. } => 5,
            RunError::Graph(GraphError::NoPath) => 3,
            RunError::Motion(_) => 4,
            _ => 2,
        }
    }

    /// Short machine-readable category for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            3 => "no_path",
            4 => "verification",
            5 => "io",
            _ => "validation",
        }
    }
}

/// One endpoint of a task or of a blocked pair, in surface contact coordinates.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSpec {
    pub placement: [f64; 2],
    pub yaw_deg: f64,
    pub tilt_deg: f64,
    /// Grasp id; any grasp at the pose when absent.
    #[serde(default)]
    pub grasp: Option<u32>,
}

impl EndpointSpec {
    pub fn pose(&self, scene: &Scene) -> Transform {
        PoseSpec::Contact {
            placement: self.placement,
            yaw_deg: self.yaw_deg,
            tilt_deg: self.tilt_deg,
        }
        .resolve(&scene.surface)
    }

    pub fn selector(&self, scene: &Scene) -> NodeSelector {
        match self.grasp {
            Some(g) => NodeSelector::PoseGrasp(self.pose(scene), g),
            None => NodeSelector::Pose(self.pose(scene)),
        }
    }
}

/// Graph edges to remove: every edge between a node selected by `a` and one selected by `b`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockedPair {
    pub a: EndpointSpec,
    pub b: EndpointSpec,
}

/// Discretization as written in files and flags. Angles in degrees; absent
/// fields keep the defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationOverrides {
    pub grid_spacing: Option<f64>,
    pub x_steps_deg: Option<Vec<f64>>,
    pub z_steps_deg: Option<Vec<f64>>,
    pub stable_yaws_deg: Option<Vec<f64>>,
}

impl DiscretizationOverrides {
    /// `self` on top of `base`.
    pub fn merged_over(&self, base: &DiscretizationOverrides) -> DiscretizationOverrides {
        DiscretizationOverrides {
            grid_spacing: self.grid_spacing.or(base.grid_spacing),
            x_steps_deg: self.x_steps_deg.clone().or_else(|| base.x_steps_deg.clone()),
            z_steps_deg: self.z_steps_deg.clone().or_else(|| base.z_steps_deg.clone()),
            stable_yaws_deg: self.stable_yaws_deg.clone().or_else(|| base.stable_yaws_deg.clone()),
        }
    }

    /// Applies to the defaults and checks documented ranges: spacing in
    /// [0.01, 1] m, tilt steps in [0, 90] deg, yaw steps in [0, 360) deg, no
    /// step list empty except the stable yaws.
    pub fn resolve(&self) -> Result<Discretization, RunError> {
        let mut d = Discretization::default();
        if let Some(s) = self.grid_spacing {
            if !(0.01..=1.0).contains(&s) {
                return Err(RunError::invalid("discretization.grid_spacing", "must be in [0.01, 1.0] m"));
            }
            d.grid_spacing = s;
        }
        let angles = |field: &str, v: &[f64], lo: f64, hi: f64, hi_open: bool, allow_empty: bool| {
            if v.is_empty() && !allow_empty {
                return Err(RunError::invalid(field, "must not be empty"));
            }
            for &a in v {
                let ok = a.is_finite() && a >= lo && if hi_open { a < hi } else { a <= hi };
                if !ok {
                    let bracket = if hi_open { ")" } else { "]" };
                    return Err(RunError::invalid(field, format!("{a} outside [{lo}, {hi}{bracket} deg")));
                }
            }
            Ok(v.iter().map(|a| a.to_radians()).collect::<Vec<_>>())
        };
        if let Some(v) = &self.x_steps_deg {
            d.x_steps = angles("discretization.x_steps_deg", v, 0.0, 90.0, false, false)?;
        }
        if let Some(v) = &self.z_steps_deg {
            d.z_steps = angles("discretization.z_steps_deg", v, 0.0, 360.0, true, false)?;
        }
        if let Some(v) = &self.stable_yaws_deg {
            d.stable_yaws = angles("discretization.stable_yaws_deg", v, 0.0, 360.0, true, true)?;
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostOverrides {
    pub translation: Option<f64>,
    pub grasp_transition: Option<f64>,
    pub regrasp: Option<f64>,
}

impl CostOverrides {
    pub fn merged_over(&self, base: &CostOverrides) -> CostOverrides {
        CostOverrides {
            translation: self.translation.or(base.translation),
            grasp_transition: self.grasp_transition.or(base.grasp_transition),
            regrasp: self.regrasp.or(base.regrasp),
        }
    }

    pub fn resolve(&self) -> Result<EdgeCosts, RunError> {
        let d = EdgeCosts::default();
        let costs = EdgeCosts {
            translation: self.translation.unwrap_or(d.translation),
            grasp_transition: self.grasp_transition.unwrap_or(d.grasp_transition),
            regrasp: self.regrasp.unwrap_or(d.regrasp),
        };
        if !costs.is_valid() {
            return Err(RunError::invalid("costs", "edge costs must be finite and >= 0"));
        }
        Ok(costs)
    }
}

/// Task file. Relative paths resolve against the task file's directory.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub scene: Option<PathBuf>,
    pub grasps: Option<PathBuf>,
    pub start: Option<EndpointSpec>,
    pub goal: Option<EndpointSpec>,
    #[serde(default)]
    pub discretization: DiscretizationOverrides,
    #[serde(default)]
    pub costs: CostOverrides,
    #[serde(default)]
    pub motion: MotionParams,
    #[serde(default)]
    pub blocked: Vec<BlockedPair>,
}

impl TaskFile {
    pub fn parse(text: &str) -> Result<Self, SceneError> {
        toml::from_str(text).map_err(|e| SceneError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let text = fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut task = Self::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut task.scene, &mut task.grasps].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(task)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockedFile {
    #[serde(default)]
    blocked: Vec<BlockedPair>,
}

/// Everything one command needs. Values given here win over the task file.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub task: Option<PathBuf>,
    pub scene: Option<PathBuf>,
    pub grasps: Option<PathBuf>,
    /// Graph cache file. Defaults to `<$REPOSE_CACHE_DIR>/<hash>.json` when
    /// that variable is set.
    pub cache: Option<PathBuf>,
    pub discretization: DiscretizationOverrides,
    pub costs: CostOverrides,
    /// File of `[[blocked]]` pairs replacing the task's list.
    pub blocked: Option<PathBuf>,
    /// Ignore every blocked pair.
    pub unblock: bool,
    pub out_dir: PathBuf,
    /// Write one SVG side view per critical pose.
    pub frames: bool,
    /// Also write the plan summary as JSON.
    pub json: bool,
}

/// Inputs resolved and validated.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub scene: Scene,
    pub grasps: Vec<GraspAnnotation>,
    pub discretization: Discretization,
    pub costs: EdgeCosts,
    pub motion: MotionParams,
    pub start: Option<EndpointSpec>,
    pub goal: Option<EndpointSpec>,
    pub blocked: Vec<BlockedPair>,
    pub hash: String,
}

pub fn prepare(config: &RunConfig) -> Result<Prepared, RunError> {
    let task = match &config.task {
        Some(p) => Some(TaskFile::load(p)?),
        None => None,
    };
    let scene_path = config
        .scene
        .clone()
        .or_else(|| task.as_ref().and_then(|t| t.scene.clone()))
        .ok_or_else(|| RunError::invalid("scene", "no scene file given"))?;
    let scene = load_scene(&scene_path)?;
    let grasps = match config.grasps.clone().or_else(|| task.as_ref().and_then(|t| t.grasps.clone())) {
        Some(p) => load_grasp_set(&scene, p)?,
        None => default_grasp_set(&scene),
    };
    let (file_disc, file_costs) = task
        .as_ref()
        .map(|t| (t.discretization.clone(), t.costs))
        .unwrap_or_default();
    let discretization = config.discretization.merged_over(&file_disc).resolve()?;
    let costs = config.costs.merged_over(&file_costs).resolve()?;
    let motion = task.as_ref().map(|t| t.motion).unwrap_or_default();
    if !motion.is_valid() {
        return Err(RunError::invalid("motion", "step sizes and tolerance must be > 0, clearance >= 0"));
    }
    let blocked = if config.unblock {
        Vec::new()
    } else if let Some(p) = &config.blocked {
        let text = fs::read_to_string(p).map_err(|source| SceneError::Io {
            path: p.clone(),
            source,
        })?;
        let f: BlockedFile = toml::from_str(&text).map_err(|e| SceneError::Parse(e.to_string()))?;
        f.blocked
    } else {
        task.as_ref().map(|t| t.blocked.clone()).unwrap_or_default()
    };
    let (start, goal) = task.map(|t| (t.start, t.goal)).unwrap_or_default();
    let hash = build_hash(&scene, &grasps, &discretization, &costs);
    Ok(Prepared {
        scene,
        grasps,
        discretization,
        costs,
        motion,
        start,
        goal,
        blocked,
        hash,
    })
}

impl Prepared {
    fn cache_path(&self, config: &RunConfig) -> Option<PathBuf> {
        config.cache.clone().or_else(|| {
            std::env::var_os(CACHE_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{}.json", self.hash)))
        })
    }

    fn build(&self) -> Result<(ManipulationGraph, BuildStats), RunError> {
        Ok(build_manipulation_graph(&self.scene, &self.grasps, &self.discretization, self.costs)?)
    }

    fn apply_blocks(&self, graph: &mut ManipulationGraph) -> Result<(), RunError> {
        let pairs: Vec<_> = self
            .blocked
            .iter()
            .map(|b| (b.a.selector(&self.scene), b.b.selector(&self.scene)))
            .collect();
        Ok(block_edges(graph, &pairs)?)
    }
}

/// One file to write, relative to its command's output location.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

/// Writes every artifact or none: each goes to a `.partial` sibling first and
/// is renamed into place only after all writes succeeded.
pub fn write_artifacts(artifacts: &[Artifact]) -> Result<(), RunError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| RunError::Write { path, source }
    };
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let result = (|| {
        for a in artifacts {
            if let Some(dir) = a.path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io(dir))?;
            }
            let mut tmp = a.path.clone().into_os_string();
            tmp.push(".partial");
            let tmp = PathBuf::from(tmp);
            fs::write(&tmp, &a.contents).map_err(io(&tmp))?;
            staged.push((tmp, a.path.clone()));
        }
        for (tmp, dest) in &staged {
            fs::rename(tmp, dest).map_err(io(dest))?;
        }
        Ok(())
    })();
    if result.is_err() {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
    }
    result
}

pub struct PlanOutcome {
    pub graph: ManipulationGraph,
    pub path: PlanPath,
    pub trajectory: Trajectory,
    pub report: VerificationReport,
    pub artifacts: Vec<Artifact>,
}

/// Graph for a run: from the cache when one exists, built otherwise. The
/// second value is the cache document to write, if the graph was built.
fn obtain_graph(prep: &Prepared, cache: Option<&Path>) -> Result<(ManipulationGraph, Option<String>), RunError> {
    if let Some(p) = cache.filter(|p| p.exists()) {
        return Ok((crate::graph::load_cache(p, &prep.hash)?, None));
    }
    let (graph, _) = prep.build()?;
    let doc = cache.map(|_| GraphCache::from_graph(&graph, &prep.hash).to_json());
    Ok((graph, doc))
}

/// Plans without touching the file system beyond reading inputs and the cache.
pub fn run_plan(config: &RunConfig) -> Result<PlanOutcome, RunError> {
    let prep = prepare(config)?;
    let (start, goal) = match (&prep.start, &prep.goal) {
        (Some(s), Some(g)) => (s.clone(), g.clone()),
        _ => return Err(RunError::invalid("task", "start and goal are required")),
    };
    TaskSpec::new(&prep.scene, start.pose(&prep.scene), goal.pose(&prep.scene))?;
    let cache = prep.cache_path(config);
    let (mut graph, cache_doc) = obtain_graph(&prep, cache.as_deref())?;
    prep.apply_blocks(&mut graph)?;
    let path = search_path(&graph, &start.selector(&prep.scene), &goal.selector(&prep.scene))?;
    let trajectory = assemble_trajectory(&prep.scene, &graph, &path, &prep.motion)?;
    let report = verify_trajectory(&prep.scene, &trajectory, &prep.motion);

    let out = &config.out_dir;
    let mut artifacts = vec![
        Artifact {
            path: out.join("plan.txt"),
            contents: plan_text(&graph, &path),
        },
        Artifact {
            path: out.join("trajectory.txt"),
            contents: trajectory_text(&trajectory),
        },
        Artifact {
            path: out.join("verification.txt"),
            contents: verification_text(&report),
        },
    ];
    if config.json {
        artifacts.push(Artifact {
            path: out.join("plan.json"),
            contents: plan_json(&graph, &path),
        });
    }
    if config.frames {
        for (i, &id) in path.nodes.iter().enumerate() {
            let n = graph.node(id);
            let title = format!("critical pose {i}: node {id}, grasp {}", n.grasp_id());
            let (svg, _) = frame_svg(&prep.scene, n.object_pose(), &n.candidate.gripper_world, &title);
            artifacts.push(Artifact {
                path: out.join("frames").join(format!("frame_{i:03}.svg")),
                contents: svg,
            });
        }
    }
    if let (Some(p), Some(doc)) = (cache, cache_doc) {
        artifacts.push(Artifact { path: p, contents: doc });
    }
    Ok(PlanOutcome {
        graph,
        path,
        trajectory,
        report,
        artifacts,
    })
}

/// `plan`: runs the planner and writes its artifacts. Returns the stdout summary.
pub fn cmd_plan(config: &RunConfig) -> Result<String, RunError> {
    let outcome = run_plan(config)?;
    write_artifacts(&outcome.artifacts)?;
    let p = &outcome.path;
    let kinds: Vec<&str> = p.edges.iter().map(|e| e.kind.as_str()).collect();
    Ok(format!(
        "critical poses {}\nedges [{}]\ntotal cost {}\nwaypoints {}\nverification {}\n",
        p.nodes.len(),
        kinds.join(", "),
        p.total_cost,
        outcome.trajectory.total_waypoints(),
        if outcome.report.passed() { "pass" } else { "fail" }
    ))
}

fn counts_text(graph: &ManipulationGraph) -> String {
    let mut out = String::new();
    let nodes = graph.node_counts();
    let _ = writeln!(out, "nodes {}", graph.len());
    for kind in [NodeKind::Drooping, NodeKind::Regrasp, NodeKind::Connecting] {
        let _ = writeln!(out, "nodes.{} {}", kind.as_str(), nodes.get(&kind).copied().unwrap_or(0));
    }
    let edges = graph.edge_counts();
    for kind in [EdgeKind::GraspTransition, EdgeKind::Translation, EdgeKind::Regrasp] {
        let _ = writeln!(out, "edges.{} {}", kind.as_str(), edges.get(&kind).copied().unwrap_or(0));
    }
    out
}

/// `build-graph`: builds the combined graph and writes the cache. Returns the
/// stdout report of node and edge counts.
pub fn cmd_build_graph(config: &RunConfig) -> Result<String, RunError> {
    let prep = prepare(config)?;
    let (graph, stats) = prep.build()?;
    let path = prep
        .cache_path(config)
        .unwrap_or_else(|| config.out_dir.join("graph.json"));
    write_artifacts(&[Artifact {
        path: path.clone(),
        contents: GraphCache::from_graph(&graph, &prep.hash).to_json(),
    }])?;
    let mut out = format!("cache {}\nhash {}\n", path.display(), prep.hash);
    let _ = writeln!(out, "placements {}", stats.placements);
    let _ = writeln!(out, "bouquet_poses {}", stats.bouquet_poses);
    let _ = writeln!(out, "stable_poses {}", stats.stable_poses);
    let _ = writeln!(out, "candidates {}", stats.candidates);
    for (reason, n) in &stats.rejected {
        let _ = writeln!(out, "rejected.{} {n}", reason.as_str());
    }
    out.push_str(&counts_text(&graph));
    Ok(out)
}

/// What `inspect` reports on.
#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    Summary,
    Kind(NodeKind),
    Grasp(u32),
    Node(usize),
    Edge(usize, usize),
}

impl std::str::FromStr for Query {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RunError::invalid("query", format!("cannot parse `{s}`"));
        if s == "summary" {
            return Ok(Query::Summary);
        }
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "kind" => match rest {
                "drooping" => Ok(Query::Kind(NodeKind::Drooping)),
                "regrasp" => Ok(Query::Kind(NodeKind::Regrasp)),
                "connecting" => Ok(Query::Kind(NodeKind::Connecting)),
                _ => Err(bad()),
            },
            "grasp" => rest.parse().map(Query::Grasp).map_err(|_| bad()),
            "node" => rest.parse().map(Query::Node).map_err(|_| bad()),
            "edge" => {
                let (a, b) = rest.split_once('-').ok_or_else(bad)?;
                Ok(Query::Edge(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
            }
            _ => Err(bad()),
        }
    }
}

fn inspect_node(prep: &Prepared, graph: &ManipulationGraph, id: usize) -> String {
    let n = graph.node(id);
    let c = ContactCoords::from_pose(n.object_pose());
    // grasps rejected at this pose, and why
    let rejected: Vec<String> = annotate_grasps(n.object_pose(), &prep.grasps, n.kind)
        .map(|cands| filter_feasible(&prep.scene, cands))
        .unwrap_or_default()
        .iter()
        .filter_map(|c| c.reject_reason.map(|r| format!("{}:{}", c.grasp.id, r.as_str())))
        .collect();
    let explicit = graph
        .out_edges(id)
        .iter()
        .filter(|e| e.kind != EdgeKind::Translation)
        .count();
    let translation = graph
        .out_edges(id)
        .iter()
        .filter(|e| e.kind == EdgeKind::Translation)
        .count();
    format!(
        "node {id} kind={} grasp={} phi_deg={:.4} pivot={:.6} {:.6} {:.6} yaw_deg={:.4} tilt_deg={:.4} feasible=true out.explicit={explicit} out.translation={translation} rejected_grasps={}\n",
        n.kind.as_str(),
        n.grasp_id(),
        n.candidate.grasp.phi.to_degrees(),
        c.pivot.x,
        c.pivot.y,
        c.pivot.z,
        c.yaw.to_degrees(),
        c.tilt.to_degrees(),
        if rejected.is_empty() { "-".to_string() } else { rejected.join(",") }
    )
}

/// Report for one query against a graph, with blocked pairs applied.
pub fn inspect_graph(prep: &Prepared, graph: &ManipulationGraph, query: &Query) -> Result<String, RunError> {
    let mut out = String::new();
    match query {
        Query::Summary => {
            out.push_str(&counts_text(graph));
            let _ = writeln!(out, "blocked {}", graph.blocked().len());
            let mut groups = std::collections::BTreeMap::new();
            for n in graph.nodes() {
                for f in n.families() {
                    *groups.entry((*f, n.grasp_id())).or_insert(0usize) += 1;
                }
            }
            let _ = writeln!(out, "translation_groups {}", groups.len());
            let _ = writeln!(out, "largest_translation_group {}", groups.values().max().copied().unwrap_or(0));
            let isolated = (0..graph.len()).filter(|&i| graph.out_edges(i).is_empty()).count();
            let _ = writeln!(out, "isolated_nodes {isolated}");
        }
        Query::Kind(k) => {
            for n in graph.nodes().iter().filter(|n| n.kind == *k) {
                out.push_str(&inspect_node(prep, graph, n.id));
            }
        }
        Query::Grasp(g) => {
            for n in graph.nodes().iter().filter(|n| n.grasp_id() == *g) {
                out.push_str(&inspect_node(prep, graph, n.id));
            }
        }
        Query::Node(i) => {
            NodeSelector::Node(*i).resolve(graph)?;
            out.push_str(&inspect_node(prep, graph, *i));
        }
        Query::Edge(a, b) => {
            NodeSelector::Node(*a).resolve(graph)?;
            NodeSelector::Node(*b).resolve(graph)?;
            let e = graph
                .edge_between(*a, *b)
                .ok_or_else(|| GraphError::UnresolvedSelector(format!("edge {a}-{b}")))?;
            let _ = write!(
                out,
                "edge {a}-{b} kind={} cost={} blocked={}",
                e.kind.as_str(),
                e.cost,
                graph.is_blocked(*a, *b)
            );
            if let Some(c) = e.command {
                let _ = write!(
                    out,
                    " direction={} distance={:.6} theta_init_deg={:.4} alpha_deg={:.4}",
                    c.direction.as_str(),
                    c.distance,
                    c.theta_init.to_degrees(),
                    c.theta_target.to_degrees()
                );
            }
            out.push('\n');
        }
    }
    if out.is_empty() {
        return Err(GraphError::UnresolvedSelector(format!("{query:?}")).into());
    }
    Ok(out)
}

/// `inspect`: reads the cached graph for this configuration and reports on
/// `query`. The cache must already exist.
pub fn cmd_inspect(config: &RunConfig, query: &Query) -> Result<String, RunError> {
    let prep = prepare(config)?;
    let path = prep
        .cache_path(config)
        .unwrap_or_else(|| config.out_dir.join("graph.json"));
    let mut graph = crate::graph::load_cache(&path, &prep.hash)?;
    prep.apply_blocks(&mut graph)?;
    inspect_graph(&prep, &graph, query)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_parsing() {
        assert_eq!("summary".parse::<Query>().unwrap(), Query::Summary);
        assert_eq!("kind:connecting".parse::<Query>().unwrap(), Query::Kind(NodeKind::Connecting));
        assert_eq!("grasp:3".parse::<Query>().unwrap(), Query::Grasp(3));
        assert_eq!("edge:4-17".parse::<Query>().unwrap(), Query::Edge(4, 17));
        assert!("kind:flat".parse::<Query>().is_err());
        assert!("edge:4".parse::<Query>().is_err());
    }

    #[test]
    fn discretization_ranges() {
        let ok = DiscretizationOverrides {
            grid_spacing: Some(0.1),
            z_steps_deg: Some(vec![0.0, 90.0]),
            stable_yaws_deg: Some(vec![]),
            ..Default::default()
        };
        let d = ok.resolve().unwrap();
        assert_eq!(d.z_steps.len(), 2);
        assert!(d.stable_yaws.is_empty());
        let bad = DiscretizationOverrides {
            x_steps_deg: Some(vec![95.0]),
            ..Default::default()
        };
        assert!(matches!(bad.resolve(), Err(RunError::Validation { .. })));
        let empty = DiscretizationOverrides {
            z_steps_deg: Some(vec![]),
            ..Default::default()
        };
        assert!(empty.resolve().is_err());
        let full_turn = DiscretizationOverrides {
            z_steps_deg: Some(vec![360.0]),
            ..Default::default()
        };
        assert!(full_turn.resolve().is_err());
    }

    #[test]
    fn overrides_win_over_file() {
        let file = CostOverrides {
            regrasp: Some(9.0),
            translation: Some(2.0),
            ..Default::default()
        };
        let flag = CostOverrides {
            regrasp: Some(4.0),
            ..Default::default()
        };
        let c = flag.merged_over(&file).resolve().unwrap();
        assert_eq!((c.translation, c.grasp_transition, c.regrasp), (2.0, 3.0, 4.0));
        let neg = CostOverrides {
            translation: Some(-1.0),
            ..Default::default()
        };
        assert!(neg.resolve().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::from(GraphError::NoPath).exit_code(), 3);
        assert_eq!(RunError::from(MotionError::Verification("x".into())).exit_code(), 4);
        let io = SceneError::Io {
            path: "x".into(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        };
        assert_eq!(RunError::from(io).exit_code(), 5);
        assert_eq!(RunError::invalid("f", "m").exit_code(), 2);
        assert_eq!(RunError::from(SceneError::Parse("x".into())).exit_code(), 2);
    }

    #[test]
    fn task_file_rejects_unknown_keys() {
        let text = "scene = \"s.toml\"\n[start]\nplacement = [0.0, 0.0]\nyaw_deg = 0.0\ntilt_deg = 0.0\ncolour = 1\n";
        assert!(TaskFile::parse(text).is_err());
        let text = "scene = \"s.toml\"\n[start]\nplacement = [0.0, 0.0]\nyaw_deg = 0.0\ntilt_deg = 0.0\ngrasp = 2\n";
        let t = TaskFile::parse(text).unwrap();
        assert_eq!(t.start.unwrap().grasp, Some(2));
    }

    #[test]
    fn artifacts_all_or_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        fs::write(&blocker, "file, not a directory").unwrap();
        let arts = vec![
            Artifact {
                path: dir.path().join("a.txt"),
                contents: "a".into(),
            },
            Artifact {
                path: blocker.join("b.txt"),
                contents: "b".into(),
            },
        ];
        assert!(matches!(write_artifacts(&arts), Err(RunError::Write { .. })));
        let mut names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert_eq!(names, vec![std::ffi::OsString::from("blocker")]);
        write_artifacts(&arts[..1]).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("a.txt")).unwrap(), "a");
    }
}
