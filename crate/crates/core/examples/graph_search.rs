//! Build the manipulation graph for the stick at a coarse resolution and
//! search it between two poses.
//!
//!     cargo run --example graph_search

use std::path::Path;

use repose::graph::{build_manipulation_graph, search_path, EdgeCosts, NodeSelector};
use repose::scene::PoseSpec;
use repose::sampling::{default_grasp_set, Discretization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = repose::load_scene(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/stick_scene.toml"))?;
    let grasps = default_grasp_set(&scene);
    let disc = Discretization {
        grid_spacing: 0.1,
        z_steps: vec![0.0, 90f64.to_radians(), 180f64.to_radians(), 270f64.to_radians()],
        ..Discretization::default()
    };
    let (graph, stats) = build_manipulation_graph(&scene, &grasps, &disc, EdgeCosts::default())?;
    println!("{} candidates, {} feasible nodes", stats.candidates, graph.len());
    for (kind, n) in graph.node_counts() {
        println!("  node {:<11} {n}", kind.as_str());
    }
    for (kind, n) in graph.edge_counts() {
        println!("  edge {:<16} {n}", kind.as_str());
    }

    let pose = |x: f64, tilt: f64| {
        PoseSpec::Contact {
            placement: [x, 0.0],
            yaw_deg: 270.0,
            tilt_deg: tilt,
        }
        .resolve(&scene.surface)
    };
    let start = NodeSelector::PoseGrasp(pose(0.0, 0.0), 2);
    let goal = NodeSelector::PoseGrasp(pose(0.2, 60.0), 1);
    let path = search_path(&graph, &start, &goal)?;
    println!("\npath cost {}", path.total_cost);
    for e in &path.edges {
        let n = graph.node(e.to);
        let c = n.candidate.contact();
        println!(
            "  {:<16} -> node {:>5}  grasp {}  tilt {:>4.1} deg",
            e.kind.as_str(),
            e.to,
            n.grasp_id(),
            c.tilt.to_degrees()
        );
    }
    Ok(())
}
