//! End to end: read a task file, plan, and write plan.txt, plan.json,
//! trajectory.txt, verification.txt and one SVG frame per critical pose.
//!
//!     cargo run --example plan_task [task.toml] [out_dir]

use std::path::{Path, PathBuf};

use repose::planner::{run_plan, write_artifacts, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let task = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/task3_regrasp.toml"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out/example_plan"));
    let config = RunConfig {
        task: Some(task.clone()),
        out_dir: out.clone(),
        frames: true,
        json: true,
        ..RunConfig::default()
    };
    let outcome = run_plan(&config)?;
    println!("{}: cost {}", task.display(), outcome.path.total_cost);
    for (e, n) in outcome.path.edges.iter().zip(&outcome.path.nodes[1..]) {
        let c = outcome.graph.node(*n).candidate.contact();
        println!(
            "  {:<16} grasp {}  tilt {:>4.1} deg",
            e.kind.as_str(),
            outcome.graph.node(*n).grasp_id(),
            c.tilt.to_degrees()
        );
    }
    println!(
        "{} waypoints, verification {}",
        outcome.trajectory.total_waypoints(),
        if outcome.report.passed() { "pass" } else { "fail" }
    );
    write_artifacts(&outcome.artifacts)?;
    for a in &outcome.artifacts {
        println!("wrote {}", a.path.display());
    }
    Ok(())
}
