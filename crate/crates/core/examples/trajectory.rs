//! Turn a searched path into waypoints and re-check them independently:
//! contact gap, droop condition, payload, reach and step sizes.
//!
//!     cargo run --example trajectory

use std::path::Path;

use repose::graph::{build_manipulation_graph, search_path, EdgeCosts, NodeSelector};
use repose::motion::{assemble_trajectory, verify_trajectory, MotionParams};
use repose::sampling::{default_grasp_set, Discretization};
use repose::scene::PoseSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = repose::load_scene(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/stick_scene.toml"))?;
    let disc = Discretization {
        grid_spacing: 0.1,
        z_steps: vec![0.0, 90f64.to_radians(), 180f64.to_radians(), 270f64.to_radians()],
        stable_yaws: vec![],
        ..Discretization::default()
    };
    let (graph, _) = build_manipulation_graph(&scene, &default_grasp_set(&scene), &disc, EdgeCosts::default())?;
    let at = |x: f64, tilt: f64, grasp| {
        let pose = PoseSpec::Contact {
            placement: [x, 0.0],
            yaw_deg: 270.0,
            tilt_deg: tilt,
        }
        .resolve(&scene.surface);
        NodeSelector::PoseGrasp(pose, grasp)
    };
    let path = search_path(&graph, &at(0.0, 0.0, 2), &at(0.2, 60.0, 1))?;

    let params = MotionParams::default();
    let traj = assemble_trajectory(&scene, &graph, &path, &params)?;
    for seg in &traj.segments {
        let first = &seg.waypoints[0];
        let last = seg.waypoints.last().unwrap();
        println!(
            "{:<16} {:>4} waypoints  theta {:>5.1} -> {:>5.1} deg  gripper z {:.3} -> {:.3} m",
            seg.kind.as_str(),
            seg.waypoints.len(),
            first.theta.to_degrees(),
            last.theta.to_degrees(),
            first.gripper_pose.translation().z,
            last.gripper_pose.translation().z
        );
    }

    let report = verify_trajectory(&scene, &traj, &params);
    let max_gap = report.waypoints.iter().map(|w| w.contact_gap).fold(f64::MIN, f64::max);
    let max_load = report.waypoints.iter().map(|w| w.f_grip).fold(0.0, f64::max);
    println!(
        "\n{} waypoints, max gap {:.2e} m, max gripper load {:.2} N, {}",
        traj.total_waypoints(),
        max_gap,
        max_load,
        if report.passed() { "verified" } else { "FAILED" }
    );
    for v in &report.violations {
        println!("  {v:?}");
    }
    Ok(())
}
