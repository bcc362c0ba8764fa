//! Discretize the stick's surface, fan a bouquet of tilted and turned poses
//! around one placement, and see which grasps survive the feasibility filter.
//!
//!     cargo run --example bouquet [grid_spacing]

use std::collections::BTreeMap;
use std::path::Path;

use repose::sampling::{annotate_grasps, default_grasp_set, generate_bouquet, rejection, Discretization, NodeKind};
use repose::{discretize_surface, object_lowest_point};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = repose::load_scene(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/stick_scene.toml"))?;
    let mut disc = Discretization::default();
    if let Some(s) = std::env::args().nth(1) {
        disc.grid_spacing = s.parse()?;
    }
    let grid = discretize_surface(&scene.surface, disc.grid_spacing)?;
    println!("{} placements at {} m spacing", grid.len(), disc.grid_spacing);

    let placement = &grid[grid.len() / 2];
    let bouquet = generate_bouquet(&scene, placement, &disc.x_steps, &disc.z_steps)?;
    println!(
        "bouquet at ({:.2}, {:.2}): {} poses = {} tilts x {} yaws",
        placement.position.x,
        placement.position.y,
        bouquet.poses.len(),
        disc.x_steps.len(),
        disc.z_steps.len()
    );

    let grasps = default_grasp_set(&scene);
    let mut outcome: BTreeMap<&str, usize> = BTreeMap::new();
    let mut lowest = f64::INFINITY;
    for bp in &bouquet.poses {
        lowest = lowest.min(object_lowest_point(&scene.object, &bp.pose).z - scene.surface.height());
        for c in annotate_grasps(&bp.pose, &grasps, NodeKind::Drooping)? {
            let key = rejection(&scene, &c).map_or("feasible", |r| r.as_str());
            *outcome.entry(key).or_default() += 1;
        }
    }
    println!("lowest point above surface: {lowest:.2e} m");
    for (k, n) in outcome {
        println!("  {k:<12} {n}");
    }
    Ok(())
}
