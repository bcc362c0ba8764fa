//! Save a built graph, load it back under the same content hash, and watch
//! a changed cost table invalidate it.
//!
//!     cargo run --example graph_cache

use std::path::Path;

use repose::graph::{build_hash, build_manipulation_graph, load_cache, save_cache, EdgeCosts};
use repose::sampling::{default_grasp_set, Discretization};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = repose::load_scene(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/stick_scene.toml"))?;
    let grasps = default_grasp_set(&scene);
    let disc = Discretization {
        grid_spacing: 0.1,
        z_steps: vec![0.0, 90f64.to_radians(), 180f64.to_radians(), 270f64.to_radians()],
        ..Discretization::default()
    };
    let costs = EdgeCosts::default();
    let (graph, _) = build_manipulation_graph(&scene, &grasps, &disc, costs)?;
    let hash = build_hash(&scene, &grasps, &disc, &costs);

    let dir = std::env::temp_dir().join("repose-cache-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("{hash}.json"));
    save_cache(&path, &graph, &hash)?;
    println!("saved {} nodes to {} ({} bytes)", graph.len(), path.display(), std::fs::metadata(&path)?.len());

    let loaded = load_cache(&path, &hash)?;
    println!("reloaded: {} nodes, identical = {}", loaded.len(), loaded.nodes() == graph.nodes() && loaded.explicit_edges() == graph.explicit_edges());

    let dearer = EdgeCosts {
        regrasp: 10.0,
        ..costs
    };
    match load_cache(&path, &build_hash(&scene, &grasps, &disc, &dearer)) {
        Ok(_) => println!("unexpected: stale cache accepted"),
        Err(e) => println!("with regrasp cost 10: {e}"),
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
