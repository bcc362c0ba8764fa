//! Gravity torque on the stick as the gripper tilts, where it starts to
//! droop, and how far the gripper must move for a given in-hand rotation.
//!
//!     cargo run --example droop_mechanics

use std::path::Path;

use repose::mechanics::{
    droop_occurs, droop_threshold_angle, friction_torque_limit, gravity_torque, transition_distance_down,
    transition_distance_up, GraspState,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = repose::load_scene(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/stick_scene.toml"))?;
    let l = scene.object.length();
    let r_com = l / 2.0;
    println!("friction limit {:.4} N m", friction_torque_limit(&scene.gripper));

    println!("\ntheta  phi=0       phi=45      phi=90");
    for deg in (0..=90).step_by(15) {
        let theta = (deg as f64).to_radians();
        let row: Vec<String> = [0.0f64, 45.0, 90.0]
            .iter()
            .map(|phi| {
                let gs = GraspState::new(theta, phi.to_radians(), r_com).unwrap();
                let mark = if droop_occurs(&scene, &gs) { '*' } else { ' ' };
                format!("{:8.4}{mark}", gravity_torque(&scene, &gs))
            })
            .collect();
        println!("{deg:>5}  {}", row.join("  "));
    }
    println!("(* = droops)");

    for phi in [0.0f64, 45.0, 90.0] {
        match droop_threshold_angle(&scene, phi.to_radians(), r_com) {
            Some(t) => println!("phi {phi:>4}: droops above {:.2} deg", t.to_degrees()),
            None => println!("phi {phi:>4}: never droops"),
        }
    }

    println!("\nlever {l} m");
    for (init, alpha) in [(0.0, 30.0), (30.0, 45.0), (45.0, 45.0)] {
        let (a, b) = (f64::to_radians(init), f64::to_radians(alpha));
        let up = transition_distance_up(l, a, b)?;
        let down = transition_distance_down(l, a + b, b)?;
        println!("{init:>4} -> {:>4} deg: up {up:.4} m, back down {down:.4} m", init + alpha);
    }
    Ok(())
}
