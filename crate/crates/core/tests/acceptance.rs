//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Run with `cargo test --test acceptance`.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{config, plan_task, random_graph, stick, TASKS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repose::graph::{search_path, EdgeKind, ManipulationGraph, NodeSelector};
use repose::mechanics::{gravity_torque, gravity_torque_dtheta, transition_distance_down, transition_distance_up, GraspState};
use repose::motion::{Phase, Violation};
use repose::planner::{cmd_plan, run_plan, RunConfig};
use repose::sampling::{generate_bouquet, Discretization};
use repose::{discretize_surface, object_lowest_point};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Torque written the short way: the two lever terms collapse to `r + EE cos(phi)`.
fn torque_oracle(mass: f64, g: f64, ee: f64, theta: f64, phi: f64, r: f64) -> f64 {
    0.5 * mass * g * theta.sin() * (r + ee * phi.cos())
}

fn gravity_torque_suite() -> Outcome {
    let mut scene = stick();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ee = scene.gripper.ee_length;
    let mut worst = 0.0f64;
    let mut worst_fd = 0.0f64;
    for _ in 0..1000 {
        let theta = rng.gen_range(0.01..std::f64::consts::FRAC_PI_2 - 0.01);
        let phi = rng.gen_range(0.0..std::f64::consts::PI);
        let r = rng.gen_range(0.0..0.6);
        scene.object.mass = rng.gen_range(0.1..5.0);
        let gs = GraspState::new(theta, phi, r).unwrap();
        let t = gravity_torque(&scene, &gs);
        let oracle = torque_oracle(scene.object.mass, scene.gravity, ee, theta, phi, r);
        if oracle.abs() > 1e-9 {
            worst = worst.max(rel_err(t, oracle));
        } else {
            ensure!(t.abs() < 1e-12, "torque {t} where oracle vanishes");
        }

        // monotone in theta on [0, pi/2] for a fixed lever
        let higher = GraspState::new((theta + 0.05).min(std::f64::consts::FRAC_PI_2), phi, r).unwrap();
        let t_hi = gravity_torque(&scene, &higher);
        ensure!(
            if t >= 0.0 { t_hi >= t - 1e-12 } else { t_hi <= t + 1e-12 },
            "|T| not monotone in theta at theta={theta} phi={phi} r={r}"
        );

        // linear in mass
        let mut heavier = scene.clone();
        heavier.object.mass *= 3.0;
        let t3 = gravity_torque(&heavier, &gs);
        ensure!((t3 - 3.0 * t).abs() <= 1e-9 * t.abs().max(1e-9), "mass linearity broken: {t3} vs 3*{t}");

        // central difference
        let h = 1e-6;
        let fd = (gravity_torque(&scene, &GraspState { theta: theta + h, ..gs })
            - gravity_torque(&scene, &GraspState { theta: theta - h, ..gs }))
            / (2.0 * h);
        let d = gravity_torque_dtheta(&scene, &gs);
        if d.abs() > 1e-6 {
            worst_fd = worst_fd.max(rel_err(fd, d));
        }
    }
    ensure!(worst <= 1e-9, "closed-form mismatch, worst relative error {worst:e}");
    ensure!(worst_fd <= 1e-5, "derivative mismatch, worst relative error {worst_fd:e}");
    Ok(format!("1000 states, max rel err {worst:.1e}, derivative {worst_fd:.1e}"))
}

fn transition_distance_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let l = rng.gen_range(0.05..2.0);
        let theta = rng.gen_range(0.0..half_pi);
        let alpha = rng.gen_range(0.0..half_pi - theta);
        let up = transition_distance_up(l, theta, alpha).map_err(|e| e.to_string())?;
        let down = transition_distance_down(l, theta + alpha, alpha).map_err(|e| e.to_string())?;
        worst = worst.max((up - down).abs());
        ensure!(up >= 0.0 && up <= l + 1e-12, "d_up={up} outside [0, l={l}]");
    }
    ensure!(worst <= 1e-12, "round trip off by {worst:e}");

    // stick at 30 deg rising by 45 deg; law of sines on the lifted triangle
    let l = 0.656;
    let (a, b) = (30f64.to_radians(), 75f64.to_radians());
    let oracle = l * 2.0 * ((b - a) / 2.0).sin() * ((a + b) / 2.0).cos();
    let up = transition_distance_up(l, a, 45f64.to_radians()).map_err(|e| e.to_string())?;
    ensure!((up - oracle).abs() < 1e-12, "d_up={up} vs oracle {oracle}");
    ensure!(format!("{up:.4}") == "0.3056", "d_up={up:.4}, expected 0.3056");
    Ok(format!("10^4 round trips within {worst:.1e}; stick (30, 45) = {up:.4} m"))
}

fn bouquet_suite() -> Outcome {
    let s = stick();
    let d = Discretization::default();
    let placements = discretize_surface(&s.surface, d.grid_spacing).map_err(|e| e.to_string())?;
    let mut poses = 0;
    let (mut drift, mut penetration) = (0.0f64, 0.0f64);
    for p in &placements {
        let b = generate_bouquet(&s, p, &d.x_steps, &d.z_steps).map_err(|e| e.to_string())?;
        ensure!(
            b.poses.len() == d.x_steps.len() * d.z_steps.len(),
            "{} poses, expected {}",
            b.poses.len(),
            d.x_steps.len() * d.z_steps.len()
        );
        let pivot = p.world_transform.translation();
        for bp in &b.poses {
            drift = drift.max((bp.pose.translation() - pivot).norm());
            let low = object_lowest_point(&s.object, &bp.pose);
            penetration = penetration.max(s.surface.height() - low.z);
        }
        poses += b.poses.len();
    }
    ensure!(drift <= 1e-6, "pivot drift {drift:e}");
    ensure!(penetration <= 1e-6, "penetration {penetration:e}");
    Ok(format!("{} placements, {poses} poses, pivot drift {drift:.1e}", placements.len()))
}

/// All-pairs optimum from the dense matrix of cheapest unblocked edges.
fn floyd_warshall(g: &ManipulationGraph) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0.0;
        for (v, cell) in row.iter_mut().enumerate() {
            if u != v && !g.is_blocked(u, v) {
                if let Some(e) = g.edge_between(u, v) {
                    *cell = cell.min(e.cost);
                }
            }
        }
    }
    for k in 0..n {
        let dk = d[k].clone();
        for row in d.iter_mut() {
            let via = row[k];
            if via.is_infinite() {
                continue;
            }
            for (cell, &kv) in row.iter_mut().zip(&dk) {
                let c = via + kv;
                if c < *cell {
                    *cell = c;
                }
            }
        }
    }
    d
}

fn search_oracle_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut found, mut none) = (0, 0);
    for i in 0..50 {
        let g = random_graph(&mut rng, 200);
        let d = floyd_warshall(&g);
        let (s, t) = (rng.gen_range(0..g.len()), rng.gen_range(0..g.len()));
        let optimum = d[s][t];
        match search_path(&g, &NodeSelector::Node(s), &NodeSelector::Node(t)) {
            Ok(p) => {
                ensure!(
                    (p.total_cost - optimum).abs() <= 1e-9,
                    "graph {i}: search {} vs optimum {optimum}",
                    p.total_cost
                );
                ensure!(p.is_valid_in(&g), "graph {i}: path uses a missing or blocked edge");
                found += 1;
            }
            Err(e) => {
                ensure!(optimum.is_infinite(), "graph {i}: {e} but optimum is {optimum}");
                none += 1;
            }
        }
    }
    Ok(format!("50 graphs: {found} optimal paths, {none} agreed unreachable"))
}

fn contact_violations(v: &[Violation]) -> usize {
    v.iter().filter(|v| matches!(v, Violation::ContactLost { .. })).count()
}

fn task1() -> Outcome {
    let o = plan_task("task1_transition.toml");
    ensure!(o.path.nodes.len() == 3, "{} critical poses", o.path.nodes.len());
    ensure!(o.path.count(EdgeKind::GraspTransition) == 1, "edges {:?}", o.path.edge_kinds());
    ensure!(o.report.passed(), "verification failed: {:?}", o.report.violations);
    Ok(format!(
        "edges {:?}, {} waypoints, {} contact violations",
        o.path.edge_kinds(),
        o.trajectory.total_waypoints(),
        contact_violations(&o.report.violations)
    ))
}

fn task2() -> Outcome {
    let o = plan_task("task2_blocked.toml");
    ensure!(o.path.nodes.len() == 4, "{} critical poses", o.path.nodes.len());
    ensure!(o.path.count(EdgeKind::GraspTransition) == 2, "edges {:?}", o.path.edge_kinds());
    let z: Vec<f64> = o
        .path
        .nodes
        .iter()
        .map(|&n| o.graph.node(n).candidate.gripper_world.translation().z)
        .collect();
    ensure!(z[1] > z[0] && z[2] < z[1] && z[3] > z[2], "gripper heights {z:?}");
    ensure!(o.report.passed(), "verification failed: {:?}", o.report.violations);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let open = run_plan(&RunConfig {
        unblock: true,
        ..config("task2_blocked.toml", dir.path())
    })
    .map_err(|e| e.to_string())?;
    let (blocked_n, open_n) = (o.path.count(EdgeKind::GraspTransition), open.path.count(EdgeKind::GraspTransition));
    ensure!(open.path.total_cost <= o.path.total_cost, "unblocked costs more");
    ensure!(open_n < blocked_n, "unblocked uses {open_n} transitions");
    Ok(format!(
        "blocked cost {} up-down-up; unblocked cost {} with {open_n} transition",
        o.path.total_cost, open.path.total_cost
    ))
}

fn task3() -> Outcome {
    let o = plan_task("task3_regrasp.toml");
    let kinds = o.path.edge_kinds();
    let r = kinds
        .iter()
        .position(|k| *k == EdgeKind::Regrasp)
        .ok_or(format!("no regrasp in {kinds:?}"))?;
    ensure!(r >= 1 && kinds[..r].iter().all(|k| *k == EdgeKind::Translation), "before regrasp: {kinds:?}");
    ensure!(o.path.count(EdgeKind::Regrasp) == 1, "regrasps in {kinds:?}");
    let after = &o.path.nodes[r + 1..];
    ensure!(after.len() >= 2, "nothing after the regrasp: {kinds:?}");
    ensure!(
        after.iter().all(|&n| o.graph.node(n).families().contains(&repose::graph::Family::Drooping)),
        "post-regrasp nodes leave the drooping side"
    );
    let transit: Vec<_> = o.trajectory.waypoints().filter(|(_, w)| w.phase == Phase::Transit).collect();
    ensure!(!transit.is_empty(), "no transit waypoints");
    ensure!(transit.iter().all(|(_, w)| w.f_grip == 0.0), "gripper loaded during transit");
    Ok(format!("edges {kinds:?}, {} transit waypoints at zero load", transit.len()))
}

fn task4() -> Outcome {
    let o = plan_task("task4_duckboard.toml");
    let via = o
        .path
        .nodes
        .iter()
        .filter(|&&n| o.graph.node(n).kind == repose::sampling::NodeKind::Connecting)
        .count();
    ensure!(via > 0, "path avoids connecting nodes");
    ensure!(o.path.count(EdgeKind::Regrasp) == 0, "edges {:?}", o.path.edge_kinds());
    ensure!(o.report.passed(), "verification failed: {:?}", o.report.violations);
    Ok(format!("edges {:?}, {via} connecting node(s), no regrasp", o.path.edge_kinds()))
}

fn contact_invariant() -> Outcome {
    let (mut total, mut max_gap, mut min_gap) = (0, f64::NEG_INFINITY, f64::INFINITY);
    for t in TASKS {
        let o = plan_task(t);
        for (_, w) in o.trajectory.waypoints() {
            max_gap = max_gap.max(w.contact_gap);
            min_gap = min_gap.min(w.contact_gap);
            total += 1;
        }
    }
    ensure!(total >= 500, "only {total} waypoints");
    ensure!(max_gap <= 1e-3 && min_gap >= -1e-6, "gap range [{min_gap:e}, {max_gap:e}]");
    Ok(format!("{total} waypoints, gap in [{min_gap:.1e}, {max_gap:.1e}] m"))
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let mut files = 0;
    for t in TASKS {
        let runs: Vec<_> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
        for dir in &runs {
            let c = RunConfig {
                frames: true,
                json: true,
                cache: Some(dir.path().join("graph.json")),
                ..config(t, &dir.path().join("out"))
            };
            cmd_plan(&c).map_err(|e| format!("{t}: {e}"))?;
        }
        let (a, b) = (read_tree(runs[0].path()), read_tree(runs[1].path()));
        ensure!(a.keys().eq(b.keys()), "{t}: different file sets");
        for (name, bytes) in &a {
            ensure!(b[name] == *bytes, "{t}: {} differs", name.display());
        }
        files += a.len();
    }
    Ok(format!("4 fixtures planned twice, {files} files identical"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, name: "gravity torque", limit: secs(1), run: gravity_torque_suite },
        Criterion { id: 2, name: "transition distances", limit: secs(1), run: transition_distance_suite },
        Criterion { id: 3, name: "bouquet", limit: secs(5), run: bouquet_suite },
        Criterion { id: 4, name: "search vs optimum", limit: secs(30), run: search_oracle_suite },
        Criterion { id: 5, name: "task 1 single transition", limit: None, run: task1 },
        Criterion { id: 6, name: "task 2 blocked detour", limit: None, run: task2 },
        Criterion { id: 7, name: "task 3 slide, regrasp, droop", limit: None, run: task3 },
        Criterion { id: 8, name: "task 4 duck board", limit: None, run: task4 },
        Criterion { id: 9, name: "contact invariant", limit: None, run: contact_invariant },
        Criterion { id: 10, name: "determinism", limit: None, run: determinism },
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (r, _) => r,
        };
        let ms = elapsed.as_secs_f64() * 1e3;
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {} ({ms:.0} ms): {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {} ({ms:.0} ms): {why}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
