use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use repose::planner::{cmd_build_graph, cmd_inspect, cmd_plan, CostOverrides, DiscretizationOverrides, Query, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "repose", version, about = "Regrasp and constrained-drooping planner for long, heavy objects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a task and write plan, trajectory, verification report and frames.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Also write plan.json.
        #[arg(long)]
        json: bool,
        /// Write one SVG side view per critical pose into <out>/frames.
        #[arg(long)]
        frames: bool,
    },
    /// Build the manipulation graph and write its cache.
    BuildGraph {
        #[command(flatten)]
        common: Common,
    },
    /// Report on a cached graph: summary, kind:<k>, grasp:<id>, node:<i> or edge:<a>-<b>.
    Inspect {
        #[command(flatten)]
        common: Common,
        #[arg(default_value = "summary")]
        query: String,
    },
}

#[derive(Args)]
struct Common {
    /// Task file (scene, grasps, start, goal, discretization, costs, motion, blocked pairs).
    #[arg(long)]
    task: Option<PathBuf>,
    /// Scene file; overrides the task's.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Grasp-set file; overrides the task's.
    #[arg(long)]
    grasps: Option<PathBuf>,
    /// Graph cache file.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    grid_spacing: Option<f64>,
    /// Tilt steps in degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    x_steps: Option<Vec<f64>>,
    /// Yaw steps in degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    z_steps: Option<Vec<f64>>,
    /// Stable-placement yaws in degrees, comma separated; give the flag no value for none.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    stable_yaws: Option<Vec<f64>>,
    #[arg(long)]
    cost_translation: Option<f64>,
    #[arg(long)]
    cost_transition: Option<f64>,
    #[arg(long)]
    cost_regrasp: Option<f64>,
    /// File of [[blocked]] pairs replacing the task's.
    #[arg(long, conflicts_with = "unblock")]
    blocked: Option<PathBuf>,
    /// Ignore all blocked pairs.
    #[arg(long)]
    unblock: bool,
}

impl Common {
    fn config(self) -> RunConfig {
        RunConfig {
            task: self.task,
            scene: self.scene,
            grasps: self.grasps,
            cache: self.cache,
            discretization: DiscretizationOverrides {
                grid_spacing: self.grid_spacing,
                x_steps_deg: self.x_steps,
                z_steps_deg: self.z_steps,
                stable_yaws_deg: self.stable_yaws,
            },
            costs: CostOverrides {
                translation: self.cost_translation,
                grasp_transition: self.cost_transition,
                regrasp: self.cost_regrasp,
            },
            blocked: self.blocked,
            unblock: self.unblock,
            out_dir: self.out,
            frames: false,
            json: false,
        }
    }
}

fn run(cli: Cli) -> Result<String, RunError> {
    match cli.command {
        Command::Plan { common, json, frames } => cmd_plan(&RunConfig {
            json,
            frames,
            ..common.config()
        }),
        Command::BuildGraph { common } => cmd_build_graph(&common.config()),
        Command::Inspect { common, query } => {
            let q: Query = query.parse()?;
            cmd_inspect(&common.config(), &q)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = e.to_string();
            eprintln!("error kind={} code={}: {message}", e.kind(), e.exit_code());
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let text = s.to_string();
                if !message.contains(&text) {
                    eprintln!("  caused by: {text}");
                }
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
