use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use defonet::assess::{
    cmd_assess, cmd_evaluate, cmd_generate, cmd_predict, cmd_train, EvalMode, EvaluateArgs, PredictArgs,
    PredictInput, TrainArgs, DEFAULT_CLEARANCE, DEFAULT_THRESHOLD,
};
use defonet::physics::{MaterialKind, WheelKind};
use defonet::train::TrainConfig;

#[derive(Parser)]
#[command(name = "defonet", version, about = "Predict and assess deformation of loaded terrain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a key=value config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the grid resolution of the config.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Train the generator and critic on a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        epochs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        batch_size: usize,
        #[arg(long, default_value_t = 1)]
        critic_steps: usize,
        #[arg(long, default_value_t = 10.0)]
        gp_lambda: f64,
        #[arg(long)]
        max_steps: Option<u64>,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Predict the deformed grid for one view and condition.
    Predict {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, conflicts_with = "scene", required_unless_present = "scene")]
        depth: Option<PathBuf>,
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        force: usize,
        #[arg(long)]
        loc: usize,
        #[arg(long)]
        material: MaterialKind,
        /// Contact type when the material is foam.
        #[arg(long, default_value = "side")]
        wheel: WheelKind,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a prediction report into a safety verdict.
    Assess {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLEARANCE)]
        clearance: f64,
    },
    /// Evaluate a checkpoint (or `oracle`) on a dataset.
    Evaluate {
        #[arg(long)]
        ckpt: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        mode: EvalMode,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f32,
        #[arg(long, default_value_t = DEFAULT_CLEARANCE)]
        clearance: f64,
    },
}

fn run(cli: Cli) -> defonet::Result<()> {
    match cli.command {
        Command::Generate { config, out, seed, grid } => {
            let s = cmd_generate(&config, &out, seed, grid)?;
            println!("{}", serde_json::to_string(&s)?);
        }
        Command::Train {
            data,
            grid,
            alpha,
            beta,
            epochs,
            seed,
            out,
            batch_size,
            critic_steps,
            gp_lambda,
            max_steps,
            resume,
        } => {
            let config = TrainConfig {
                alpha,
                beta,
                epochs,
                seed,
                batch_size,
                critic_steps,
                gp_lambda,
                max_steps,
                ..TrainConfig::default()
            };
            let s = cmd_train(&TrainArgs {
                data,
                grid,
                config,
                out,
                resume,
            })?;
            println!("{}", serde_json::to_string(&s)?);
        }
        Command::Predict {
            ckpt,
            depth,
            scene,
            force,
            loc,
            material,
            wheel,
            threshold,
            out,
        } => {
            let input = match (depth, scene) {
                (Some(d), _) => PredictInput::Depth(d),
                (None, Some(s)) => PredictInput::Scene(s),
                (None, None) => unreachable!("clap requires one input"),
            };
            let r = cmd_predict(&PredictArgs {
                ckpt,
                input,
                force_bin: force,
                location_bin: loc,
                material,
                wheel,
                threshold,
                out,
            })?;
            println!(
                "max deflection {} voxels ({:.2} cm), inference {:.0} ms",
                r.max_deflection_voxels, r.max_deflection_cm, r.wall_ms
            );
        }
        Command::Assess { report, clearance } => {
            let v = cmd_assess(&report, clearance)?;
            println!("{}", serde_json::to_string(&v)?);
        }
        Command::Evaluate {
            ckpt,
            data,
            mode,
            out_dir,
            threshold,
            clearance,
        } => {
            let r = cmd_evaluate(&EvaluateArgs {
                ckpt,
                data,
                mode,
                out_dir,
                threshold,
                clearance,
            })?;
            for row in &r.rows {
                println!("{}", serde_json::to_string(row)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
