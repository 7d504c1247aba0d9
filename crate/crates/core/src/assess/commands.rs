//! The operations behind each command-line subcommand.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::evaluate::{evaluate, EvalMode, EvalReport};
use super::plot::slice_png;
use super::predictor::{NetworkPredictor, OraclePredictor, Predictor};
use super::report::{assess_report, DeflectionMode, PredictionReport, SafetyVerdict};
use crate::condition::Condition;
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::model::{Checkpoint, DiscriminatorSpec, GeneratorSpec};
use crate::physics::{
    generate_dataset, meta_path, read_meta, write_meta, Dataset, DatasetConfig, MaterialKind, Sample,
    WheelKind,
};
use crate::train::{TrainConfig, Trainer};
use crate::voxel::{depth_to_grid, render_depth, voxelize, write_grid, DepthImage, GridSpec, VoxelGrid};

/// Appends `suffix` to the full file name (`a/b.ckpt` → `a/b.ckpt.log.jsonl`).
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct GenerateSummary {
    pub samples: usize,
    pub resolution: usize,
    pub dataset: PathBuf,
    pub meta: PathBuf,
}

pub fn cmd_generate(config: &Path, out: &Path, seed: u64, grid: Option<usize>) -> Result<GenerateSummary> {
    let mut kv = KeyValues::load(config)?;
    if let Some(n) = grid {
        kv.insert("grid", n);
    }
    let cfg = DatasetConfig::from_key_values(&kv)?;
    let g = generate_dataset(&cfg, seed)?;
    g.dataset.save(out)?;
    let meta = meta_path(out);
    write_meta(&meta, &g.meta)?;
    Ok(GenerateSummary {
        samples: g.dataset.len(),
        resolution: g.dataset.grid.resolution,
        dataset: out.to_path_buf(),
        meta,
    })
}

#[derive(Clone, Debug)]
pub struct TrainArgs {
    pub data: PathBuf,
    pub grid: usize,
    pub config: TrainConfig,
    pub out: PathBuf,
    pub resume: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainSummary {
    pub steps: u64,
    pub epoch: u64,
    pub final_l_ae: Option<f64>,
    pub final_l_total: Option<f64>,
    pub checkpoint: PathBuf,
    pub log: PathBuf,
}

/// Trains and writes the checkpoint plus `<out>.log.jsonl`. If training
/// aborts, the last good state is still written before the error returns.
pub fn cmd_train(args: &TrainArgs) -> Result<TrainSummary> {
    let data = Dataset::load(&args.data)?;
    if data.grid.resolution != args.grid {
        return Err(Error::ResolutionMismatch {
            left: format!("--grid {}", args.grid),
            right: format!("dataset N={}", data.grid.resolution),
        });
    }
    let mut trainer = match &args.resume {
        Some(path) => Trainer::resume(
            Checkpoint::load_expecting(
                path,
                &GeneratorSpec::default_for(args.grid)?,
                &DiscriminatorSpec::default_for(args.grid)?,
            )?,
            args.config.clone(),
        )?,
        None => Trainer::new(
            GeneratorSpec::default_for(args.grid)?,
            DiscriminatorSpec::default_for(args.grid)?,
            args.config.clone(),
        )?,
    };
    let outcome = trainer.run(&data);
    let log = sidecar(&args.out, ".log.jsonl");
    trainer.state.save(&args.out)?;
    trainer.log.save(&log)?;
    outcome?;
    let last = trainer.log.records.last();
    Ok(TrainSummary {
        steps: trainer.state.step,
        epoch: trainer.state.epoch,
        final_l_ae: last.map(|r| r.l_ae),
        final_l_total: last.map(|r| r.l_total),
        checkpoint: args.out.clone(),
        log,
    })
}

#[derive(Clone, Debug)]
pub enum PredictInput {
    /// Depth image file.
    Depth(PathBuf),
    /// Scene description in the dataset key=value format; the first span is used.
    Scene(PathBuf),
}

#[derive(Clone, Debug)]
pub struct PredictArgs {
    pub ckpt: PathBuf,
    pub input: PredictInput,
    pub force_bin: usize,
    pub location_bin: usize,
    pub material: MaterialKind,
    /// Contact type when predicting on foam.
    pub wheel: WheelKind,
    pub threshold: f32,
    pub out: PathBuf,
}

/// Shell seen by the depth camera, lifted into the model's grid.
pub fn input_grid(input: &PredictInput, resolution: usize) -> Result<VoxelGrid> {
    let grid = match input {
        PredictInput::Depth(path) => {
            let img = DepthImage::read_from(BufReader::new(File::open(path)?))?;
            let spec = GridSpec::new(resolution, img.camera.extent / resolution as f64, img.camera.origin)?;
            depth_to_grid(&img, &spec)?
        }
        PredictInput::Scene(path) => {
            let cfg = DatasetConfig::from_key_values(&KeyValues::load(path)?)?;
            let spec = cfg.grid_spec()?;
            let (scene, _, _) = cfg
                .enumerate()?
                .into_iter()
                .next()
                .ok_or_else(|| Error::Config("scene file describes no scene".into()))?;
            let rest = voxelize(&scene.surface(&spec, None)?, &spec)?;
            depth_to_grid(&render_depth(&rest, cfg.view), &spec)?
        }
    };
    if grid.resolution() != resolution {
        return Err(Error::ResolutionMismatch {
            left: format!("input N={}", grid.resolution()),
            right: format!("checkpoint N={resolution}"),
        });
    }
    Ok(grid)
}

/// Material segment and read-out mode for a `--material` flag.
pub fn material_condition(material: MaterialKind, wheel: WheelKind) -> (usize, DeflectionMode) {
    match material {
        MaterialKind::Wood => (0, DeflectionMode::Sag),
        MaterialKind::Aluminium => (1, DeflectionMode::Sag),
        MaterialKind::Foam => (wheel.bin(), DeflectionMode::Settlement),
    }
}

/// Writes the report to `out`, the binarized grid to `<out>.voxg`, a
/// cross-section to `<out>.png` and the inference time to `<out>.timing.json`.
pub fn cmd_predict(args: &PredictArgs) -> Result<PredictionReport> {
    if !(args.threshold > 0.0 && args.threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {} must lie in (0, 1)",
            args.threshold
        )));
    }
    let (material_bin, mode) = material_condition(args.material, args.wheel);
    let condition = Condition::new(args.force_bin, args.location_bin, material_bin)?;
    let ckpt = Checkpoint::load(&args.ckpt)?;
    let input = input_grid(&args.input, ckpt.generator.spec().resolution)?;
    let sample = Sample {
        target: input.clone(),
        input,
        condition,
    };
    let predictor = NetworkPredictor {
        generator: &ckpt.generator,
        threshold: args.threshold,
    };
    let (pred, wall_ms) = predictor.predict_timed(&sample)?;
    let report = PredictionReport::from_grids(
        predictor.name(),
        mode,
        condition,
        args.threshold,
        &sample.input,
        pred,
        wall_ms,
    )?;
    report.save(&args.out)?;
    let grid = report.predicted_grid.as_ref().expect("fresh report carries its grid");
    write_grid(grid, BufWriter::new(File::create(sidecar(&args.out, ".voxg"))?))?;
    slice_png(grid, &sample.input, grid.resolution() / 2, 4, sidecar(&args.out, ".png"))?;
    let mut t = File::create(sidecar(&args.out, ".timing.json"))?;
    writeln!(t, "{}", serde_json::json!({ "wall_ms": wall_ms }))?;
    Ok(report)
}

pub fn cmd_assess(report: &Path, clearance: f64) -> Result<SafetyVerdict> {
    assess_report(&PredictionReport::load(report)?, clearance)
}

#[derive(Clone, Debug)]
pub struct EvaluateArgs {
    /// Checkpoint path, or the literal `oracle` for the passthrough predictor.
    pub ckpt: String,
    pub data: PathBuf,
    pub mode: EvalMode,
    pub out_dir: PathBuf,
    pub threshold: f32,
    pub clearance: f64,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvalReport> {
    let data = Dataset::load(&args.data)?;
    let meta_file = meta_path(&args.data);
    let meta = if meta_file.exists() {
        Some(read_meta(&meta_file)?)
    } else {
        None
    };
    let report = if args.ckpt == "oracle" {
        evaluate(&OraclePredictor, &data, meta.as_deref(), args.mode, args.clearance)?
    } else {
        let ckpt = Checkpoint::load(&args.ckpt)?;
        let n = ckpt.generator.spec().resolution;
        if n != data.grid.resolution {
            return Err(Error::ResolutionMismatch {
                left: format!("checkpoint N={n}"),
                right: format!("dataset N={}", data.grid.resolution),
            });
        }
        let predictor = NetworkPredictor {
            generator: &ckpt.generator,
            threshold: args.threshold,
        };
        evaluate(&predictor, &data, meta.as_deref(), args.mode, args.clearance)?
    };
    report.write(&args.out_dir, args.clearance)?;
    Ok(report)
}

