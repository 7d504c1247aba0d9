//! Train a small model briefly, checkpoint it, reload it and turn one
//! prediction into a report and a go/no-go verdict.
//!
//! `cargo run --release --example predict_and_assess [dir]`

use std::path::PathBuf;

use defonet::assess::{assess_report, DeflectionMode, NetworkPredictor, PredictionReport, DEFAULT_CLEARANCE};
use defonet::model::{Checkpoint, DiscriminatorSpec, GeneratorSpec};
use defonet::physics::{generate_dataset, DatasetConfig};
use defonet::train::{TrainConfig, Trainer};

fn main() -> defonet::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let data = generate_dataset(&DatasetConfig::beam(16, 0.09, vec![0.8, 1.0, 1.2]), 0)?;

    let gen_spec = GeneratorSpec::default_for(16)?;
    let critic_spec = DiscriminatorSpec::default_for(16)?;
    let config = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(gen_spec.clone(), critic_spec.clone(), config)?;
    trainer.run(&data.dataset)?;
    let ckpt = dir.join("bridges16.ckpt");
    trainer.state.save(&ckpt)?;

    let state = Checkpoint::load_expecting(&ckpt, &gen_spec, &critic_spec)?;
    let predictor = NetworkPredictor {
        generator: &state.generator,
        threshold: 0.5,
    };
    let sample = &data.dataset.samples[data.dataset.len() - 1];
    let (grid, ms) = predictor.predict_timed(sample)?;
    let report = PredictionReport::from_grids(
        "network",
        DeflectionMode::Sag,
        sample.condition,
        0.5,
        &sample.input,
        grid,
        ms,
    )?;
    report.save(dir.join("bridge_report.jsonl"))?;
    println!(
        "predicted sag {} voxels ({:.1} cm) in {ms:.1} ms, oracle {:.1} cm",
        report.max_deflection_voxels,
        report.max_deflection_cm,
        data.meta[data.dataset.len() - 1].peak_displacement * 100.0
    );
    let verdict = assess_report(&report, DEFAULT_CLEARANCE)?;
    println!("{}: {}", if verdict.safe { "cross" } else { "do not cross" }, verdict.rationale);
    Ok(())
}
