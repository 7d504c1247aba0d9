//! Train at N=16 on seven bridge spans and predict the sag of two spans the
//! network has never seen.
//!
//! `cargo run --release --example span_generalization [steps] [out_dir]`

use defonet::assess::{evaluate, EvalMode, NetworkPredictor};
use defonet::model::{DiscriminatorSpec, GeneratorSpec};
use defonet::physics::{generate_dataset, DatasetConfig, MaterialKind, Split};
use defonet::train::{train, TrainConfig};

fn main() -> defonet::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(600, |s| s.parse().expect("steps"));
    let out_dir = args.next().unwrap_or_else(|| "generalization".into());

    let mut cfg = DatasetConfig::beam(16, 0.09, vec![0.8, 0.85, 0.9, 0.95, 1.0, 1.1, 1.2, 1.25, 1.3]);
    cfg.holdout_spans = vec![0.9, 1.2];
    let seen = generate_dataset(&cfg, 0)?;
    cfg.split = Split::Holdout;
    cfg.materials = vec![MaterialKind::Wood];
    let unseen = generate_dataset(&cfg, 0)?;

    let config = TrainConfig {
        epochs: steps.div_ceil(4),
        max_steps: Some(steps),
        ..TrainConfig::default()
    };
    let (state, log) = train(
        &seen.dataset,
        GeneratorSpec::default_for(16)?,
        DiscriminatorSpec::default_for(16)?,
        config,
    )?;
    let last = log.records.last().expect("trained at least one step");
    println!("{} steps on {} samples, final l_ae {:.4}", state.step, seen.dataset.len(), last.l_ae);

    let predictor = NetworkPredictor {
        generator: &state.generator,
        threshold: 0.5,
    };
    let report = evaluate(&predictor, &unseen.dataset, Some(&unseen.meta), EvalMode::Holdout, 0.015)?;
    for r in report.holdout_rows() {
        println!(
            "span {:.2} m force bin {}: predicted {:?} voxels, oracle {:?}, error {:?}",
            r.span, r.force_bin, r.predicted_max_voxels, r.target_max_voxels, r.error_voxels
        );
    }
    let (jsonl, png) = report.write(&out_dir, 0.015)?;
    println!("wrote {} and {}", jsonl.display(), png.display());
    Ok(())
}
