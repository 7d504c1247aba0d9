//! Overfit a small generator on a 32-sample beam dataset at N=16 and watch
//! the mean training IoU.
//!
//! `cargo run --release --example train_smoke [steps]`

use defonet::assess::{NetworkPredictor, Predictor};
use defonet::model::{DiscriminatorSpec, GeneratorSpec};
use defonet::physics::{generate_dataset, Dataset, DatasetConfig};
use defonet::train::{TrainConfig, Trainer};
use defonet::voxel::grid_metrics;

fn mean_iou(trainer: &Trainer, data: &Dataset) -> defonet::Result<f64> {
    let predictor = NetworkPredictor {
        generator: &trainer.state.generator,
        threshold: 0.5,
    };
    let mut sum = 0.0;
    for s in &data.samples {
        sum += grid_metrics(&predictor.predict(s)?, &s.target)?.iou;
    }
    Ok(sum / data.len() as f64)
}

fn main() -> defonet::Result<()> {
    let steps: u64 = std::env::args().nth(1).map_or(300, |s| s.parse().expect("steps"));
    let mut cfg = DatasetConfig::beam(16, 0.09, vec![0.8, 0.95, 1.1, 1.25]);
    cfg.location_bins = vec![2, 4];
    let data = generate_dataset(&cfg, 0)?.dataset;
    println!("{} samples, N={}", data.len(), data.grid.resolution);

    let config = TrainConfig {
        beta: 0.8,
        epochs: steps.div_ceil(4),
        max_steps: Some(steps),
        ..TrainConfig::default()
    };
    let mut trainer = Trainer::new(
        GeneratorSpec::default_for(16)?,
        DiscriminatorSpec::default_for(16)?,
        config,
    )?;
    let started = std::time::Instant::now();
    let mut next = 0;
    while trainer.state.step < steps {
        next = (next + 50).min(steps);
        trainer.run_until(&data, next)?;
        let last = trainer.log.records.last().expect("at least one step");
        println!(
            "step {:4}  l_ae {:.4}  l_gan_d {:+.3}  iou {:.3}  ({:.0} s)",
            next,
            last.l_ae,
            last.l_gan_d,
            mean_iou(&trainer, &data)?,
            started.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
