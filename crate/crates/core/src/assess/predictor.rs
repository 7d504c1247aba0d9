use std::time::Instant;

use crate::error::Result;
use crate::model::{condition_tensor, grid_tensor, Generator};
use crate::physics::Sample;
use crate::voxel::VoxelGrid;

/// Anything that maps a sample's input view and condition to a deformed grid.
pub trait Predictor {
    fn name(&self) -> &str;
    fn predict(&self, sample: &Sample) -> Result<VoxelGrid>;
}

/// Thresholded generator output.
pub struct NetworkPredictor<'a> {
    pub generator: &'a Generator,
    pub threshold: f32,
}

impl NetworkPredictor<'_> {
    /// Prediction plus inference wall time in milliseconds.
    pub fn predict_timed(&self, sample: &Sample) -> Result<(VoxelGrid, f64)> {
        let started = Instant::now();
        let x = grid_tensor([&sample.input])?;
        let c = condition_tensor(&[sample.condition])?;
        let probs = self.generator.predict(&x, &c)?;
        let grid = VoxelGrid::from_probabilities(*sample.input.spec(), probs.data(), self.threshold)?;
        Ok((grid, started.elapsed().as_secs_f64() * 1e3))
    }
}

impl Predictor for NetworkPredictor<'_> {
    fn name(&self) -> &str {
        "network"
    }

    fn predict(&self, sample: &Sample) -> Result<VoxelGrid> {
        Ok(self.predict_timed(sample)?.0)
    }
}

/// Returns the oracle target unchanged; a perfect reference predictor.
pub struct OraclePredictor;

impl Predictor for OraclePredictor {
    fn name(&self) -> &str {
        "oracle"
    }

    fn predict(&self, sample: &Sample) -> Result<VoxelGrid> {
        Ok(sample.target.clone())
    }
}
