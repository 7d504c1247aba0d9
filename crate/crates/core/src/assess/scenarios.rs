//! The three field scenarios: bridge safety, per-wheel foam settlement and
//! span generalization.

use serde::{Deserialize, Serialize};

use super::predictor::Predictor;
use super::report::{assess, DeflectionMode, PredictionReport, SafetyVerdict};
use crate::error::Result;
use crate::physics::{generate_dataset, DatasetConfig, MaterialKind, WheelKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyRow {
    pub material: MaterialKind,
    pub payload: bool,
    pub force: f64,
    /// Continuous oracle peak deflection, m.
    pub oracle_deflection_m: f64,
    /// Peak deflection read off the predicted grid, voxels.
    pub predicted_voxels: i64,
    pub verdict: SafetyVerdict,
}

/// Bridge crossing at `span` for every (material, payload) pair of `base`.
///
/// The verdict uses the continuous peak when the predictor is the oracle;
/// otherwise it uses the voxel-quantized peak of the prediction.
pub fn safety_table(predictor: &dyn Predictor, base: &DatasetConfig, clearance: f64) -> Result<Vec<SafetyRow>> {
    let generated = generate_dataset(base, 0)?;
    let mut rows = Vec::new();
    for (sample, meta) in generated.dataset.samples.iter().zip(&generated.meta) {
        let pred = predictor.predict(sample)?;
        let mut report = PredictionReport::from_grids(
            predictor.name(),
            DeflectionMode::Sag,
            sample.condition,
            0.5,
            &sample.input,
            pred,
            0.0,
        )?;
        if predictor.name() == "oracle" {
            report = report.with_continuous_peak(meta.peak_displacement);
        }
        rows.push(SafetyRow {
            material: meta.material,
            payload: sample.condition.force_bin == 1,
            force: meta.force,
            oracle_deflection_m: meta.peak_displacement,
            predicted_voxels: report.max_deflection_voxels,
            verdict: assess(report.max_deflection_m, clearance)?,
        });
    }
    Ok(rows)
}

/// The four-case bridge configuration: one span, wood and aluminium, robot
/// alone and with payload, load at midspan.
pub fn bridge_config(span: f64) -> DatasetConfig {
    DatasetConfig::beam(64, crate::voxel::DEFAULT_PITCH, vec![span])
}

/// Where each wheel sits on the robot.
pub const WHEEL_LAYOUT: [(&str, WheelKind); 4] = [
    ("left side", WheelKind::Side),
    ("right side", WheelKind::Side),
    ("front castor", WheelKind::Castor),
    ("rear castor", WheelKind::Castor),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WheelAssessment {
    pub position: String,
    pub wheel: WheelKind,
    pub payload: bool,
    pub predicted_settlement_m: f64,
    pub oracle_settlement_m: f64,
    pub verdict: SafetyVerdict,
}

/// One independent contact-patch prediction per wheel on foam.
pub fn foam_wheels(
    predictor: &dyn Predictor,
    base: &DatasetConfig,
    payload: bool,
    clearance: f64,
) -> Result<Vec<WheelAssessment>> {
    let mut out = Vec::new();
    for (position, wheel) in WHEEL_LAYOUT {
        let cfg = DatasetConfig {
            wheels: vec![wheel],
            force_bins: vec![payload as usize],
            location_bins: vec![base.location_bins.first().copied().unwrap_or(3)],
            count: 0,
            ..base.clone()
        };
        let g = generate_dataset(&cfg, 0)?;
        let (sample, meta) = (&g.dataset.samples[0], &g.meta[0]);
        let pred = predictor.predict(sample)?;
        let settled = DeflectionMode::Settlement.max_voxels(&sample.input, &pred).unwrap_or(0) as f64
            * g.dataset.grid.pitch;
        let predicted = if predictor.name() == "oracle" {
            meta.peak_displacement
        } else {
            settled
        };
        out.push(WheelAssessment {
            position: position.to_string(),
            wheel,
            payload,
            predicted_settlement_m: predicted,
            oracle_settlement_m: meta.peak_displacement,
            verdict: assess(predicted, clearance)?,
        });
    }
    Ok(out)
}

/// The foam ground used for wheel assessment.
pub fn foam_config() -> DatasetConfig {
    let mut cfg = DatasetConfig::foam(32, 0.011);
    cfg.deck_layer = 20;
    cfg.foam_thickness = 0.088;
    cfg
}
