use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::voxel::{deflection_profile, settlement_map, VoxelGrid};

/// Default robot ground clearance, m.
pub const DEFAULT_CLEARANCE: f64 = 0.015;
/// Default probability cut for occupancy.
pub const DEFAULT_THRESHOLD: f32 = 0.5;

/// How displacement is read off a predicted grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeflectionMode {
    /// Drop of the underside, per x-slice (bridges).
    Sag,
    /// Drop of the top surface, per column (deformable ground).
    Settlement,
}

impl DeflectionMode {
    /// Per-probe displacement in voxels; probes empty in either grid are skipped.
    pub fn probes(self, reference: &VoxelGrid, deformed: &VoxelGrid) -> Vec<ProbeDeflection> {
        let n = reference.resolution();
        let cm = reference.pitch() * 100.0;
        let probe = |x, y, d: i64| ProbeDeflection {
            x,
            y,
            deflection_voxels: d,
            deflection_cm: d as f64 * cm,
        };
        match self {
            DeflectionMode::Sag => deflection_profile(reference, deformed)
                .into_iter()
                .enumerate()
                .filter_map(|(x, d)| d.map(|d| probe(x, None, d)))
                .collect(),
            DeflectionMode::Settlement => settlement_map(reference, deformed)
                .into_iter()
                .enumerate()
                .filter_map(|(i, d)| d.map(|d| probe(i % n, Some(i / n), d)))
                .collect(),
        }
    }

    /// Largest displacement in voxels, floored at zero; `None` if no probe survives.
    pub fn max_voxels(self, reference: &VoxelGrid, deformed: &VoxelGrid) -> Option<i64> {
        self.probes(reference, deformed)
            .iter()
            .map(|p| p.deflection_voxels)
            .max()
            .map(|m| m.max(0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeDeflection {
    /// x-slice (sag) or column x index (settlement).
    pub x: usize,
    /// Column y index, settlement only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y: Option<usize>,
    pub deflection_voxels: i64,
    pub deflection_cm: f64,
}

/// Outcome of one prediction. The grid itself is stored beside the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub source: String,
    pub mode: DeflectionMode,
    pub condition: Condition,
    pub threshold: f32,
    pub resolution: usize,
    pub pitch: f64,
    pub occupied_voxels: usize,
    pub max_deflection_voxels: i64,
    pub max_deflection_cm: f64,
    /// Peak displacement used for the safety verdict, m. Equals the voxel
    /// value unless the source supplies a continuous one.
    pub max_deflection_m: f64,
    pub probes: Vec<ProbeDeflection>,
    /// Inference time; kept out of the report file so it stays reproducible.
    #[serde(skip)]
    pub wall_ms: f64,
    #[serde(skip)]
    pub predicted_grid: Option<VoxelGrid>,
}

impl PredictionReport {
    pub fn from_grids(
        source: &str,
        mode: DeflectionMode,
        condition: Condition,
        threshold: f32,
        reference: &VoxelGrid,
        predicted: VoxelGrid,
        wall_ms: f64,
    ) -> Result<Self> {
        reference.spec().ensure_compatible(predicted.spec())?;
        let probes = mode.probes(reference, &predicted);
        let max_vox = probes.iter().map(|p| p.deflection_voxels).max().unwrap_or(0).max(0);
        let pitch = reference.pitch();
        Ok(PredictionReport {
            source: source.to_string(),
            mode,
            condition,
            threshold,
            resolution: reference.resolution(),
            pitch,
            occupied_voxels: predicted.count(),
            max_deflection_voxels: max_vox,
            max_deflection_cm: max_vox as f64 * pitch * 100.0,
            max_deflection_m: max_vox as f64 * pitch,
            probes,
            wall_ms,
            predicted_grid: Some(predicted),
        })
    }

    /// Replace the verdict quantity by a continuous value (oracle sources).
    pub fn with_continuous_peak(mut self, meters: f64) -> Self {
        self.max_deflection_m = meters;
        self
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let line = BufReader::new(File::open(path)?)
            .lines()
            .next()
            .transpose()?
            .ok_or_else(|| Error::corrupt("report", format!("{} is empty", path.display())))?;
        Ok(serde_json::from_str(&line)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub clearance: f64,
    /// `clearance − max_deflection`, m.
    pub margin: f64,
    pub max_deflection: f64,
    pub rationale: String,
}

/// Safe iff the peak displacement stays strictly below the clearance.
pub fn assess(max_deflection: f64, clearance: f64) -> Result<SafetyVerdict> {
    if !(clearance > 0.0) || !clearance.is_finite() {
        return Err(Error::InvalidParameter(format!("clearance {clearance} must be positive")));
    }
    if !max_deflection.is_finite() {
        return Err(Error::InvalidParameter("deflection is not finite".into()));
    }
    let margin = clearance - max_deflection;
    let safe = margin > 0.0;
    let rationale = if safe {
        format!(
            "peak deflection {:.4} m is below the {:.4} m clearance by {:.4} m",
            max_deflection, clearance, margin
        )
    } else {
        format!(
            "peak deflection {:.4} m reaches the {:.4} m clearance (excess {:.4} m)",
            max_deflection, clearance, -margin
        )
    };
    Ok(SafetyVerdict {
        safe,
        clearance,
        margin,
        max_deflection,
        rationale,
    })
}

pub fn assess_report(report: &PredictionReport, clearance: f64) -> Result<SafetyVerdict> {
    assess(report.max_deflection_m, clearance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::GridSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn verdict_examples() {
        let v = assess(0.009, 0.015).unwrap();
        assert!(v.safe);
        assert_abs_diff_eq!(v.margin, 0.006, epsilon = 1e-12);
        assert!(!assess(0.090, 0.015).unwrap().safe);
        assert!(!assess(0.015, 0.015).unwrap().safe);
        assert!(assess(0.01, 0.0).is_err());
    }

    fn slab(n: usize, layer_at: impl Fn(usize) -> usize) -> VoxelGrid {
        let spec = GridSpec::new(n, 0.02, [0.0; 3]).unwrap();
        let mut g = VoxelGrid::empty(spec).unwrap();
        for x in 2..n - 2 {
            for y in 0..n {
                g.set(x, y, layer_at(x), true);
            }
        }
        g
    }

    #[test]
    fn sag_report_matches_grid() {
        let reference = slab(16, |_| 10);
        let bent = slab(16, |x| if x == 8 { 7 } else { 10 });
        let c = Condition::new(1, 3, 0).unwrap();
        let r = PredictionReport::from_grids("test", DeflectionMode::Sag, c, 0.5, &reference, bent, 1.0).unwrap();
        assert_eq!(r.max_deflection_voxels, 3);
        assert_abs_diff_eq!(r.max_deflection_m, 0.06, epsilon = 1e-12);
        assert_eq!(r.probes.len(), 12);
        assert_eq!(r.probes.iter().find(|p| p.x == 8).unwrap().deflection_voxels, 3);
    }

    #[test]
    fn settlement_probes_every_column() {
        let reference = slab(8, |_| 4);
        let sunk = slab(8, |x| if x == 3 { 2 } else { 4 });
        let c = Condition::new(0, 0, 1).unwrap();
        let r = PredictionReport::from_grids("t", DeflectionMode::Settlement, c, 0.5, &reference, sunk, 0.0).unwrap();
        assert_eq!(r.probes.len(), 4 * 8);
        assert_eq!(r.max_deflection_voxels, 2);
    }

    #[test]
    fn report_file_round_trip_drops_timing() {
        let reference = slab(8, |_| 4);
        let c = Condition::new(0, 0, 1).unwrap();
        let r = PredictionReport::from_grids("t", DeflectionMode::Sag, c, 0.5, &reference, reference.clone(), 12.5)
            .unwrap()
            .with_continuous_peak(0.0114);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        r.save(&p).unwrap();
        let back = PredictionReport::load(&p).unwrap();
        assert_eq!(back.max_deflection_m, 0.0114);
        assert_eq!(back.wall_ms, 0.0);
        assert!(back.predicted_grid.is_none());
        assert!(assess_report(&back, 0.015).unwrap().safe);
    }
}
