use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::plot::bar_chart;
use super::predictor::Predictor;
use super::report::DeflectionMode;
use crate::error::{Error, Result};
use crate::physics::{Dataset, MaterialKind, SampleMeta, WheelKind};
use crate::voxel::grid_metrics;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Table,
    Holdout,
    Wheels,
}

impl FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(EvalMode::Table),
            "holdout" => Ok(EvalMode::Holdout),
            "wheels" => Ok(EvalMode::Wheels),
            other => Err(Error::Config(format!("unknown evaluation mode '{other}'"))),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Table => "table",
            EvalMode::Holdout => "holdout",
            EvalMode::Wheels => "wheels",
        })
    }
}

/// Deflection RMSE of one (material, payload, location) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub material: String,
    pub payload: bool,
    pub location_bin: usize,
    pub samples: usize,
    pub rmse_cm: f64,
    pub mean_iou: f64,
}

/// Peak-deflection error of one held-out case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoldoutRow {
    pub index: usize,
    pub span: f64,
    pub material: MaterialKind,
    pub force_bin: usize,
    pub predicted_max_voxels: Option<i64>,
    pub target_max_voxels: Option<i64>,
    pub error_voxels: Option<u32>,
    pub within_1: bool,
    pub within_2: bool,
    pub iou: f64,
}

/// Settlement under one contact patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WheelRow {
    pub index: usize,
    pub wheel: WheelKind,
    pub force_bin: usize,
    pub predicted_settlement_m: f64,
    pub target_settlement_m: f64,
    pub oracle_settlement_m: f64,
    pub error_voxels: u32,
    pub predicted_exceeds: bool,
    pub oracle_exceeds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EvalRow {
    Table(TableRow),
    Holdout(HoldoutRow),
    Wheel(WheelRow),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub mode: EvalMode,
    pub predictor: String,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Value plotted for each row.
    fn bar_values(&self) -> (Vec<f64>, Option<f64>) {
        let mut reference = None;
        let v = self
            .rows
            .iter()
            .map(|r| match r {
                EvalRow::Table(t) => t.rmse_cm,
                EvalRow::Holdout(h) => {
                    reference = Some(1.0);
                    h.error_voxels.map_or(f64::INFINITY, f64::from)
                }
                EvalRow::Wheel(w) => w.predicted_settlement_m,
            })
            .collect();
        (v, reference)
    }

    /// Writes `<mode>.jsonl` and `<mode>.png` into `dir`; returns both paths.
    pub fn write(&self, dir: impl AsRef<Path>, clearance: f64) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let records = dir.join(format!("{}.jsonl", self.mode));
        let mut w = BufWriter::new(File::create(&records)?);
        for r in &self.rows {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        let plot = dir.join(format!("{}.png", self.mode));
        let (values, mut reference) = self.bar_values();
        if self.mode == EvalMode::Wheels {
            reference = Some(clearance);
        }
        bar_chart(&values, reference, &plot)?;
        Ok((records, plot))
    }

    pub fn holdout_rows(&self) -> impl Iterator<Item = &HoldoutRow> {
        self.rows.iter().filter_map(|r| match r {
            EvalRow::Holdout(h) => Some(h),
            _ => None,
        })
    }

    pub fn table_rows(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter_map(|r| match r {
            EvalRow::Table(t) => Some(t),
            _ => None,
        })
    }

    pub fn wheel_rows(&self) -> impl Iterator<Item = &WheelRow> {
        self.rows.iter().filter_map(|r| match r {
            EvalRow::Wheel(w) => Some(w),
            _ => None,
        })
    }
}

fn require_meta<'a>(meta: Option<&'a [SampleMeta]>, data: &Dataset, mode: EvalMode) -> Result<&'a [SampleMeta]> {
    match meta {
        Some(m) if m.len() == data.len() => Ok(m),
        Some(m) => Err(Error::InvalidParameter(format!(
            "{} metadata records for {} samples",
            m.len(),
            data.len()
        ))),
        None => Err(Error::InvalidParameter(format!("{mode} mode needs sample metadata"))),
    }
}

fn material_name(meta: Option<&SampleMeta>, bin: usize) -> String {
    match meta {
        Some(m) => m.material.to_string(),
        None => format!("material{bin}"),
    }
}

/// Runs `predictor` over every sample of `data` and aggregates per `mode`.
pub fn evaluate(
    predictor: &dyn Predictor,
    data: &Dataset,
    meta: Option<&[SampleMeta]>,
    mode: EvalMode,
    clearance: f64,
) -> Result<EvalReport> {
    let mut rows = Vec::new();
    match mode {
        EvalMode::Table => {
            // (material, payload, location) -> (sum of squared RMSE weighted by columns, columns, iou sum, n)
            let mut cells: BTreeMap<(String, bool, usize), (f64, usize, f64, usize)> = BTreeMap::new();
            for (i, s) in data.samples.iter().enumerate() {
                let pred = predictor.predict(s)?;
                let m = grid_metrics(&pred, &s.target)?;
                let key = (
                    material_name(meta.and_then(|m| m.get(i)), s.condition.material_bin),
                    s.condition.force_bin == 1,
                    s.condition.location_bin,
                );
                let e = cells.entry(key).or_default();
                if let Some(r) = m.rmse_deflection_cm {
                    e.0 += r * r * m.compared_columns as f64;
                    e.1 += m.compared_columns;
                }
                e.2 += m.iou;
                e.3 += 1;
            }
            for ((material, payload, location_bin), (sq, cols, iou, n)) in cells {
                rows.push(EvalRow::Table(TableRow {
                    material,
                    payload,
                    location_bin,
                    samples: n,
                    rmse_cm: if cols > 0 { (sq / cols as f64).sqrt() } else { f64::NAN },
                    mean_iou: iou / n as f64,
                }));
            }
        }
        EvalMode::Holdout => {
            let meta = require_meta(meta, data, mode)?;
            for (s, m) in data.samples.iter().zip(meta) {
                let span = m
                    .span
                    .ok_or_else(|| Error::InvalidParameter("holdout mode needs beam samples".into()))?;
                let pred = predictor.predict(s)?;
                let gm = grid_metrics(&pred, &s.target)?;
                let p = DeflectionMode::Sag.max_voxels(&s.input, &pred);
                let t = DeflectionMode::Sag.max_voxels(&s.input, &s.target);
                let err = match (p, t) {
                    (Some(p), Some(t)) => Some(p.abs_diff(t) as u32),
                    _ => None,
                };
                rows.push(EvalRow::Holdout(HoldoutRow {
                    index: m.index,
                    span,
                    material: m.material,
                    force_bin: s.condition.force_bin,
                    predicted_max_voxels: p,
                    target_max_voxels: t,
                    error_voxels: err,
                    within_1: err.is_some_and(|e| e <= 1),
                    within_2: err.is_some_and(|e| e <= 2),
                    iou: gm.iou,
                }));
            }
        }
        EvalMode::Wheels => {
            let meta = require_meta(meta, data, mode)?;
            for (s, m) in data.samples.iter().zip(meta) {
                let wheel = m
                    .wheel
                    .ok_or_else(|| Error::InvalidParameter("wheels mode needs foam samples".into()))?;
                let pred = predictor.predict(s)?;
                let pitch = data.grid.pitch;
                let p = DeflectionMode::Settlement.max_voxels(&s.input, &pred).unwrap_or(0);
                let t = DeflectionMode::Settlement.max_voxels(&s.input, &s.target).unwrap_or(0);
                let predicted = p as f64 * pitch;
                rows.push(EvalRow::Wheel(WheelRow {
                    index: m.index,
                    wheel,
                    force_bin: s.condition.force_bin,
                    predicted_settlement_m: predicted,
                    target_settlement_m: t as f64 * pitch,
                    oracle_settlement_m: m.peak_displacement,
                    error_voxels: p.abs_diff(t) as u32,
                    predicted_exceeds: predicted >= clearance,
                    oracle_exceeds: m.peak_displacement >= clearance,
                }));
            }
        }
    }
    Ok(EvalReport {
        mode,
        predictor: predictor.name().to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assess::OraclePredictor;
    use crate::physics::{generate_dataset, DatasetConfig, Split};

    #[test]
    fn oracle_passthrough_has_zero_error_everywhere() {
        let cfg = DatasetConfig::beam(16, 0.09, vec![0.9, 1.2]);
        let g = generate_dataset(&cfg, 0).unwrap();
        let table = evaluate(&OraclePredictor, &g.dataset, Some(&g.meta), EvalMode::Table, 0.015).unwrap();
        assert_eq!(table.rows.len(), 4); // 2 materials x 2 payloads x 1 location
        assert!(table.table_rows().all(|r| r.rmse_cm == 0.0 && r.mean_iou == 1.0));
        let hold = evaluate(&OraclePredictor, &g.dataset, Some(&g.meta), EvalMode::Holdout, 0.015).unwrap();
        assert!(hold.holdout_rows().all(|r| r.error_voxels == Some(0) && r.within_1));
        assert_eq!(hold.holdout_rows().count(), 8);
    }

    #[test]
    fn wheels_mode_flags_loaded_castor() {
        let mut cfg = DatasetConfig::foam(32, 0.011);
        cfg.deck_layer = 20;
        cfg.foam_thickness = 0.088;
        let g = generate_dataset(&cfg, 0).unwrap();
        let r = evaluate(&OraclePredictor, &g.dataset, Some(&g.meta), EvalMode::Wheels, 0.015).unwrap();
        let flagged: Vec<_> = r
            .wheel_rows()
            .filter(|w| w.oracle_exceeds)
            .map(|w| (w.wheel, w.force_bin))
            .collect();
        assert_eq!(flagged, vec![(WheelKind::Castor, 1)]);
        assert!(r.wheel_rows().all(|w| w.error_voxels == 0));
        let dir = tempfile::tempdir().unwrap();
        let (records, plot) = r.write(dir.path(), 0.015).unwrap();
        assert_eq!(fs::read_to_string(records).unwrap().lines().count(), r.rows.len());
        assert!(plot.exists());
    }

    #[test]
    fn holdout_requires_metadata() {
        let mut cfg = DatasetConfig::beam(16, 0.09, vec![1.0]);
        cfg.split = Split::Train;
        let g = generate_dataset(&cfg, 0).unwrap();
        assert!(evaluate(&OraclePredictor, &g.dataset, None, EvalMode::Holdout, 0.015).is_err());
    }
}
