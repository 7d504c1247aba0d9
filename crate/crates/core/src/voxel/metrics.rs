use serde::{Deserialize, Serialize};

use super::grid::VoxelGrid;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetrics {
    pub iou: f64,
    /// |lowest occupied layer of pred - lowest occupied layer of truth|;
    /// `None` when either grid is empty.
    pub max_deflection_error_voxels: Option<u32>,
    /// RMS of per-column lowest-voxel differences, in centimeters.
    pub rmse_deflection_cm: Option<f64>,
    pub compared_columns: usize,
    /// Probe columns empty in at least one grid.
    pub excluded_columns: usize,
}

/// Compare two grids over every column.
pub fn grid_metrics(pred: &VoxelGrid, truth: &VoxelGrid) -> Result<GridMetrics> {
    let n = truth.resolution();
    let probes: Vec<(usize, usize)> = (0..n).flat_map(|y| (0..n).map(move |x| (x, y))).collect();
    grid_metrics_at(pred, truth, &probes)
}

/// Compare two grids, evaluating the deflection RMSE only at `probes`
/// (column coordinates `(x, y)`).
pub fn grid_metrics_at(
    pred: &VoxelGrid,
    truth: &VoxelGrid,
    probes: &[(usize, usize)],
) -> Result<GridMetrics> {
    pred.spec().ensure_compatible(truth.spec())?;

    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in pred.occupancy().iter().zip(truth.occupancy()) {
        inter += (a & b) as usize;
        union += (a | b) as usize;
    }
    let iou = if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    };

    let max_deflection_error_voxels = match (lowest_layer(pred), lowest_layer(truth)) {
        (Some(p), Some(t)) => Some(p.abs_diff(t) as u32),
        _ => None,
    };

    let mut sq = 0.0;
    let mut compared = 0usize;
    let mut excluded = 0usize;
    let cm_per_voxel = truth.pitch() * 100.0;
    for &(x, y) in probes {
        match (pred.lowest_in_column(x, y), truth.lowest_in_column(x, y)) {
            (Some(p), Some(t)) => {
                let d = (p as f64 - t as f64) * cm_per_voxel;
                sq += d * d;
                compared += 1;
            }
            (None, None) => {}
            _ => excluded += 1,
        }
    }
    let rmse_deflection_cm = (compared > 0).then(|| (sq / compared as f64).sqrt());

    Ok(GridMetrics {
        iou,
        max_deflection_error_voxels,
        rmse_deflection_cm,
        compared_columns: compared,
        excluded_columns: excluded,
    })
}

/// Lowest occupied layer anywhere in the grid.
pub fn lowest_layer(grid: &VoxelGrid) -> Option<usize> {
    let n = grid.resolution();
    let layer = n * n;
    grid.occupancy()
        .chunks_exact(layer)
        .position(|slice| slice.iter().any(|&v| v != 0))
}

/// Lowest occupied layer in the x-slice `x` (over all y).
pub fn lowest_in_slice(grid: &VoxelGrid, x: usize) -> Option<usize> {
    (0..grid.resolution())
        .filter_map(|y| grid.lowest_in_column(x, y))
        .min()
}

/// Highest occupied layer in the x-slice `x` (over all y).
pub fn highest_in_slice(grid: &VoxelGrid, x: usize) -> Option<usize> {
    (0..grid.resolution())
        .filter_map(|y| grid.highest_in_column(x, y))
        .max()
}

/// Downward displacement, in voxels, of the underside of `deformed`
/// relative to `reference`, per x-slice. Slices empty in either grid
/// yield `None`.
pub fn deflection_profile(reference: &VoxelGrid, deformed: &VoxelGrid) -> Vec<Option<i64>> {
    (0..reference.resolution())
        .map(|x| match (lowest_in_slice(reference, x), lowest_in_slice(deformed, x)) {
            (Some(r), Some(d)) => Some(r as i64 - d as i64),
            _ => None,
        })
        .collect()
}

/// Downward displacement, in voxels, of the top surface per column.
pub fn settlement_map(reference: &VoxelGrid, deformed: &VoxelGrid) -> Vec<Option<i64>> {
    let n = reference.resolution();
    (0..n)
        .flat_map(|y| (0..n).map(move |x| (x, y)))
        .map(|(x, y)| {
            match (
                reference.highest_in_column(x, y),
                deformed.highest_in_column(x, y),
            ) {
                (Some(r), Some(d)) => Some(r as i64 - d as i64),
                _ => None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::grid::GridSpec;

    fn spec() -> GridSpec {
        GridSpec::new(16, 0.022, [0.0; 3]).unwrap()
    }

    /// A beam along x at y = 8 whose underside sags by `sag` voxels at the
    /// center column and linearly less towards the ends.
    fn sagging_beam(base: usize, sag: usize) -> VoxelGrid {
        let mut g = VoxelGrid::empty(spec()).unwrap();
        for x in 0..16 {
            let dist = (x as i64 - 8).unsigned_abs() as usize;
            let drop = sag.saturating_sub(dist);
            g.set(x, 8, base - drop, true);
        }
        g
    }

    #[test]
    fn identical_grids() {
        let g = sagging_beam(10, 4);
        let m = grid_metrics(&g, &g).unwrap();
        assert_eq!(m.iou, 1.0);
        assert_eq!(m.max_deflection_error_voxels, Some(0));
        assert_eq!(m.rmse_deflection_cm, Some(0.0));
        assert_eq!(m.excluded_columns, 0);
    }

    #[test]
    fn disjoint_grids() {
        let a = sagging_beam(10, 0);
        let b = sagging_beam(12, 0);
        let m = grid_metrics(&a, &b).unwrap();
        assert_eq!(m.iou, 0.0);
        assert_eq!(m.max_deflection_error_voxels, Some(2));
    }

    #[test]
    fn one_voxel_short_at_center() {
        let truth = sagging_beam(10, 4);
        let pred = sagging_beam(10, 3);
        let m = grid_metrics(&pred, &truth).unwrap();
        assert_eq!(m.max_deflection_error_voxels, Some(1));
        let center = grid_metrics_at(&pred, &truth, &[(8, 8)]).unwrap();
        assert!((center.rmse_deflection_cm.unwrap() - 2.2).abs() < 1e-9);
    }

    #[test]
    fn probe_columns_missing_from_one_grid_are_counted() {
        let truth = sagging_beam(10, 2);
        let mut pred = truth.clone();
        pred.set(0, 8, 10, false);
        let m = grid_metrics_at(&pred, &truth, &[(0, 8), (1, 8), (5, 5)]).unwrap();
        assert_eq!(m.compared_columns, 1);
        assert_eq!(m.excluded_columns, 1);
    }

    #[test]
    fn mismatched_resolution_is_rejected() {
        let a = VoxelGrid::empty(spec()).unwrap();
        let b = VoxelGrid::empty(GridSpec::new(32, 0.022, [0.0; 3]).unwrap()).unwrap();
        assert!(grid_metrics(&a, &b).is_err());
    }

    #[test]
    fn profile_measures_sag_per_slice() {
        let flat = sagging_beam(10, 0);
        let bent = sagging_beam(10, 3);
        let prof = deflection_profile(&flat, &bent);
        assert_eq!(prof[8], Some(3));
        assert_eq!(prof[6], Some(1));
        assert_eq!(prof[0], Some(0));
    }
}
