//! Voxel occupancy grids, synthetic orthographic depth views and the
//! grid-level comparison metrics.

mod depth;
mod grid;
mod metrics;
pub mod pack;

pub use depth::{depth_to_grid, render_depth, visible_shell, DepthImage, OrthoCamera, ViewDir, NO_RETURN};
pub use grid::{voxelize, GridSpec, HeightField, VoxelGrid, DEFAULT_PITCH};
pub use metrics::{
    deflection_profile, grid_metrics, grid_metrics_at, highest_in_slice, lowest_in_slice,
    lowest_layer, settlement_map, GridMetrics,
};
pub use pack::{read_grid, write_grid};
