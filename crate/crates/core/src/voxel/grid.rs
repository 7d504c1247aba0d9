use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default voxel edge length in meters (one voxel = 2.2 cm).
pub const DEFAULT_PITCH: f64 = 0.022;

/// Resolution, pitch and world placement of a cubic voxel grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    pub pitch: f64,
    /// World position of the (0,0,0) voxel's minimum corner.
    pub origin: [f64; 3],
}

impl GridSpec {
    pub fn new(resolution: usize, pitch: f64, origin: [f64; 3]) -> Result<Self> {
        let spec = GridSpec {
            resolution,
            pitch,
            origin,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_resolution(resolution: usize) -> Result<Self> {
        Self::new(resolution, DEFAULT_PITCH, [0.0; 3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 8 || !self.resolution.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "resolution {} must be a power of two >= 8",
                self.resolution
            )));
        }
        if self.resolution > u16::MAX as usize {
            return Err(Error::InvalidGrid(format!(
                "resolution {} does not fit the on-disk header",
                self.resolution
            )));
        }
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "pitch {} must be positive",
                self.pitch
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    /// Edge length of the whole cube in meters.
    pub fn extent(&self) -> f64 {
        self.resolution as f64 * self.pitch
    }

    pub fn voxel_count(&self) -> usize {
        self.resolution.pow(3)
    }

    /// World coordinate of the center of voxel `index` along `axis`.
    pub fn center(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + (index as f64 + 0.5) * self.pitch
    }

    /// Same resolution and pitch (to f32 precision); origins are not compared.
    pub fn compatible(&self, other: &GridSpec) -> bool {
        self.resolution == other.resolution && (self.pitch - other.pitch).abs() <= 1e-6 * self.pitch
    }

    pub(crate) fn ensure_compatible(&self, other: &GridSpec) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::ResolutionMismatch {
                left: format!("N={} pitch={}", self.resolution, self.pitch),
                right: format!("N={} pitch={}", other.resolution, other.pitch),
            })
        }
    }
}

/// Binary occupancy cube. Storage is x-fastest, then y, then z.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    spec: GridSpec,
    occupancy: Vec<u8>,
}

impl VoxelGrid {
    pub fn empty(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(VoxelGrid {
            occupancy: vec![0; spec.voxel_count()],
            spec,
        })
    }

    pub fn full(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(VoxelGrid {
            occupancy: vec![1; spec.voxel_count()],
            spec,
        })
    }

    pub fn from_occupancy(spec: GridSpec, occupancy: Vec<u8>) -> Result<Self> {
        spec.validate()?;
        if occupancy.len() != spec.voxel_count() {
            return Err(Error::InvalidGrid(format!(
                "expected {} voxels, got {}",
                spec.voxel_count(),
                occupancy.len()
            )));
        }
        if occupancy.iter().any(|&v| v > 1) {
            return Err(Error::InvalidGrid("occupancy values must be 0 or 1".into()));
        }
        Ok(VoxelGrid { spec, occupancy })
    }

    /// Binarize per-voxel probabilities: occupied iff `p >= threshold`.
    pub fn from_probabilities(spec: GridSpec, probs: &[f32], threshold: f32) -> Result<Self> {
        let occ = probs.iter().map(|&p| u8::from(p >= threshold)).collect();
        Self::from_occupancy(spec, occ)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn resolution(&self) -> usize {
        self.spec.resolution
    }

    pub fn pitch(&self) -> f64 {
        self.spec.pitch
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        let n = self.spec.resolution;
        x + n * (y + n * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy[self.index(x, y, z)] != 0
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        self.occupancy[i] = u8::from(value);
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().map(|&v| v as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.iter().all(|&v| v == 0)
    }

    /// Occupancy as 0.0/1.0 floats in storage order.
    pub fn to_f32(&self) -> Vec<f32> {
        self.occupancy.iter().map(|&v| v as f32).collect()
    }

    /// Index of the lowest occupied voxel in column (x, y).
    pub fn lowest_in_column(&self, x: usize, y: usize) -> Option<usize> {
        (0..self.spec.resolution).find(|&z| self.get(x, y, z))
    }

    /// Index of the highest occupied voxel in column (x, y).
    pub fn highest_in_column(&self, x: usize, y: usize) -> Option<usize> {
        (0..self.spec.resolution).rev().find(|&z| self.get(x, y, z))
    }

    /// Shift every voxel by `dz` layers, dropping whatever leaves the cube.
    pub fn translated_z(&self, dz: i64) -> VoxelGrid {
        let n = self.spec.resolution;
        let mut out = VoxelGrid {
            spec: self.spec,
            occupancy: vec![0; self.occupancy.len()],
        };
        for z in 0..n {
            let nz = z as i64 + dz;
            if nz < 0 || nz >= n as i64 {
                continue;
            }
            for y in 0..n {
                for x in 0..n {
                    if self.get(x, y, z) {
                        out.set(x, y, nz as usize, true);
                    }
                }
            }
        }
        out
    }
}

/// Surface heights over a regular xy lattice, each cell carrying a solid
/// slab `[z - thickness, z]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightField {
    pub nx: usize,
    pub ny: usize,
    /// World xy of the minimum corner of cell (0, 0).
    pub origin: [f64; 2],
    /// Cell edge lengths along x and y.
    pub cell: [f64; 2],
    pub z: Vec<f64>,
    pub thickness: Vec<f64>,
}

impl HeightField {
    pub fn new(
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        cell: [f64; 2],
        z: Vec<f64>,
        thickness: Vec<f64>,
    ) -> Result<Self> {
        let hf = HeightField {
            nx,
            ny,
            origin,
            cell,
            z,
            thickness,
        };
        hf.validate()?;
        Ok(hf)
    }

    /// A height field laid out on the columns of `grid`, all cells at
    /// height `z` with the given thickness.
    pub fn flat(grid: &GridSpec, z: f64, thickness: f64) -> Self {
        let n = grid.resolution;
        HeightField {
            nx: n,
            ny: n,
            origin: [grid.origin[0], grid.origin[1]],
            cell: [grid.pitch, grid.pitch],
            z: vec![z; n * n],
            thickness: vec![thickness; n * n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cells = self.nx * self.ny;
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidParameter("height field must have cells".into()));
        }
        if self.z.len() != cells || self.thickness.len() != cells {
            return Err(Error::InvalidParameter(format!(
                "height field arrays must hold {cells} cells"
            )));
        }
        if !(self.cell[0] > 0.0 && self.cell[1] > 0.0) {
            return Err(Error::InvalidParameter("cell size must be positive".into()));
        }
        if self.z.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter("heights must be finite".into()));
        }
        if self.thickness.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidParameter(
                "thickness must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        ix + self.nx * iy
    }

    /// Cell containing world point (x, y), if any.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fx = ((x - self.origin[0]) / self.cell[0]).floor();
        let fy = ((y - self.origin[1]) / self.cell[1]).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }
}

/// Rasterize a height field: voxel (i, j, k) is occupied iff the cell under
/// the column center (i, j) holds a slab whose vertical extent overlaps the
/// voxel's z-interval by a positive length.
pub fn voxelize(hf: &HeightField, grid: &GridSpec) -> Result<VoxelGrid> {
    hf.validate()?;
    grid.validate()?;
    check_extent(hf, grid)?;

    let n = grid.resolution;
    let p = grid.pitch;
    let eps = 1e-9 * p;
    let mut out = VoxelGrid::empty(*grid)?;
    for j in 0..n {
        let yc = grid.center(1, j);
        for i in 0..n {
            let xc = grid.center(0, i);
            let Some((cx, cy)) = hf.cell_at(xc, yc) else {
                continue;
            };
            let c = hf.idx(cx, cy);
            let t = hf.thickness[c];
            if t <= 0.0 {
                continue;
            }
            let hi = hf.z[c] - grid.origin[2];
            let lo = hi - t;
            let k0 = ((lo / p).floor() as i64 - 1).max(0);
            let k1 = ((hi / p).ceil() as i64 + 1).min(n as i64 - 1);
            for k in k0..=k1 {
                let zk = k as f64 * p;
                if hi.min(zk + p) - lo.max(zk) > eps {
                    out.set(i, j, k as usize, true);
                }
            }
        }
    }
    Ok(out)
}

fn check_extent(hf: &HeightField, grid: &GridSpec) -> Result<()> {
    let tol = 1e-9 * grid.extent().max(1.0);
    let lo = grid.origin;
    let hi = [
        lo[0] + grid.extent(),
        lo[1] + grid.extent(),
        lo[2] + grid.extent(),
    ];
    let mut bounds: Option<[f64; 6]> = None;
    for iy in 0..hf.ny {
        for ix in 0..hf.nx {
            let c = hf.idx(ix, iy);
            if hf.thickness[c] <= 0.0 {
                continue;
            }
            let x0 = hf.origin[0] + ix as f64 * hf.cell[0];
            let y0 = hf.origin[1] + iy as f64 * hf.cell[1];
            let cell = [
                x0,
                x0 + hf.cell[0],
                y0,
                y0 + hf.cell[1],
                hf.z[c] - hf.thickness[c],
                hf.z[c],
            ];
            bounds = Some(match bounds {
                None => cell,
                Some(b) => [
                    b[0].min(cell[0]),
                    b[1].max(cell[1]),
                    b[2].min(cell[2]),
                    b[3].max(cell[3]),
                    b[4].min(cell[4]),
                    b[5].max(cell[5]),
                ],
            });
        }
    }
    let Some(b) = bounds else {
        return Ok(());
    };
    for (axis, name) in ['x', 'y', 'z'].into_iter().enumerate() {
        let (bmin, bmax) = (b[2 * axis], b[2 * axis + 1]);
        if bmin < lo[axis] - tol || bmax > hi[axis] + tol {
            return Err(Error::ExtentOverflow {
                axis: name,
                detail: format!(
                    "solid spans [{bmin:.4}, {bmax:.4}] m, grid spans [{:.4}, {:.4}] m",
                    lo[axis], hi[axis]
                ),
            });
        }
    }
    Ok(())
}
