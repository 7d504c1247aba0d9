use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, VoxelGrid};
use crate::error::{Error, Result};

/// Depth value stored where a ray hits nothing.
pub const NO_RETURN: f32 = f32::INFINITY;

const DEPTH_MAGIC: &[u8; 4] = b"DPTH";
const DEPTH_VERSION: u16 = 1;

/// Axis-aligned viewing direction of an orthographic camera. The ray
/// travels along the named direction, entering the grid through the
/// opposite face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViewDir {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl ViewDir {
    pub const ALL: [ViewDir; 6] = [
        ViewDir::PosX,
        ViewDir::NegX,
        ViewDir::PosY,
        ViewDir::NegY,
        ViewDir::PosZ,
        ViewDir::NegZ,
    ];

    pub fn axis(self) -> usize {
        match self {
            ViewDir::PosX | ViewDir::NegX => 0,
            ViewDir::PosY | ViewDir::NegY => 1,
            ViewDir::PosZ | ViewDir::NegZ => 2,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, ViewDir::PosX | ViewDir::PosY | ViewDir::PosZ)
    }

    /// Grid axes mapped to image columns (u) and rows (v).
    pub fn image_axes(self) -> (usize, usize) {
        match self.axis() {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    fn code(self) -> u8 {
        match self {
            ViewDir::PosX => 0,
            ViewDir::NegX => 1,
            ViewDir::PosY => 2,
            ViewDir::NegY => 3,
            ViewDir::PosZ => 4,
            ViewDir::NegZ => 5,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        ViewDir::ALL.get(code as usize).copied()
    }
}

impl FromStr for ViewDir {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "+x" | "x" => ViewDir::PosX,
            "-x" => ViewDir::NegX,
            "+y" | "y" => ViewDir::PosY,
            "-y" => ViewDir::NegY,
            "+z" | "z" => ViewDir::PosZ,
            "-z" => ViewDir::NegZ,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown view direction '{other}'"
                )))
            }
        })
    }
}

impl std::fmt::Display for ViewDir {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ViewDir::PosX => "+x",
            ViewDir::NegX => "-x",
            ViewDir::PosY => "+y",
            ViewDir::NegY => "-y",
            ViewDir::PosZ => "+z",
            ViewDir::NegZ => "-z",
        };
        f.write_str(s)
    }
}

/// Orthographic camera whose image plane covers one face of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthoCamera {
    pub direction: ViewDir,
    /// Minimum corner of the imaged volume.
    pub origin: [f64; 3],
    /// Edge length of the imaged square, meters.
    pub extent: f64,
}

impl OrthoCamera {
    pub fn for_grid(grid: &GridSpec, direction: ViewDir) -> Self {
        OrthoCamera {
            direction,
            origin: grid.origin,
            extent: grid.extent(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    /// Row-major range values, meters from the entry face; `NO_RETURN` for misses.
    pub depth: Vec<f32>,
    pub camera: OrthoCamera,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, depth: Vec<f32>, camera: OrthoCamera) -> Result<Self> {
        let img = DepthImage {
            width,
            height,
            depth,
            camera,
        };
        img.validate()?;
        Ok(img)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::MalformedDepth("empty raster".into()));
        }
        if self.depth.len() != self.width * self.height {
            return Err(Error::MalformedDepth(format!(
                "{}x{} raster holds {} values",
                self.width,
                self.height,
                self.depth.len()
            )));
        }
        if let Some(d) = self
            .depth
            .iter()
            .find(|d| d.is_nan() || **d < 0.0 || **d == f32::NEG_INFINITY)
        {
            return Err(Error::MalformedDepth(format!("invalid depth value {d}")));
        }
        if !(self.camera.extent > 0.0 && self.camera.extent.is_finite()) {
            return Err(Error::MalformedDepth("camera extent must be positive".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f32 {
        self.depth[v * self.width + u]
    }

    pub fn hits(&self) -> usize {
        self.depth.iter().filter(|d| d.is_finite()).count()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = Vec::with_capacity(28);
        header.extend_from_slice(DEPTH_MAGIC);
        header.extend_from_slice(&DEPTH_VERSION.to_le_bytes());
        header.extend_from_slice(&(self.width as u16).to_le_bytes());
        header.extend_from_slice(&(self.height as u16).to_le_bytes());
        header.push(self.camera.direction.code());
        header.push(0);
        header.extend_from_slice(&(self.camera.extent as f32).to_le_bytes());
        for o in self.camera.origin {
            header.extend_from_slice(&(o as f32).to_le_bytes());
        }
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(self.depth.len() * 4);
        for d in &self.depth {
            body.extend_from_slice(&d.to_le_bytes());
        }
        w.write_all(&body)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 28];
        r.read_exact(&mut header)
            .map_err(|e| Error::MalformedDepth(format!("short header: {e}")))?;
        if &header[0..4] != DEPTH_MAGIC {
            return Err(Error::MalformedDepth("bad magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != DEPTH_VERSION {
            return Err(Error::MalformedDepth(format!("unsupported version {version}")));
        }
        let width = u16::from_le_bytes([header[6], header[7]]) as usize;
        let height = u16::from_le_bytes([header[8], header[9]]) as usize;
        let direction = ViewDir::from_code(header[10])
            .ok_or_else(|| Error::MalformedDepth(format!("bad view code {}", header[10])))?;
        let f = |o: usize| f32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as f64;
        let camera = OrthoCamera {
            direction,
            extent: f(12),
            origin: [f(16), f(20), f(24)],
        };
        let mut body = vec![0u8; width * height * 4];
        r.read_exact(&mut body)
            .map_err(|e| Error::MalformedDepth(format!("short raster: {e}")))?;
        let depth = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        DepthImage::new(width, height, depth, camera)
    }
}

/// Walk every ray of an axis-aligned view over the grid. The callback sees
/// the pixel (u, v) and the voxel coordinates along the ray, nearest first.
fn for_each_ray(n: usize, dir: ViewDir, mut f: impl FnMut(usize, usize, &[[usize; 3]])) {
    let axis = dir.axis();
    let (ua, va) = dir.image_axes();
    let mut ray = vec![[0usize; 3]; n];
    for v in 0..n {
        for u in 0..n {
            for (s, c) in ray.iter_mut().enumerate() {
                c[axis] = if dir.is_positive() { s } else { n - 1 - s };
                c[ua] = u;
                c[va] = v;
            }
            f(u, v, &ray);
        }
    }
}

/// Ray-cast an orthographic depth image, one pixel per voxel column.
pub fn render_depth(grid: &VoxelGrid, dir: ViewDir) -> DepthImage {
    let n = grid.resolution();
    let pitch = grid.pitch() as f32;
    let mut depth = vec![NO_RETURN; n * n];
    for_each_ray(n, dir, |u, v, ray| {
        if let Some(step) = ray.iter().position(|&[x, y, z]| grid.get(x, y, z)) {
            depth[v * n + u] = step as f32 * pitch;
        }
    });
    DepthImage {
        width: n,
        height: n,
        depth,
        camera: OrthoCamera::for_grid(grid.spec(), dir),
    }
}

/// Lift a depth image into a 2.5-D shell: one voxel per finite pixel, at
/// the depth the pixel reports.
pub fn depth_to_grid(img: &DepthImage, grid: &GridSpec) -> Result<VoxelGrid> {
    img.validate()?;
    grid.validate()?;
    let n = grid.resolution;
    if img.width != n || img.height != n {
        return Err(Error::CameraMismatch(format!(
            "{}x{} image for a {n}^3 grid",
            img.width, img.height
        )));
    }
    let tol = 1e-5 * grid.extent().max(1.0);
    if (img.camera.extent - grid.extent()).abs() > tol {
        return Err(Error::CameraMismatch(format!(
            "camera extent {} m, grid extent {} m",
            img.camera.extent,
            grid.extent()
        )));
    }
    if img
        .camera
        .origin
        .iter()
        .zip(grid.origin.iter())
        .any(|(a, b)| (a - b).abs() > tol)
    {
        return Err(Error::CameraMismatch(format!(
            "camera origin {:?}, grid origin {:?}",
            img.camera.origin, grid.origin
        )));
    }

    let mut out = VoxelGrid::empty(*grid)?;
    let dir = img.camera.direction;
    let pitch = grid.pitch;
    let mut overflow = None;
    for_each_ray(n, dir, |u, v, ray| {
        let d = img.at(u, v);
        if !d.is_finite() {
            return;
        }
        let step = (d as f64 / pitch + 1e-4).floor() as usize;
        match ray.get(step) {
            Some(&[x, y, z]) => out.set(x, y, z, true),
            None => overflow = Some(d),
        }
    });
    if let Some(d) = overflow {
        return Err(Error::CameraMismatch(format!(
            "depth {d} m lies beyond the grid"
        )));
    }
    Ok(out)
}

/// First occupied voxel along every ray of the view.
pub fn visible_shell(grid: &VoxelGrid, dir: ViewDir) -> VoxelGrid {
    let n = grid.resolution();
    let mut out = VoxelGrid::empty(*grid.spec()).expect("spec already validated");
    for_each_ray(n, dir, |_, _, ray| {
        if let Some(&[x, y, z]) = ray.iter().find(|&&[x, y, z]| grid.get(x, y, z)) {
            out.set(x, y, z, true);
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::grid::{voxelize, HeightField};

    fn spec() -> GridSpec {
        GridSpec::new(16, 0.022, [0.0; 3]).unwrap()
    }

    #[test]
    fn full_grid_renders_zero_depth() {
        let g = VoxelGrid::full(spec()).unwrap();
        for dir in ViewDir::ALL {
            let img = render_depth(&g, dir);
            assert!(img.depth.iter().all(|&d| d == 0.0), "{dir}");
        }
    }

    #[test]
    fn empty_grid_renders_no_returns() {
        let g = VoxelGrid::empty(spec()).unwrap();
        let img = render_depth(&g, ViewDir::NegZ);
        assert_eq!(img.hits(), 0);
        assert!(depth_to_grid(&img, &spec()).unwrap().is_empty());
    }

    #[test]
    fn side_view_of_slab_is_a_stripe() {
        let s = spec();
        let g = voxelize(&HeightField::flat(&s, 0.11, 0.022), &s).unwrap();
        let img = render_depth(&g, ViewDir::PosY);
        for v in 0..16 {
            for u in 0..16 {
                let d = img.at(u, v);
                if v == 4 {
                    assert_eq!(d, 0.0);
                } else {
                    assert_eq!(d, NO_RETURN);
                }
            }
        }
        let shell = depth_to_grid(&img, &s).unwrap();
        assert_eq!(shell.count(), 16);
        for x in 0..16 {
            assert!(shell.get(x, 0, 4));
        }
    }

    #[test]
    fn top_view_depth_counts_from_entry_face() {
        let s = spec();
        let g = voxelize(&HeightField::flat(&s, 0.11, 0.022), &s).unwrap();
        let down = render_depth(&g, ViewDir::NegZ);
        assert!((down.at(3, 3) - 11.0 * 0.022).abs() < 1e-6);
        let up = render_depth(&g, ViewDir::PosZ);
        assert!((up.at(3, 3) - 4.0 * 0.022).abs() < 1e-6);
        assert_eq!(depth_to_grid(&down, &s).unwrap(), g);
    }

    #[test]
    fn rejects_mismatched_camera() {
        let s = spec();
        let img = render_depth(&VoxelGrid::full(s).unwrap(), ViewDir::PosX);
        let other = GridSpec::new(16, 0.03, [0.0; 3]).unwrap();
        assert!(matches!(
            depth_to_grid(&img, &other),
            Err(Error::CameraMismatch(_))
        ));
        let shifted = GridSpec::new(16, 0.022, [0.1, 0.0, 0.0]).unwrap();
        assert!(depth_to_grid(&img, &shifted).is_err());
    }

    #[test]
    fn rejects_depth_past_far_face() {
        let s = spec();
        let mut img = render_depth(&VoxelGrid::empty(s).unwrap(), ViewDir::PosX);
        img.depth[0] = 16.0 * 0.022;
        assert!(depth_to_grid(&img, &s).is_err());
        img.depth[0] = -0.1;
        assert!(matches!(
            depth_to_grid(&img, &s),
            Err(Error::MalformedDepth(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let s = GridSpec::new(8, 0.05, [0.25, -0.5, 0.0]).unwrap();
        let mut g = VoxelGrid::empty(s).unwrap();
        g.set(1, 2, 3, true);
        let img = render_depth(&g, ViewDir::NegY);
        let mut buf = Vec::new();
        img.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 28 + 64 * 4);
        let back = DepthImage::read_from(&buf[..]).unwrap();
        assert_eq!(back.depth, img.depth);
        assert_eq!(back.camera.direction, ViewDir::NegY);
        assert_eq!(depth_to_grid(&back, &s).unwrap(), g);
        assert!(DepthImage::read_from(&buf[..20]).is_err());
    }
}
