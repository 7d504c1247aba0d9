//! Minimal raster plots written as PNG.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::Result;
use crate::voxel::VoxelGrid;

const WHITE: Rgb<u8> = Rgb([255, 255, 255]);
const BAR: Rgb<u8> = Rgb([52, 101, 164]);
const LINE: Rgb<u8> = Rgb([204, 0, 0]);
const AXIS: Rgb<u8> = Rgb([40, 40, 40]);

/// Vertical bars for non-negative `values`, with an optional horizontal
/// reference line (e.g. a clearance or error threshold).
pub fn bar_chart(values: &[f64], reference: Option<f64>, path: impl AsRef<Path>) -> Result<()> {
    let (bar_w, gap, pad, height) = (18u32, 6u32, 10u32, 200u32);
    let width = pad * 2 + values.len().max(1) as u32 * (bar_w + gap);
    let top = values
        .iter()
        .copied()
        .chain(reference)
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let plot_h = (height - 2 * pad) as f64;
    let to_y = |v: f64| height - pad - ((v / top).clamp(0.0, 1.0) * plot_h).round() as u32;
    let mut img = RgbImage::from_pixel(width, height, WHITE);
    for (i, &v) in values.iter().enumerate() {
        let x0 = pad + i as u32 * (bar_w + gap);
        let y0 = if v.is_finite() { to_y(v.max(0.0)) } else { pad };
        for x in x0..x0 + bar_w {
            for y in y0..height - pad {
                img.put_pixel(x, y, BAR);
            }
        }
    }
    for x in pad / 2..width - pad / 2 {
        img.put_pixel(x, height - pad, AXIS);
    }
    if let Some(r) = reference {
        let y = to_y(r);
        for x in pad / 2..width - pad / 2 {
            img.put_pixel(x, y, LINE);
        }
    }
    img.save(path)?;
    Ok(())
}

/// x–z cross-section at column row `y`: grey where both grids are occupied,
/// red where only `pred` is, blue where only `truth` is. Each voxel is drawn
/// as a `scale`-pixel square with z pointing up.
pub fn slice_png(pred: &VoxelGrid, truth: &VoxelGrid, y: usize, scale: u32, path: impl AsRef<Path>) -> Result<()> {
    let n = truth.resolution();
    let side = n as u32 * scale;
    let mut img = RgbImage::from_pixel(side, side, WHITE);
    for x in 0..n {
        for z in 0..n {
            let color = match (pred.get(x, y, z), truth.get(x, y, z)) {
                (true, true) => Rgb([90, 90, 90]),
                (true, false) => Rgb([220, 50, 47]),
                (false, true) => Rgb([38, 139, 210]),
                (false, false) => continue,
            };
            let row = (n - 1 - z) as u32 * scale;
            for dx in 0..scale {
                for dz in 0..scale {
                    img.put_pixel(x as u32 * scale + dx, row + dz, color);
                }
            }
        }
    }
    img.save(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::GridSpec;

    #[test]
    fn writes_readable_pngs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bars.png");
        bar_chart(&[1.0, 0.5, 0.0], Some(0.75), &p).unwrap();
        let img = image::open(&p).unwrap().to_rgb8();
        assert_eq!(img.height(), 200);
        // tallest bar reaches the top margin
        assert_eq!(*img.get_pixel(15, 11), BAR);

        let spec = GridSpec::new(8, 0.1, [0.0; 3]).unwrap();
        let mut g = VoxelGrid::empty(spec).unwrap();
        g.set(1, 4, 0, true);
        let q = dir.path().join("slice.png");
        slice_png(&g, &VoxelGrid::empty(spec).unwrap(), 4, 2, &q).unwrap();
        let img = image::open(&q).unwrap().to_rgb8();
        assert_eq!(*img.get_pixel(2, 15), Rgb([220, 50, 47]));
    }
}
