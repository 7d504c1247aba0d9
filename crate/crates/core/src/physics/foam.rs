//! Winkler-foundation foam: settlement equals contact pressure divided by
//! the foundation modulus, confined to the contact footprint.

use serde::{Deserialize, Serialize};

use super::material::{MaterialKind, MaterialSpec};
use crate::error::{Error, Result};
use crate::voxel::HeightField;

/// Axis-aligned contact rectangle in world xy, meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Footprint {
    pub fn centered(cx: f64, cy: f64, size_x: f64, size_y: f64) -> Self {
        Footprint {
            x0: cx - size_x / 2.0,
            x1: cx + size_x / 2.0,
            y0: cy - size_y / 2.0,
            y1: cy + size_y / 2.0,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Euclidean distance from (x, y) to the rectangle; 0 inside.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let dx = (self.x0 - x).max(0.0).max(x - self.x1);
        let dy = (self.y0 - y).max(0.0).max(y - self.y1);
        dx.hypot(dy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressurePatch {
    /// Pa
    pub pressure: f64,
    pub footprint: Footprint,
}

impl PressurePatch {
    /// Spread `force` uniformly over `footprint`.
    pub fn from_force(force: f64, footprint: Footprint) -> Self {
        PressurePatch {
            pressure: force / footprint.area(),
            footprint,
        }
    }
}

/// Settlement field over the cells of `layout`: `z` holds the downward
/// displacement (m) at each cell center, `thickness` is zero. Inside the
/// footprint the settlement is exact; it tapers linearly to zero over
/// `taper` meters outside.
pub fn foam_indentation(
    material: &MaterialSpec,
    patch: &PressurePatch,
    layout: &HeightField,
    taper: f64,
) -> Result<HeightField> {
    if material.kind != MaterialKind::Foam {
        return Err(Error::NotFoam(material.kind.to_string()));
    }
    material.validate()?;
    let k = material.foundation_modulus.expect("validated foam");
    if !(patch.pressure >= 0.0 && patch.pressure.is_finite()) {
        return Err(Error::InvalidParameter("pressure must be finite and >= 0".into()));
    }
    let fp = patch.footprint;
    if !(fp.x1 > fp.x0 && fp.y1 > fp.y0) {
        return Err(Error::InvalidParameter("footprint must have positive area".into()));
    }
    if !(taper > 0.0) {
        return Err(Error::InvalidParameter("taper width must be positive".into()));
    }

    let w0 = patch.pressure / k;
    let mut z = vec![0.0; layout.nx * layout.ny];
    for iy in 0..layout.ny {
        let y = layout.origin[1] + (iy as f64 + 0.5) * layout.cell[1];
        for ix in 0..layout.nx {
            let x = layout.origin[0] + (ix as f64 + 0.5) * layout.cell[0];
            let d = fp.distance(x, y);
            z[layout.idx(ix, iy)] = w0 * (1.0 - d / taper).max(0.0);
        }
    }
    HeightField::new(
        layout.nx,
        layout.ny,
        layout.origin,
        layout.cell,
        z,
        vec![0.0; layout.nx * layout.ny],
    )
}

/// Lower the top surface of `base` by `settlement`, keeping the underside
/// fixed.
pub fn apply_settlement(base: &HeightField, settlement: &HeightField) -> Result<HeightField> {
    if base.nx != settlement.nx || base.ny != settlement.ny {
        return Err(Error::InvalidParameter("settlement layout differs from base".into()));
    }
    let mut out = base.clone();
    for c in 0..out.z.len() {
        let w = settlement.z[c].min(out.thickness[c]);
        out.z[c] -= w;
        out.thickness[c] -= w;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::GridSpec;

    fn layout() -> HeightField {
        let g = GridSpec::new(16, 0.022, [0.0; 3]).unwrap();
        HeightField::flat(&g, 0.2, 0.1)
    }

    fn patch(pressure: f64) -> PressurePatch {
        PressurePatch {
            pressure,
            footprint: Footprint::centered(0.176, 0.176, 0.088, 0.088),
        }
    }

    #[test]
    fn zero_pressure_gives_zero_field() {
        let w = foam_indentation(&MaterialSpec::foam(), &patch(0.0), &layout(), 0.022).unwrap();
        assert!(w.z.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interior_settlement_is_pressure_over_modulus() {
        let lay = layout();
        let w = foam_indentation(&MaterialSpec::foam(), &patch(2000.0), &lay, 0.022).unwrap();
        // cells 6..=9 have centers inside [0.132, 0.220]
        for i in 6..=9 {
            for j in 6..=9 {
                assert!((w.z[lay.idx(i, j)] - 0.02).abs() < 1e-15);
            }
        }
        // one cell out: center 0.011 m from the edge, half the taper
        assert!((w.z[lay.idx(5, 7)] - 0.01).abs() < 1e-12);
        // two cells out: beyond the taper
        assert_eq!(w.z[lay.idx(4, 7)], 0.0);
        assert_eq!(w.z[lay.idx(0, 0)], 0.0);
    }

    #[test]
    fn doubling_area_halves_settlement() {
        let lay = layout();
        let small = Footprint::centered(0.176, 0.176, 0.088, 0.088);
        let big = Footprint::centered(0.176, 0.176, 0.176, 0.088);
        let m = MaterialSpec::foam();
        let a = foam_indentation(&m, &PressurePatch::from_force(20.0, small), &lay, 0.022).unwrap();
        let b = foam_indentation(&m, &PressurePatch::from_force(20.0, big), &lay, 0.022).unwrap();
        let c = lay.idx(8, 8);
        assert!((a.z[c] - 2.0 * b.z[c]).abs() < 1e-12);
    }

    #[test]
    fn non_foam_is_rejected() {
        assert!(matches!(
            foam_indentation(&MaterialSpec::wood(), &patch(10.0), &layout(), 0.022),
            Err(Error::NotFoam(_))
        ));
    }

    #[test]
    fn settlement_keeps_the_underside() {
        let lay = layout();
        let w = foam_indentation(&MaterialSpec::foam(), &patch(2000.0), &lay, 0.022).unwrap();
        let d = apply_settlement(&lay, &w).unwrap();
        let c = lay.idx(8, 8);
        assert!((d.z[c] - 0.18).abs() < 1e-12);
        assert!((d.z[c] - d.thickness[c] - (lay.z[c] - lay.thickness[c])).abs() < 1e-12);
    }
}
