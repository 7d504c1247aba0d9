use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::beam::{beam_deflection, beam_deflection_fd, BeamSpec, LoadCase};
use super::foam::{apply_settlement, foam_indentation, Footprint, PressurePatch};
use super::material::{MaterialKind, MaterialSpec};
use crate::condition::{Condition, FORCE_BINS, LOCATION_BINS};
use crate::error::{Error, Result};
use crate::voxel::{depth_to_grid, render_depth, voxelize, GridSpec, HeightField, ViewDir, VoxelGrid};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;
/// Robot mass without payload, kg.
pub const ROBOT_MASS: f64 = 6.3;
/// Maximum payload, kg.
pub const PAYLOAD_MASS: f64 = 5.0;

/// Physical values behind each condition bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinTable {
    /// N, per force bin
    pub force_levels: [f64; FORCE_BINS],
    /// Fraction of the span (or window), per location bin
    pub location_fractions: [f64; LOCATION_BINS],
}

impl Default for BinTable {
    fn default() -> Self {
        let mut location_fractions = [0.0; LOCATION_BINS];
        for (i, f) in location_fractions.iter_mut().enumerate() {
            *f = (i + 1) as f64 / (LOCATION_BINS + 1) as f64;
        }
        BinTable {
            force_levels: [
                ROBOT_MASS * GRAVITY,
                (ROBOT_MASS + PAYLOAD_MASS) * GRAVITY,
            ],
            location_fractions,
        }
    }
}

impl BinTable {
    pub fn force_bin(&self, force: f64) -> usize {
        nearest(&self.force_levels, force)
    }

    pub fn location_bin(&self, fraction: f64) -> usize {
        nearest(&self.location_fractions, fraction)
    }

    pub fn load(&self, force_bin: usize, location_bin: usize) -> LoadCase {
        LoadCase::point(
            self.force_levels[force_bin],
            self.location_fractions[location_bin],
        )
    }
}

fn nearest(levels: &[f64], value: f64) -> usize {
    levels
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - value).abs().total_cmp(&(b.1 - value).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// A simply supported beam laid along x, centered in the grid, with its
/// undeformed top surface at `deck_top` (world z).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamScene {
    pub beam: BeamSpec,
    pub deck_top: f64,
}

impl BeamScene {
    /// Place the beam so its undeformed slab is centered on layer `layer`.
    pub fn on_layer(beam: BeamSpec, grid: &GridSpec, layer: usize) -> Self {
        BeamScene {
            beam,
            deck_top: grid.center(2, layer) + beam.thickness / 2.0,
        }
    }

    fn left_end(&self, grid: &GridSpec) -> f64 {
        grid.origin[0] + grid.extent() / 2.0 - self.beam.span / 2.0
    }

    fn surface(&self, grid: &GridSpec, load: Option<&LoadCase>) -> Result<HeightField> {
        self.beam.validate()?;
        for (axis, size) in [('x', self.beam.span), ('y', self.beam.width)] {
            if size > grid.extent() + 1e-9 {
                return Err(Error::ExtentOverflow {
                    axis,
                    detail: format!("{size} m beam in a {} m grid", grid.extent()),
                });
            }
        }
        let n = grid.resolution;
        let x_left = self.left_end(grid);
        let y_mid = grid.origin[1] + grid.extent() / 2.0;
        let half_w = self.beam.width / 2.0;
        let profile = match load {
            Some(l) if l.patch_width > 0.0 => Some(beam_deflection_fd(&self.beam, l, 801)?),
            _ => None,
        };
        let mut hf = HeightField::flat(grid, self.deck_top, 0.0);
        for j in 0..n {
            let yc = grid.center(1, j);
            if (yc - y_mid).abs() > half_w {
                continue;
            }
            for i in 0..n {
                let s = grid.center(0, i) - x_left;
                if !(0.0..=self.beam.span).contains(&s) {
                    continue;
                }
                let sag = match (load, &profile) {
                    (_, Some(p)) => p.at(s),
                    (Some(l), None) => beam_deflection(&self.beam, l, s)?,
                    (None, None) => 0.0,
                };
                let c = hf.idx(i, j);
                hf.z[c] = self.deck_top - sag;
                hf.thickness[c] = self.beam.thickness;
            }
        }
        Ok(hf)
    }

    /// Largest oracle deflection along the span, m.
    pub fn max_deflection(&self, load: &LoadCase) -> Result<f64> {
        load.validate()?;
        if load.patch_width > 0.0 {
            return Ok(beam_deflection_fd(&self.beam, load, 801)?.max());
        }
        self.beam.validate()?;
        let l = self.beam.span;
        let a = load.application_point * l;
        let b = a.min(l - a);
        Ok(load.force * b * (l * l - b * b).powf(1.5)
            / (9.0 * 3f64.sqrt() * l * self.beam.flexural_rigidity()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WheelKind {
    /// Driven side wheel.
    Side,
    Castor,
}

impl WheelKind {
    pub const ALL: [WheelKind; 2] = [WheelKind::Side, WheelKind::Castor];

    pub fn bin(self) -> usize {
        match self {
            WheelKind::Side => 0,
            WheelKind::Castor => 1,
        }
    }

    pub fn from_bin(bin: usize) -> Result<Self> {
        WheelKind::ALL
            .get(bin)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("no wheel for bin {bin}")))
    }
}

impl FromStr for WheelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "side" => Ok(WheelKind::Side),
            "castor" | "caster" => Ok(WheelKind::Castor),
            other => Err(Error::InvalidParameter(format!("unknown wheel '{other}'"))),
        }
    }
}

impl fmt::Display for WheelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WheelKind::Side => "side",
            WheelKind::Castor => "castor",
        })
    }
}

/// How one wheel presses on the ground.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WheelContact {
    pub kind: WheelKind,
    /// Fraction of the robot's total weight carried by this wheel.
    pub load_share: f64,
    /// Effective contact footprint (x, y), m.
    pub footprint: [f64; 2],
}

impl WheelContact {
    pub fn side() -> Self {
        WheelContact {
            kind: WheelKind::Side,
            load_share: 0.35,
            footprint: [0.12, 0.24],
        }
    }

    pub fn castor() -> Self {
        WheelContact {
            kind: WheelKind::Castor,
            load_share: 0.15,
            footprint: [0.08, 0.10],
        }
    }

    pub fn default_for(kind: WheelKind) -> Self {
        match kind {
            WheelKind::Side => Self::side(),
            WheelKind::Castor => Self::castor(),
        }
    }
}

/// A foam board filling the grid's xy window under one wheel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoamScene {
    pub material: MaterialSpec,
    pub thickness: f64,
    /// World z of the undeformed top surface.
    pub top: f64,
    pub contact: WheelContact,
}

impl FoamScene {
    pub fn on_layer(material: MaterialSpec, thickness: f64, contact: WheelContact, grid: &GridSpec, layer: usize) -> Self {
        FoamScene {
            material,
            thickness,
            top: grid.center(2, layer),
            contact,
        }
    }

    fn patch(&self, grid: &GridSpec, load: &LoadCase) -> PressurePatch {
        let cx = grid.origin[0] + load.application_point * grid.extent();
        let cy = grid.origin[1] + grid.extent() / 2.0;
        let fp = Footprint::centered(cx, cy, self.contact.footprint[0], self.contact.footprint[1]);
        PressurePatch::from_force(load.force * self.contact.load_share, fp)
    }

    fn surface(&self, grid: &GridSpec, load: Option<&LoadCase>) -> Result<HeightField> {
        if !(self.thickness > 0.0) {
            return Err(Error::InvalidParameter("foam thickness must be positive".into()));
        }
        let base = HeightField::flat(grid, self.top, self.thickness);
        let Some(load) = load else {
            return Ok(base);
        };
        load.validate()?;
        let w = foam_indentation(&self.material, &self.patch(grid, load), &base, grid.pitch)?;
        apply_settlement(&base, &w)
    }

    /// Settlement inside the footprint, m.
    pub fn max_settlement(&self, grid: &GridSpec, load: &LoadCase) -> Result<f64> {
        let k = self
            .material
            .foundation_modulus
            .ok_or_else(|| Error::NotFoam(self.material.kind.to_string()))?;
        Ok((self.patch(grid, load).pressure / k).min(self.thickness))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scene {
    Beam(BeamScene),
    Foam(FoamScene),
}

impl Scene {
    /// Solid surface, undeformed when `load` is `None`.
    pub fn surface(&self, grid: &GridSpec, load: Option<&LoadCase>) -> Result<HeightField> {
        match self {
            Scene::Beam(b) => b.surface(grid, load),
            Scene::Foam(f) => f.surface(grid, load),
        }
    }

    /// Material segment of the condition. Bridges use wood = 0 and
    /// aluminium = 1; on foam the segment selects the wheel contact.
    pub fn material_bin(&self) -> Result<usize> {
        match self {
            Scene::Beam(b) => match b.beam.material.kind {
                MaterialKind::Wood => Ok(0),
                MaterialKind::Aluminium => Ok(1),
                MaterialKind::Foam => Err(Error::InvalidParameter(
                    "foam is modelled as ground, not as a beam".into(),
                )),
            },
            Scene::Foam(f) => Ok(f.contact.kind.bin()),
        }
    }

    /// Oracle peak displacement (beam sag or foam settlement), m.
    pub fn peak_displacement(&self, grid: &GridSpec, load: &LoadCase) -> Result<f64> {
        match self {
            Scene::Beam(b) => b.max_deflection(load),
            Scene::Foam(f) => f.max_settlement(grid, load),
        }
    }
}

/// One training pair: the undeformed shell seen from a depth view, the
/// condition, and the deformed solid.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: VoxelGrid,
    pub condition: Condition,
    pub target: VoxelGrid,
}

pub fn generate_sample(
    scene: &Scene,
    load: &LoadCase,
    grid: &GridSpec,
    view: ViewDir,
    bins: &BinTable,
) -> Result<Sample> {
    load.validate()?;
    let rest = voxelize(&scene.surface(grid, None)?, grid)?;
    let input = depth_to_grid(&render_depth(&rest, view), grid)?;
    let target = voxelize(&scene.surface(grid, Some(load))?, grid)?;
    let condition = Condition::new(
        bins.force_bin(load.force),
        bins.location_bin(load.application_point),
        scene.material_bin()?,
    )?;
    Ok(Sample {
        input,
        condition,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::{lowest_in_slice, visible_shell};

    fn grid() -> GridSpec {
        GridSpec::new(64, 0.022, [0.0; 3]).unwrap()
    }

    /// Wood beam tuned to E·I = 100 N·m² over a 1 m span.
    fn benchmark() -> BeamScene {
        let beam = BeamSpec {
            span: 1.0,
            width: 0.1,
            thickness: 0.006,
            material: MaterialSpec {
                kind: MaterialKind::Wood,
                young_modulus: 100.0 / (0.1 * 0.006f64.powi(3) / 12.0),
                foundation_modulus: None,
            },
        };
        BeamScene::on_layer(beam, &grid(), 40)
    }

    #[test]
    fn default_bins() {
        let b = BinTable::default();
        assert!((b.force_levels[0] - 61.803).abs() < 1e-9);
        assert!((b.force_levels[1] - 110.853).abs() < 1e-9);
        assert_eq!(b.location_fractions[0], 0.125);
        assert_eq!(b.location_fractions[3], 0.5);
        assert_eq!(b.force_bin(0.0), 0);
        assert_eq!(b.force_bin(100.0), 1);
    }

    #[test]
    fn peak_formula_matches_dense_sampling() {
        let s = benchmark();
        for a in [0.2, 0.5, 0.8] {
            let load = LoadCase::point(100.0, a);
            let dense = (0..=20000)
                .map(|i| beam_deflection(&s.beam, &load, i as f64 / 20000.0).unwrap())
                .fold(0.0, f64::max);
            assert!((s.max_deflection(&load).unwrap() - dense).abs() < 1e-9);
        }
        let mid = s.max_deflection(&LoadCase::point(100.0, 0.5)).unwrap();
        assert!((mid - 100.0 / 4800.0).abs() < 1e-12);
    }

    #[test]
    fn zero_force_target_is_the_rest_shape() {
        let g = grid();
        let scene = Scene::Beam(benchmark());
        let s = generate_sample(&scene, &LoadCase::point(0.0, 0.5), &g, ViewDir::PosY, &BinTable::default()).unwrap();
        let rest = voxelize(&scene.surface(&g, None).unwrap(), &g).unwrap();
        assert_eq!(s.target, rest);
        assert_eq!(s.input, visible_shell(&rest, ViewDir::PosY));
    }

    #[test]
    fn midspan_benchmark_sags_one_voxel() {
        let g = grid();
        let scene = Scene::Beam(benchmark());
        let s = generate_sample(&scene, &LoadCase::point(100.0, 0.5), &g, ViewDir::PosY, &BinTable::default()).unwrap();
        assert_eq!(s.condition, Condition::new(1, 3, 0).unwrap());
        let rest = lowest_in_slice(&s.input, 31).unwrap();
        let bent = lowest_in_slice(&s.target, 31).unwrap();
        assert_eq!(rest - bent, 1);
        // ends stay on their layer
        let first = (0..64).find(|&x| lowest_in_slice(&s.target, x).is_some()).unwrap();
        assert_eq!(lowest_in_slice(&s.target, first), Some(40));
    }

    #[test]
    fn generation_is_deterministic() {
        let g = grid();
        let scene = Scene::Beam(benchmark());
        let load = LoadCase::point(80.0, 0.3);
        let a = generate_sample(&scene, &load, &g, ViewDir::PosY, &BinTable::default()).unwrap();
        let b = generate_sample(&scene, &load, &g, ViewDir::PosY, &BinTable::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_beam_is_rejected() {
        let g = GridSpec::new(16, 0.022, [0.0; 3]).unwrap();
        let mut b = benchmark();
        b.deck_top = 0.2;
        assert!(matches!(
            generate_sample(&Scene::Beam(b), &LoadCase::point(1.0, 0.5), &g, ViewDir::PosY, &BinTable::default()),
            Err(Error::ExtentOverflow { axis: 'x', .. })
        ));
        b.beam.span = 0.3;
        b.deck_top = 0.5;
        assert!(matches!(
            generate_sample(&Scene::Beam(b), &LoadCase::point(1.0, 0.5), &g, ViewDir::PosY, &BinTable::default()),
            Err(Error::ExtentOverflow { axis: 'z', .. })
        ));
    }

    #[test]
    fn castor_with_payload_settles_more_than_side_wheel() {
        let g = GridSpec::new(32, 0.011, [0.0; 3]).unwrap();
        let bins = BinTable::default();
        let load = bins.load(1, 3);
        let side = FoamScene::on_layer(MaterialSpec::foam(), 0.088, WheelContact::side(), &g, 20);
        let castor = FoamScene::on_layer(MaterialSpec::foam(), 0.088, WheelContact::castor(), &g, 20);
        let ws = side.max_settlement(&g, &load).unwrap();
        let wc = castor.max_settlement(&g, &load).unwrap();
        assert!(wc > 0.015 && ws < 0.015, "side {ws}, castor {wc}");
        let s = generate_sample(&Scene::Foam(castor), &load, &g, ViewDir::NegZ, &bins).unwrap();
        assert_eq!(s.condition.material_bin, 1);
        assert_eq!(s.target.highest_in_column(16, 16), Some(18));
        assert_eq!(s.input.highest_in_column(16, 16), Some(20));
    }
}
