//! Scene-family enumeration and the binary dataset container.
//!
//! File layout (little-endian): `"DEFO"`, version u16, N u16, pitch f32,
//! sample count u32, condition widths u8×3; then per sample the three
//! condition indices (u8 each), the packed input grid and the packed
//! target grid.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::beam::{BeamSpec, LoadCase};
use super::material::{MaterialKind, MaterialSpec};
use super::scene::{generate_sample, BeamScene, BinTable, FoamScene, Sample, Scene, WheelContact, WheelKind};
use crate::condition::{Condition, FORCE_BINS, LOCATION_BINS, MATERIAL_BINS};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::voxel::pack::{pack_bits, packed_len, unpack_bits};
use crate::voxel::{GridSpec, ViewDir, DEFAULT_PITCH};

const DATASET_MAGIC: &[u8; 4] = b"DEFO";
const DATASET_VERSION: u16 = 1;
const DATASET_HEADER_LEN: usize = 19;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Beam,
    Foam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// Configured spans minus the held-out ones.
    Train,
    /// Only the held-out spans.
    Holdout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub family: Family,
    pub grid: usize,
    pub pitch: f64,
    pub view: ViewDir,
    pub split: Split,
    pub spans: Vec<f64>,
    pub holdout_spans: Vec<f64>,
    pub width: f64,
    pub thickness: f64,
    pub materials: Vec<MaterialKind>,
    pub wood_modulus: f64,
    pub aluminium_modulus: f64,
    pub foam_foundation_modulus: f64,
    pub wheels: Vec<WheelKind>,
    pub force_bins: Vec<usize>,
    pub location_bins: Vec<usize>,
    pub bins: BinTable,
    /// Layer the undeformed deck (or foam top) is centered on.
    pub deck_layer: usize,
    pub foam_thickness: f64,
    /// 0 keeps every enumerated sample; otherwise a seeded subset.
    pub count: usize,
}

const KNOWN_KEYS: &[&str] = &[
    "family",
    "grid",
    "pitch",
    "view",
    "split",
    "spans",
    "holdout_spans",
    "width",
    "thickness",
    "materials",
    "wood_modulus",
    "aluminium_modulus",
    "foam_foundation_modulus",
    "wheels",
    "force_bins",
    "location_bins",
    "force_levels",
    "deck_layer",
    "foam_thickness",
    "count",
];

impl DatasetConfig {
    pub fn beam(grid: usize, pitch: f64, spans: Vec<f64>) -> Self {
        DatasetConfig {
            family: Family::Beam,
            grid,
            pitch,
            view: ViewDir::PosY,
            split: Split::Train,
            spans,
            holdout_spans: Vec::new(),
            width: 0.15,
            thickness: 0.006,
            materials: vec![MaterialKind::Wood, MaterialKind::Aluminium],
            wood_modulus: super::material::PLYWOOD_MODULUS,
            aluminium_modulus: super::material::ALUMINIUM_MODULUS,
            foam_foundation_modulus: super::material::FOAM_FOUNDATION_MODULUS,
            wheels: WheelKind::ALL.to_vec(),
            force_bins: (0..FORCE_BINS).collect(),
            location_bins: vec![3],
            bins: BinTable::default(),
            deck_layer: grid * 3 / 4,
            foam_thickness: 8.0 * pitch,
            count: 0,
        }
    }

    pub fn foam(grid: usize, pitch: f64) -> Self {
        DatasetConfig {
            family: Family::Foam,
            view: ViewDir::NegZ,
            materials: vec![MaterialKind::Foam],
            deck_layer: grid * 5 / 8,
            ..Self::beam(grid, pitch, Vec::new())
        }
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.reject_unknown(KNOWN_KEYS)?;
        let family = match kv.raw("family").unwrap_or("beam") {
            "beam" => Family::Beam,
            "foam" => Family::Foam,
            other => return Err(Error::Config(format!("unknown family '{other}'"))),
        };
        let grid = kv.get_or("grid", 64usize)?;
        let pitch = kv.get_or("pitch", DEFAULT_PITCH)?;
        let mut c = match family {
            Family::Beam => Self::beam(grid, pitch, vec![0.6]),
            Family::Foam => Self::foam(grid, pitch),
        };
        if let Some(v) = kv.get::<ViewDir>("view")? {
            c.view = v;
        }
        c.split = match kv.raw("split").unwrap_or("train") {
            "train" => Split::Train,
            "holdout" => Split::Holdout,
            other => return Err(Error::Config(format!("unknown split '{other}'"))),
        };
        if let Some(v) = kv.list("spans")? {
            c.spans = v;
        }
        if let Some(v) = kv.list("holdout_spans")? {
            c.holdout_spans = v;
        }
        c.width = kv.get_or("width", c.width)?;
        c.thickness = kv.get_or("thickness", c.thickness)?;
        if let Some(v) = kv.list("materials")? {
            c.materials = v;
        }
        c.wood_modulus = kv.get_or("wood_modulus", c.wood_modulus)?;
        c.aluminium_modulus = kv.get_or("aluminium_modulus", c.aluminium_modulus)?;
        c.foam_foundation_modulus = kv.get_or("foam_foundation_modulus", c.foam_foundation_modulus)?;
        if let Some(v) = kv.list("wheels")? {
            c.wheels = v;
        }
        if let Some(v) = kv.list("force_bins")? {
            c.force_bins = v;
        }
        if let Some(v) = kv.list("location_bins")? {
            c.location_bins = v;
        }
        if let Some(v) = kv.list::<f64>("force_levels")? {
            c.bins.force_levels = v.try_into().map_err(|_| {
                Error::Config(format!("force_levels needs exactly {FORCE_BINS} values"))
            })?;
        }
        c.deck_layer = kv.get_or("deck_layer", c.deck_layer)?;
        c.foam_thickness = kv.get_or("foam_thickness", c.foam_thickness)?;
        c.count = kv.get_or("count", 0usize)?;
        c.validate()?;
        Ok(c)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid, self.pitch, [0.0; 3])
    }

    /// Spans actually enumerated for the configured split.
    pub fn active_spans(&self) -> Vec<f64> {
        let held = |s: &f64| self.holdout_spans.iter().any(|h| (h - s).abs() < 1e-9);
        match self.split {
            Split::Train => self.spans.iter().copied().filter(|s| !held(s)).collect(),
            Split::Holdout => self.holdout_spans.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        if self.force_bins.is_empty() || self.force_bins.iter().any(|&b| b >= FORCE_BINS) {
            return Err(Error::InvalidParameter(format!(
                "force bins must be a non-empty subset of 0..{FORCE_BINS}"
            )));
        }
        if self.location_bins.is_empty() || self.location_bins.iter().any(|&b| b >= LOCATION_BINS) {
            return Err(Error::InvalidParameter(format!(
                "location bins must be a non-empty subset of 0..{LOCATION_BINS}"
            )));
        }
        if self.deck_layer >= self.grid {
            return Err(Error::InvalidParameter("deck layer lies outside the grid".into()));
        }
        match self.family {
            Family::Beam => {
                if self.active_spans().is_empty() {
                    return Err(Error::InvalidParameter("no spans to enumerate".into()));
                }
                if self.materials.is_empty() || self.materials.contains(&MaterialKind::Foam) {
                    return Err(Error::InvalidParameter(
                        "beam materials must be wood and/or aluminium".into(),
                    ));
                }
            }
            Family::Foam => {
                if self.wheels.is_empty() {
                    return Err(Error::InvalidParameter("no wheels to enumerate".into()));
                }
            }
        }
        Ok(())
    }

    fn material(&self, kind: MaterialKind) -> MaterialSpec {
        let mut m = MaterialSpec::default_for(kind);
        match kind {
            MaterialKind::Wood => m.young_modulus = self.wood_modulus,
            MaterialKind::Aluminium => m.young_modulus = self.aluminium_modulus,
            MaterialKind::Foam => m.foundation_modulus = Some(self.foam_foundation_modulus),
        }
        m
    }

    /// Every (scene, load) pair of the family, in file order.
    pub fn enumerate(&self) -> Result<Vec<(Scene, LoadCase, SampleMeta)>> {
        self.validate()?;
        let grid = self.grid_spec()?;
        let mut out = Vec::new();
        let mut push = |scene: Scene, fb: usize, lb: usize, span: Option<f64>, wheel: Option<WheelKind>, material: MaterialKind| -> Result<()> {
            let load = self.bins.load(fb, lb);
            let condition = Condition::new(fb, lb, scene.material_bin()?)?;
            let meta = SampleMeta {
                index: out.len(),
                span,
                material,
                wheel,
                force: load.force,
                application_point: load.application_point,
                condition,
                peak_displacement: scene.peak_displacement(&grid, &load)?,
            };
            out.push((scene, load, meta));
            Ok(())
        };
        match self.family {
            Family::Beam => {
                for span in self.active_spans() {
                    for &fb in &self.force_bins {
                        for &lb in &self.location_bins {
                            for &kind in &self.materials {
                                let beam = BeamSpec {
                                    span,
                                    width: self.width,
                                    thickness: self.thickness,
                                    material: self.material(kind),
                                };
                                let scene = Scene::Beam(BeamScene::on_layer(beam, &grid, self.deck_layer));
                                push(scene, fb, lb, Some(span), None, kind)?;
                            }
                        }
                    }
                }
            }
            Family::Foam => {
                for &wheel in &self.wheels {
                    for &fb in &self.force_bins {
                        for &lb in &self.location_bins {
                            let scene = Scene::Foam(FoamScene::on_layer(
                                self.material(MaterialKind::Foam),
                                self.foam_thickness,
                                WheelContact::default_for(wheel),
                                &grid,
                                self.deck_layer,
                            ));
                            push(scene, fb, lb, None, Some(wheel), MaterialKind::Foam)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Human-readable description of one generated sample, written next to
/// the dataset as JSON lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub index: usize,
    pub span: Option<f64>,
    pub material: MaterialKind,
    pub wheel: Option<WheelKind>,
    /// N
    pub force: f64,
    pub application_point: f64,
    pub condition: Condition,
    /// Oracle beam sag or foam settlement, m.
    pub peak_displacement: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub grid: GridSpec,
    pub samples: Vec<Sample>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedDataset {
    pub dataset: Dataset,
    pub meta: Vec<SampleMeta>,
}

pub fn generate_dataset(config: &DatasetConfig, seed: u64) -> Result<GeneratedDataset> {
    let grid = config.grid_spec()?;
    let mut cases = config.enumerate()?;
    if config.count > 0 {
        if config.count > cases.len() {
            return Err(Error::InvalidParameter(format!(
                "count {} exceeds the {} enumerated samples",
                config.count,
                cases.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep: Vec<usize> = (0..cases.len()).collect();
        keep.shuffle(&mut rng);
        keep.truncate(config.count);
        keep.sort_unstable();
        let mut picked = Vec::with_capacity(keep.len());
        let mut all: Vec<Option<_>> = cases.into_iter().map(Some).collect();
        for i in keep {
            picked.push(all[i].take().expect("indices are unique"));
        }
        cases = picked;
    }
    let mut samples = Vec::with_capacity(cases.len());
    let mut meta = Vec::with_capacity(cases.len());
    for (i, (scene, load, mut m)) in cases.into_iter().enumerate() {
        samples.push(generate_sample(&scene, &load, &grid, config.view, &config.bins)?);
        m.index = i;
        meta.push(m);
    }
    Ok(GeneratedDataset {
        dataset: Dataset { grid, samples },
        meta,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        let mut header = Vec::with_capacity(DATASET_HEADER_LEN);
        header.extend_from_slice(DATASET_MAGIC);
        header.extend_from_slice(&DATASET_VERSION.to_le_bytes());
        header.extend_from_slice(&(self.grid.resolution as u16).to_le_bytes());
        header.extend_from_slice(&(self.grid.pitch as f32).to_le_bytes());
        header.extend_from_slice(&(self.samples.len() as u32).to_le_bytes());
        header.extend_from_slice(&[FORCE_BINS as u8, LOCATION_BINS as u8, MATERIAL_BINS as u8]);
        w.write_all(&header)?;
        for s in &self.samples {
            self.grid.ensure_compatible(s.input.spec())?;
            self.grid.ensure_compatible(s.target.spec())?;
            w.write_all(&s.condition.to_bytes())?;
            w.write_all(&pack_bits(&s.input))?;
            w.write_all(&pack_bits(&s.target))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut header = [0u8; DATASET_HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|e| Error::corrupt("dataset", format!("short header: {e}")))?;
        if &header[0..4] != DATASET_MAGIC {
            return Err(Error::corrupt("dataset", "bad magic"));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != DATASET_VERSION {
            return Err(Error::corrupt("dataset", format!("unsupported version {version}")));
        }
        let n = u16::from_le_bytes([header[6], header[7]]) as usize;
        let pitch = f32::from_le_bytes(header[8..12].try_into().unwrap()) as f64;
        let count = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        if header[16..19] != [FORCE_BINS as u8, LOCATION_BINS as u8, MATERIAL_BINS as u8] {
            return Err(Error::corrupt(
                "dataset",
                format!("condition widths {:?} unsupported", &header[16..19]),
            ));
        }
        let grid = GridSpec::new(n, pitch, [0.0; 3])?;
        let plen = packed_len(n);
        let mut buf = vec![0u8; 3 + 2 * plen];
        let mut samples = Vec::with_capacity(count);
        for i in 0..count {
            r.read_exact(&mut buf)
                .map_err(|e| Error::corrupt("dataset", format!("sample {i}: {e}")))?;
            samples.push(Sample {
                condition: Condition::from_bytes([buf[0], buf[1], buf[2]])?,
                input: unpack_bits(grid, &buf[3..3 + plen])?,
                target: unpack_bits(grid, &buf[3 + plen..])?,
            });
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::corrupt("dataset", "trailing bytes after last sample"));
        }
        Ok(Dataset { grid, samples })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}

/// Sidecar path holding the per-sample metadata of a dataset file.
pub fn meta_path(dataset: &Path) -> PathBuf {
    let mut s = dataset.as_os_str().to_owned();
    s.push(".meta.jsonl");
    PathBuf::from(s)
}

pub fn write_meta(path: &Path, meta: &[SampleMeta]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for m in meta {
        serde_json::to_writer(&mut w, m)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_meta(path: &Path) -> Result<Vec<SampleMeta>> {
    let r = BufReader::new(File::open(path)?);
    r.lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}
