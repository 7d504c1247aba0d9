//! The (force, location, material) condition in its two encodings: the
//! flat one-hot vector fed to the generator's latent code, and the
//! spatially constant block masks fed to the critic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORCE_BINS: usize = 2;
pub const LOCATION_BINS: usize = 7;
pub const MATERIAL_BINS: usize = 2;
/// Length of the one-hot vector: force | location | material.
pub const CONDITION_DIM: usize = FORCE_BINS + LOCATION_BINS + MATERIAL_BINS;

const SEGMENTS: [(&str, usize, usize); 3] = [
    ("force", 0, FORCE_BINS),
    ("location", FORCE_BINS, LOCATION_BINS),
    ("material", FORCE_BINS + LOCATION_BINS, MATERIAL_BINS),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub force_bin: usize,
    pub location_bin: usize,
    pub material_bin: usize,
}

impl Condition {
    pub fn new(force_bin: usize, location_bin: usize, material_bin: usize) -> Result<Self> {
        let c = Condition {
            force_bin,
            location_bin,
            material_bin,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("force", self.force_bin, FORCE_BINS),
            ("location", self.location_bin, LOCATION_BINS),
            ("material", self.material_bin, MATERIAL_BINS),
        ];
        for (field, value, width) in fields {
            if value >= width {
                return Err(Error::ConditionRange {
                    field,
                    value,
                    width,
                });
            }
        }
        Ok(())
    }

    /// Every valid condition, in lexicographic (force, location, material) order.
    pub fn all() -> impl Iterator<Item = Condition> {
        (0..FORCE_BINS).flat_map(|f| {
            (0..LOCATION_BINS).flat_map(move |l| {
                (0..MATERIAL_BINS).map(move |m| Condition {
                    force_bin: f,
                    location_bin: l,
                    material_bin: m,
                })
            })
        })
    }

    pub fn to_bytes(self) -> [u8; 3] {
        [
            self.force_bin as u8,
            self.location_bin as u8,
            self.material_bin as u8,
        ]
    }

    pub fn from_bytes(b: [u8; 3]) -> Result<Self> {
        Condition::new(b[0] as usize, b[1] as usize, b[2] as usize)
    }
}

pub fn encode_vector(c: &Condition) -> Result<[f32; CONDITION_DIM]> {
    c.validate()?;
    let mut v = [0.0; CONDITION_DIM];
    v[c.force_bin] = 1.0;
    v[FORCE_BINS + c.location_bin] = 1.0;
    v[FORCE_BINS + LOCATION_BINS + c.material_bin] = 1.0;
    Ok(v)
}

pub fn decode_vector(v: &[f32]) -> Result<Condition> {
    if v.len() != CONDITION_DIM {
        return Err(Error::InvalidParameter(format!(
            "condition vector has length {}, expected {CONDITION_DIM}",
            v.len()
        )));
    }
    let mut idx = [0usize; 3];
    for (slot, (segment, start, width)) in SEGMENTS.into_iter().enumerate() {
        let seg = &v[start..start + width];
        if seg.iter().any(|&b| b != 0.0 && b != 1.0) {
            return Err(Error::MalformedSegment { segment });
        }
        let mut ones = seg.iter().enumerate().filter(|(_, &b)| b == 1.0);
        match (ones.next(), ones.next()) {
            (Some((i, _)), None) => idx[slot] = i,
            _ => return Err(Error::MalformedSegment { segment }),
        }
    }
    Condition::new(idx[0], idx[1], idx[2])
}

/// Spatially constant block masks, `CONDITION_DIM` channels of
/// `spatial³` values laid out channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMasks {
    pub spatial: usize,
    pub data: Vec<f32>,
}

impl BlockMasks {
    pub fn channel(&self, i: usize) -> &[f32] {
        let vol = self.spatial.pow(3);
        &self.data[i * vol..(i + 1) * vol]
    }
}

pub fn encode_block_masks(c: &Condition, spatial: usize) -> Result<BlockMasks> {
    if spatial == 0 {
        return Err(Error::InvalidParameter("mask size must be positive".into()));
    }
    let v = encode_vector(c)?;
    let vol = spatial.pow(3);
    let mut data = Vec::with_capacity(CONDITION_DIM * vol);
    for bit in v {
        data.extend(std::iter::repeat_n(bit, vol));
    }
    Ok(BlockMasks { spatial, data })
}
