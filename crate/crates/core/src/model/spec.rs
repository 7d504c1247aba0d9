use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::condition::CONDITION_DIM;
use crate::error::{Error, Result};

fn check_resolution(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "resolution {n} must be a power of two >= 8"
        )));
    }
    Ok(())
}

/// Number of conv+pool (generator) or stride-2 (critic) stages at resolution `n`.
pub fn stage_count(n: usize) -> usize {
    if n >= 64 {
        5
    } else {
        n.trailing_zeros() as usize - 1
    }
}

/// Channel widths at N=64, scaled by N/64 below that.
fn scaled(base: &[usize], n: usize) -> Vec<usize> {
    let stages = stage_count(n);
    base.iter()
        .take(stages)
        .map(|&c| if n >= 64 { c } else { (c * n / 64).max(1) })
        .collect()
}

fn spec_hash<T: Serialize>(spec: &T) -> u64 {
    let text = serde_json::to_vec(spec).expect("spec serializes");
    let digest = Sha256::digest(&text);
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub resolution: usize,
    pub encoder_channels: Vec<usize>,
    pub latent_dim: usize,
    pub fc_hidden: usize,
    pub condition_dim: usize,
}

impl GeneratorSpec {
    pub fn default_for(resolution: usize) -> Result<Self> {
        check_resolution(resolution)?;
        let scale = |c: usize| if resolution >= 64 { c } else { c * resolution / 64 };
        Ok(GeneratorSpec {
            resolution,
            encoder_channels: scaled(&[64, 128, 256, 512, 512], resolution),
            latent_dim: scale(512),
            fc_hidden: scale(2048),
            condition_dim: CONDITION_DIM,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_resolution(self.resolution)?;
        let stages = stage_count(self.resolution);
        if self.encoder_channels.len() != stages {
            return Err(Error::InvalidParameter(format!(
                "generator at N={} needs {stages} encoder stages, got {}",
                self.resolution,
                self.encoder_channels.len()
            )));
        }
        if self.encoder_channels.contains(&0) || self.latent_dim == 0 || self.fc_hidden == 0 {
            return Err(Error::InvalidParameter(
                "generator widths must be positive".into(),
            ));
        }
        if self.condition_dim != CONDITION_DIM {
            return Err(Error::InvalidParameter(format!(
                "condition_dim must be {CONDITION_DIM}"
            )));
        }
        Ok(())
    }

    pub fn stages(&self) -> usize {
        self.encoder_channels.len()
    }

    /// Spatial size after each pooling stage.
    pub fn encoder_sizes(&self) -> Vec<usize> {
        (1..=self.stages()).map(|k| self.resolution >> k).collect()
    }

    pub fn bottleneck_side(&self) -> usize {
        self.resolution >> self.stages()
    }

    pub fn flat_len(&self) -> usize {
        self.encoder_channels[self.stages() - 1] * self.bottleneck_side().pow(3)
    }

    /// Output channels of decoder stage `j`.
    pub fn decoder_out(&self, j: usize) -> usize {
        let s = self.stages();
        if j + 1 == s {
            1
        } else {
            self.encoder_channels[s - 2 - j]
        }
    }

    /// Input channels of decoder stage `j`, including the concatenated skip.
    pub fn decoder_in(&self, j: usize) -> usize {
        let s = self.stages();
        if j == 0 {
            self.encoder_channels[s - 1]
        } else {
            self.decoder_out(j - 1) + self.encoder_channels[s - j]
        }
    }

    pub fn hash(&self) -> u64 {
        spec_hash(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticOutput {
    /// Unbounded score, required by the Wasserstein objective.
    Linear,
    /// Score squashed to (0, 1); kept for ablation only.
    Sigmoid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    pub resolution: usize,
    pub channels: Vec<usize>,
    /// 1-based index of the conv layer whose input receives the masks.
    pub condition_inject_layer: usize,
    pub mask_spatial: usize,
    pub condition_dim: usize,
    pub output: CriticOutput,
}

impl DiscriminatorSpec {
    pub fn default_for(resolution: usize) -> Result<Self> {
        check_resolution(resolution)?;
        let mut channels = scaled(&[64, 128, 256, 512], resolution);
        channels.truncate(stage_count(resolution) - 1);
        channels.push(1);
        Ok(DiscriminatorSpec {
            resolution,
            channels,
            condition_inject_layer: 2,
            mask_spatial: resolution / 2,
            condition_dim: CONDITION_DIM,
            output: CriticOutput::Linear,
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_resolution(self.resolution)?;
        let layers = self.channels.len();
        if layers == 0 || self.resolution >> layers == 0 {
            return Err(Error::InvalidParameter(format!(
                "{layers} stride-2 layers do not fit N={}",
                self.resolution
            )));
        }
        if self.channels[layers - 1] != 1 || self.channels.contains(&0) {
            return Err(Error::InvalidParameter(
                "critic widths must be positive and end in one channel".into(),
            ));
        }
        if self.condition_inject_layer == 0 || self.condition_inject_layer > layers {
            return Err(Error::InvalidParameter(format!(
                "condition_inject_layer {} outside 1..={layers}",
                self.condition_inject_layer
            )));
        }
        let expected = self.resolution >> (self.condition_inject_layer - 1);
        if self.mask_spatial != expected {
            return Err(Error::InvalidParameter(format!(
                "mask_spatial {} does not match layer input size {expected}",
                self.mask_spatial
            )));
        }
        if self.condition_dim != CONDITION_DIM {
            return Err(Error::InvalidParameter(format!(
                "condition_dim must be {CONDITION_DIM}"
            )));
        }
        Ok(())
    }

    pub fn layers(&self) -> usize {
        self.channels.len()
    }

    /// Input channels of conv layer `l` (0-based).
    pub fn layer_in(&self, l: usize) -> usize {
        let base = if l == 0 { 1 } else { self.channels[l - 1] };
        if l + 1 == self.condition_inject_layer {
            base + self.condition_dim
        } else {
            base
        }
    }

    /// Spatial size after each stride-2 layer.
    pub fn sizes(&self) -> Vec<usize> {
        (1..=self.layers()).map(|k| self.resolution >> k).collect()
    }

    pub fn hash(&self) -> u64 {
        spec_hash(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_channel_tables() {
        let g64 = GeneratorSpec::default_for(64).unwrap();
        assert_eq!(g64.encoder_channels, vec![64, 128, 256, 512, 512]);
        assert_eq!((g64.latent_dim, g64.fc_hidden), (512, 2048));
        let g32 = GeneratorSpec::default_for(32).unwrap();
        assert_eq!(g32.encoder_channels, vec![32, 64, 128, 256]);
        let g16 = GeneratorSpec::default_for(16).unwrap();
        assert_eq!(g16.encoder_channels, vec![16, 32, 64]);
        assert_eq!(g16.bottleneck_side(), 2);
        assert_eq!(
            DiscriminatorSpec::default_for(64).unwrap().channels,
            vec![64, 128, 256, 512, 1]
        );
        assert_eq!(DiscriminatorSpec::default_for(32).unwrap().channels, vec![32, 64, 128, 1]);
        assert_eq!(DiscriminatorSpec::default_for(16).unwrap().channels, vec![16, 32, 1]);
    }

    #[test]
    fn size_chains() {
        assert_eq!(GeneratorSpec::default_for(64).unwrap().encoder_sizes(), vec![32, 16, 8, 4, 2]);
        assert_eq!(GeneratorSpec::default_for(16).unwrap().encoder_sizes(), vec![8, 4, 2]);
        assert_eq!(DiscriminatorSpec::default_for(64).unwrap().sizes(), vec![32, 16, 8, 4, 2]);
        assert_eq!(DiscriminatorSpec::default_for(32).unwrap().sizes(), vec![16, 8, 4, 2]);
    }

    #[test]
    fn decoder_channel_plan_at_64() {
        let g = GeneratorSpec::default_for(64).unwrap();
        let ins: Vec<_> = (0..5).map(|j| g.decoder_in(j)).collect();
        let outs: Vec<_> = (0..5).map(|j| g.decoder_out(j)).collect();
        assert_eq!(ins, vec![512, 1024, 768, 384, 192]);
        assert_eq!(outs, vec![512, 256, 128, 64, 1]);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut g = GeneratorSpec::default_for(16).unwrap();
        g.encoder_channels.push(8);
        assert!(g.validate().is_err());
        let mut d = DiscriminatorSpec::default_for(16).unwrap();
        d.mask_spatial = 4;
        assert!(d.validate().is_err());
        assert!(GeneratorSpec::default_for(12).is_err());
    }

    #[test]
    fn hash_depends_on_resolution() {
        let a = GeneratorSpec::default_for(16).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.resolution = 32;
        assert_ne!(a.hash(), b.hash());
    }
}
