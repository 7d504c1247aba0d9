//! Generator and critic networks plus their checkpoint container.

mod checkpoint;
mod critic;
mod generator;
mod spec;

pub use checkpoint::Checkpoint;
pub use critic::{Critic, CriticTrace};
pub use generator::{Generator, GeneratorTrace};
pub use spec::{stage_count, CriticOutput, DiscriminatorSpec, GeneratorSpec};

use crate::condition::{encode_block_masks, encode_vector, Condition, CONDITION_DIM};
use crate::error::Result;
use crate::nn::Tensor;
use crate::voxel::VoxelGrid;

/// Stacks condition vectors into a `[B, 11]` tensor.
pub fn condition_tensor(conds: &[Condition]) -> Result<Tensor> {
    let mut data = Vec::with_capacity(conds.len() * CONDITION_DIM);
    for c in conds {
        data.extend(encode_vector(c)?);
    }
    Tensor::from_vec(&[conds.len(), CONDITION_DIM], data)
}

/// Stacks block masks into a `[B, 11, m, m, m]` tensor.
pub fn mask_tensor(conds: &[Condition], spatial: usize) -> Result<Tensor> {
    let mut data = Vec::with_capacity(conds.len() * CONDITION_DIM * spatial.pow(3));
    for c in conds {
        data.extend(encode_block_masks(c, spatial)?.data);
    }
    Tensor::from_vec(&[conds.len(), CONDITION_DIM, spatial, spatial, spatial], data)
}

/// Stacks occupancy grids into a `[B, 1, N, N, N]` tensor.
pub fn grid_tensor<'a>(grids: impl IntoIterator<Item = &'a VoxelGrid>) -> Result<Tensor> {
    let mut data = Vec::new();
    let mut b = 0;
    let mut n = 0;
    for g in grids {
        n = g.resolution();
        data.extend(g.to_f32());
        b += 1;
    }
    Tensor::from_vec(&[b, 1, n, n, n], data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Module;

    #[test]
    fn parameter_count_goldens() {
        let cases = [(64, 88_130_433, 11_137_985), (32, 11_558_849, 710_881), (16, 1_060_129, 58_417)];
        for (n, gen, critic) in cases {
            let g = Generator::new(GeneratorSpec::default_for(n).unwrap(), 0).unwrap();
            let c = Critic::new(DiscriminatorSpec::default_for(n).unwrap(), 0).unwrap();
            assert_eq!(g.param_count(), gen, "generator N={n}");
            assert_eq!(c.param_count(), critic, "critic N={n}");
        }
    }

    #[test]
    fn stacking_helpers_shape_batches() {
        let conds = [Condition::new(0, 1, 1).unwrap(), Condition::new(1, 6, 0).unwrap()];
        assert_eq!(condition_tensor(&conds).unwrap().shape(), &[2, 11]);
        let m = mask_tensor(&conds, 4).unwrap();
        assert_eq!(m.shape(), &[2, 11, 4, 4, 4]);
        assert_eq!(m.item(1)[64 * 10], 0.0);
        assert_eq!(m.item(1)[64], 1.0);
    }
}
