use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CriticOutput, DiscriminatorSpec};
use crate::error::{Error, Result};
use crate::nn::{relu, relu_backward, sigmoid_scalar, Conv3d, Grads, Module, Param, Tensor};

/// Stride-2 convolutional critic with condition masks concatenated onto the
/// input of one layer. Hidden layers use ReLU, so in linear-output mode the
/// score is piecewise linear in both the grid and the weights.
#[derive(Clone, Debug)]
pub struct Critic {
    spec: DiscriminatorSpec,
    convs: Vec<Conv3d>,
}

#[derive(Clone, Debug)]
pub struct CriticTrace {
    /// Input of every conv layer (masks included where injected).
    inputs: Vec<Tensor>,
    /// Post-ReLU output of every hidden layer.
    hidden: Vec<Tensor>,
    /// Final single-channel map before the spatial mean.
    last: Tensor,
    pub scores: Vec<f32>,
}

impl CriticTrace {
    /// Spatial size after each layer.
    pub fn sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.hidden.iter().map(|t| t.shape()[2]).collect();
        v.push(self.last.shape()[2]);
        v
    }
}

impl Critic {
    pub fn new(spec: DiscriminatorSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let convs = (0..spec.layers())
            .map(|l| Conv3d::down(&format!("critic.conv{l}"), spec.layer_in(l), spec.channels[l], &mut rng))
            .collect();
        Ok(Critic { spec, convs })
    }

    pub fn spec(&self) -> &DiscriminatorSpec {
        &self.spec
    }

    fn inject_at(&self) -> usize {
        self.spec.condition_inject_layer - 1
    }

    /// `grid` is `[B, 1, N, N, N]`; `masks` is `[B, 11, M, M, M]` with M = mask_spatial.
    pub fn forward(&self, grid: &Tensor, masks: &Tensor) -> Result<CriticTrace> {
        let n = self.spec.resolution;
        let m = self.spec.mask_spatial;
        let b = grid.batch();
        grid.expect_shape("critic.input", &[b, 1, n, n, n])?;
        masks.expect_shape("critic.masks", &[b, self.spec.condition_dim, m, m, m])?;
        let mut inputs = Vec::new();
        let mut hidden = Vec::new();
        let mut h = grid.clone();
        let last_layer = self.convs.len() - 1;
        for (l, conv) in self.convs.iter().enumerate() {
            if l == self.inject_at() {
                h = Tensor::concat_channels(&h, masks)?;
            }
            let mut y = conv.forward(&h, true)?;
            inputs.push(std::mem::replace(&mut h, Tensor::zeros(&[0])));
            if l < last_layer {
                relu(&mut y);
                hidden.push(y.clone());
            }
            h = y;
        }
        let mut scores: Vec<f32> = (0..b)
            .map(|i| {
                let item = h.item(i);
                item.iter().sum::<f32>() / item.len() as f32
            })
            .collect();
        if self.spec.output == CriticOutput::Sigmoid {
            scores.iter_mut().for_each(|s| *s = sigmoid_scalar(*s));
        }
        Ok(CriticTrace {
            inputs,
            hidden,
            last: h,
            scores,
        })
    }

    pub fn score(&self, grid: &Tensor, masks: &Tensor) -> Result<Vec<f32>> {
        Ok(self.forward(grid, masks)?.scores)
    }

    /// Backpropagates `d_scores` (one per sample). Accumulates parameter
    /// gradients when `params` is set; returns the gradient with respect to
    /// the grid when `input` is set.
    pub fn backward(
        &mut self,
        trace: &CriticTrace,
        d_scores: &[f32],
        params: bool,
        input: bool,
    ) -> Result<Option<Tensor>> {
        let mut d = Tensor::zeros(trace.last.shape());
        let per = d.item_len();
        for (i, &ds) in d_scores.iter().enumerate() {
            let mut g = ds / per as f32;
            if self.spec.output == CriticOutput::Sigmoid {
                let s = trace.scores[i];
                g *= s * (1.0 - s);
            }
            d.item_mut(i).fill(g);
        }
        self.backprop(&trace.inputs, &trace.hidden, d, params, true, input)
    }

    /// Shared reverse sweep. `inputs[l]` is what layer `l` saw; `hidden[l]`
    /// supplies the ReLU masks.
    fn backprop(
        &mut self,
        inputs: &[Tensor],
        hidden: &[Tensor],
        mut d: Tensor,
        params: bool,
        bias: bool,
        input: bool,
    ) -> Result<Option<Tensor>> {
        let inject = self.inject_at();
        for l in (0..self.convs.len()).rev() {
            let want_dx = l > 0 || input;
            let grads = Grads {
                input: want_dx,
                weight: params,
                bias: params && bias,
            };
            let Some(mut dx) = self.convs[l].backward(&inputs[l], &d, grads)? else {
                return Ok(None);
            };
            if l == inject {
                let base = inputs[l].shape()[1] - self.spec.condition_dim;
                dx = dx.split_channels(base).0;
            }
            if l == 0 {
                return Ok(Some(dx));
            }
            relu_backward(&hidden[l - 1], &mut dx);
            d = dx;
        }
        unreachable!("loop returns at layer 0")
    }

    /// Accumulates `∂/∂θ Σ_b ⟨∇ₓ score_b(x̂_b), v_b⟩` with `v_b` held fixed.
    ///
    /// With ReLU hidden layers and a linear head, the directional derivative
    /// is the output of the same network run on `v` without biases, with ReLU
    /// gates frozen at `x̂` and zero condition masks. Backpropagating that
    /// linear network gives the exact gradient-penalty parameter gradient.
    pub fn tangent_backward(&mut self, trace: &CriticTrace, v: &Tensor) -> Result<()> {
        if self.spec.output != CriticOutput::Linear {
            return Err(Error::InvalidParameter(
                "gradient penalty requires a linear critic output".into(),
            ));
        }
        v.expect_shape("critic.tangent", trace.inputs[0].shape())?;
        let inject = self.inject_at();
        let mut inputs = Vec::with_capacity(self.convs.len());
        let mut t = v.clone();
        let last_layer = self.convs.len() - 1;
        for (l, conv) in self.convs.iter().enumerate() {
            if l == inject {
                let s = &trace.inputs[l].shape()[2..];
                let zeros = Tensor::zeros(&[t.batch(), self.spec.condition_dim, s[0], s[1], s[2]]);
                t = Tensor::concat_channels(&t, &zeros)?;
            }
            let mut u = conv.forward(&t, false)?;
            if l < last_layer {
                relu_backward(&trace.hidden[l], &mut u);
            }
            inputs.push(std::mem::replace(&mut t, u));
        }
        let per = t.item_len() as f32;
        let d = Tensor::from_vec(t.shape(), vec![1.0 / per; t.numel()])?;
        self.backprop(&inputs, &trace.hidden, d, true, false, false)?;
        Ok(())
    }
}

impl Module for Critic {
    fn params(&self) -> Vec<&Param> {
        self.convs.iter().flat_map(|c| c.params()).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        self.convs.iter_mut().flat_map(|c| c.params_mut()).collect()
    }
}
