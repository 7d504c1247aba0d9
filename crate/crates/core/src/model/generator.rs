use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GeneratorSpec;
use crate::error::{Error, Result};
use crate::nn::{
    leaky_relu, leaky_relu_backward, max_pool2, max_pool2_backward, relu, relu_backward, sigmoid,
    sigmoid_backward, Conv3d, ConvTranspose3d, Grads, Linear, Module, Param, Tensor,
};

/// Conditional encoder/decoder with skip connections.
///
/// Encoder stage `i` is conv(stride 1) → leaky ReLU → 2× max pool; its pre-pool
/// activation is concatenated onto the decoder at the matching size. The
/// bottleneck flattens, compresses to the latent code, appends the condition
/// vector and expands back.
#[derive(Clone, Debug)]
pub struct Generator {
    spec: GeneratorSpec,
    enc: Vec<Conv3d>,
    fc: [Linear; 4],
    dec: Vec<ConvTranspose3d>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Clone, Debug)]
pub struct GeneratorTrace {
    enc_in: Vec<Tensor>,
    enc_act: Vec<Tensor>,
    pool_idx: Vec<Vec<u32>>,
    pooled_shape: Vec<usize>,
    flat: Tensor,
    h1: Tensor,
    z: Tensor,
    zc: Tensor,
    h3: Tensor,
    h4: Tensor,
    up_in: Vec<Tensor>,
    up_out: Vec<Tensor>,
}

impl GeneratorTrace {
    pub fn output(&self) -> &Tensor {
        self.up_out.last().expect("at least one decoder stage")
    }

    /// Spatial size after each pooling stage.
    pub fn pooled_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.enc_in[1..].iter().map(|t| t.shape()[2]).collect();
        sizes.push(self.pooled_shape[2]);
        sizes
    }

    /// Spatial size after each decoder stage.
    pub fn decoder_sizes(&self) -> Vec<usize> {
        self.up_out.iter().map(|t| t.shape()[2]).collect()
    }
}

impl Generator {
    pub fn new(spec: GeneratorSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = &spec.encoder_channels;
        let enc = (0..spec.stages())
            .map(|i| {
                let cin = if i == 0 { 1 } else { ch[i - 1] };
                Conv3d::same(&format!("gen.enc{i}"), cin, ch[i], &mut rng)
            })
            .collect();
        let flat = spec.flat_len();
        let fc = [
            Linear::new("gen.fc1", flat, spec.fc_hidden, &mut rng),
            Linear::new("gen.fc2", spec.fc_hidden, spec.latent_dim, &mut rng),
            Linear::new("gen.fc3", spec.latent_dim + spec.condition_dim, spec.fc_hidden, &mut rng),
            Linear::new("gen.fc4", spec.fc_hidden, flat, &mut rng),
        ];
        let dec = (0..spec.stages())
            .map(|j| {
                ConvTranspose3d::new(
                    &format!("gen.up{j}"),
                    spec.decoder_in(j),
                    spec.decoder_out(j),
                    &mut rng,
                )
            })
            .collect();
        Ok(Generator { spec, enc, fc, dec })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    /// `input` is `[B, 1, N, N, N]`, `cond` is `[B, 11]`.
    pub fn forward(&self, input: &Tensor, cond: &Tensor) -> Result<GeneratorTrace> {
        let n = self.spec.resolution;
        let b = input.batch();
        input.expect_shape("gen.input", &[b, 1, n, n, n])?;
        cond.expect_shape("gen.condition", &[b, self.spec.condition_dim])?;

        let mut enc_in = Vec::new();
        let mut enc_act = Vec::new();
        let mut pool_idx = Vec::new();
        let mut h = input.clone();
        for (i, conv) in self.enc.iter().enumerate() {
            let mut a = conv.forward(&h, true)?;
            leaky_relu(&mut a);
            let (pooled, idx) = max_pool2(&a, &format!("gen.pool{i}"))?;
            enc_in.push(std::mem::replace(&mut h, pooled));
            enc_act.push(a);
            pool_idx.push(idx);
        }
        let pooled_shape = h.shape().to_vec();
        let flat = h.reshape(&[b, self.spec.flat_len()])?;

        let mut h1 = self.fc[0].forward(&flat, true)?;
        leaky_relu(&mut h1);
        let mut z = self.fc[1].forward(&h1, true)?;
        leaky_relu(&mut z);
        let zc = Tensor::concat_channels(&z, cond)?;
        let mut h3 = self.fc[2].forward(&zc, true)?;
        relu(&mut h3);
        let mut h4 = self.fc[3].forward(&h3, true)?;
        relu(&mut h4);

        let s = self.spec.stages();
        let mut up_in = Vec::with_capacity(s);
        let mut up_out: Vec<Tensor> = Vec::with_capacity(s);
        for j in 0..s {
            let x = if j == 0 {
                h4.clone().reshape(&pooled_shape)?
            } else {
                Tensor::concat_channels(&up_out[j - 1], &enc_act[s - j])?
            };
            let mut y = self.dec[j].forward(&x)?;
            if j + 1 == s {
                sigmoid(&mut y);
            } else {
                relu(&mut y);
            }
            up_in.push(x);
            up_out.push(y);
        }
        Ok(GeneratorTrace {
            enc_in,
            enc_act,
            pool_idx,
            pooled_shape,
            flat,
            h1,
            z,
            zc,
            h3,
            h4,
            up_in,
            up_out,
        })
    }

    /// Convenience forward pass returning only the occupancy probabilities.
    pub fn predict(&self, input: &Tensor, cond: &Tensor) -> Result<Tensor> {
        let mut trace = self.forward(input, cond)?;
        Ok(trace.up_out.pop().expect("at least one decoder stage"))
    }

    /// Accumulates parameter gradients of a loss whose gradient with respect
    /// to the output probabilities is `d_out`.
    pub fn backward(&mut self, trace: &GeneratorTrace, d_out: &Tensor) -> Result<()> {
        let s = self.spec.stages();
        d_out.expect_shape("gen.output", trace.output().shape())?;
        let mut skip_grad: Vec<Option<Tensor>> = vec![None; s];
        let mut d = d_out.clone();
        for j in (0..s).rev() {
            if j + 1 == s {
                sigmoid_backward(&trace.up_out[j], &mut d);
            } else {
                relu_backward(&trace.up_out[j], &mut d);
            }
            let dx = self.dec[j]
                .backward(&trace.up_in[j], &d, Grads::ALL)?
                .expect("input gradient requested");
            if j == 0 {
                d = dx;
            } else {
                let (dup, dskip) = dx.split_channels(trace.up_out[j - 1].shape()[1]);
                skip_grad[s - j] = Some(dskip);
                d = dup;
            }
        }

        let b = d.batch();
        let mut d4 = d.reshape(&[b, self.spec.flat_len()])?;
        relu_backward(&trace.h4, &mut d4);
        let mut d3 = self.fc[3].backward(&trace.h3, &d4, Grads::ALL)?.expect("input");
        relu_backward(&trace.h3, &mut d3);
        let dzc = self.fc[2].backward(&trace.zc, &d3, Grads::ALL)?.expect("input");
        let (mut dz, _) = dzc.split_channels(self.spec.latent_dim);
        leaky_relu_backward(&trace.z, &mut dz);
        let mut d1 = self.fc[1].backward(&trace.h1, &dz, Grads::ALL)?.expect("input");
        leaky_relu_backward(&trace.h1, &mut d1);
        let dflat = self.fc[0].backward(&trace.flat, &d1, Grads::ALL)?.expect("input");

        let mut d = dflat.reshape(&trace.pooled_shape)?;
        for i in (0..s).rev() {
            let mut da = max_pool2_backward(&d, &trace.pool_idx[i], trace.enc_act[i].shape());
            if let Some(g) = &skip_grad[i] {
                da.add_assign(g);
            }
            leaky_relu_backward(&trace.enc_act[i], &mut da);
            let grads = Grads {
                input: i > 0,
                ..Grads::ALL
            };
            match self.enc[i].backward(&trace.enc_in[i], &da, grads)? {
                Some(dx) => d = dx,
                None => break,
            }
        }
        Ok(())
    }

    pub fn check_finite(&self, step: u64) -> Result<()> {
        for p in self.params() {
            if p.value.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: p.name.clone(),
                    step,
                });
            }
        }
        Ok(())
    }
}

impl Module for Generator {
    fn params(&self) -> Vec<&Param> {
        let mut v = Vec::new();
        self.enc.iter().for_each(|l| v.extend(l.params()));
        self.fc.iter().for_each(|l| v.extend(l.params()));
        self.dec.iter().for_each(|l| v.extend(l.params()));
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v = Vec::new();
        self.enc.iter_mut().for_each(|l| v.extend(l.params_mut()));
        self.fc.iter_mut().for_each(|l| v.extend(l.params_mut()));
        self.dec.iter_mut().for_each(|l| v.extend(l.params_mut()));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::{encode_vector, Condition};

    fn cond_tensor(conds: &[Condition]) -> Tensor {
        let data = conds.iter().flat_map(|c| encode_vector(c).unwrap()).collect();
        Tensor::from_vec(&[conds.len(), 11], data).unwrap()
    }

    fn tiny() -> GeneratorSpec {
        GeneratorSpec {
            resolution: 8,
            encoder_channels: vec![2, 3],
            latent_dim: 4,
            fc_hidden: 5,
            condition_dim: 11,
        }
    }

    #[test]
    fn output_in_unit_interval_and_same_shape() {
        let g = Generator::new(GeneratorSpec::default_for(16).unwrap(), 1).unwrap();
        let x = Tensor::zeros(&[2, 1, 16, 16, 16]);
        let c = cond_tensor(&[Condition::new(0, 0, 0).unwrap(), Condition::new(1, 6, 1).unwrap()]);
        let trace = g.forward(&x, &c).unwrap();
        assert_eq!(trace.output().shape(), x.shape());
        assert!(trace.output().data().iter().all(|&p| p > 0.0 && p < 1.0));
        assert_eq!(trace.pooled_sizes(), vec![8, 4, 2]);
        assert_eq!(trace.decoder_sizes(), vec![4, 8, 16]);
    }

    #[test]
    fn rejects_wrong_input_shape() {
        let g = Generator::new(tiny(), 0).unwrap();
        let c = cond_tensor(&[Condition::new(0, 0, 0).unwrap()]);
        match g.forward(&Tensor::zeros(&[1, 1, 8, 8, 4]), &c) {
            Err(Error::Shape { layer, .. }) => assert_eq!(layer, "gen.input"),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        use rand::Rng;
        let mut g = Generator::new(tiny(), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // enlarge weights so the output is sensitive to every layer, and move
        // biases off zero so no unit sits exactly on a ReLU kink
        for p in g.params_mut() {
            if p.name.ends_with("bias") {
                p.value.iter_mut().for_each(|v| *v = rng.random_range(-0.3..0.3));
            } else {
                p.value.iter_mut().for_each(|v| *v *= 15.0);
            }
        }
        let x = Tensor::from_vec(&[2, 1, 8, 8, 8], (0..1024).map(|_| rng.random_range(0.0..1.0)).collect())
            .unwrap();
        let c = cond_tensor(&[Condition::new(1, 2, 0).unwrap(), Condition::new(0, 5, 1).unwrap()]);
        let r: Vec<f32> = (0..1024).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = |g: &Generator| -> f64 {
            g.predict(&x, &c).unwrap().data().iter().zip(&r).map(|(o, r)| (*o as f64) * (*r as f64)).sum()
        };
        let trace = g.forward(&x, &c).unwrap();
        g.zero_grad();
        g.backward(&trace, &Tensor::from_vec(&[2, 1, 8, 8, 8], r.clone()).unwrap()).unwrap();
        let analytic: Vec<(String, Vec<f32>)> =
            g.params().iter().map(|p| (p.name.clone(), p.grad.clone())).collect();
        let h = 1e-3f32;
        for (pi, (name, grad)) in analytic.iter().enumerate() {
            for i in (0..grad.len()).step_by(grad.len() / 4 + 1) {
                let orig = g.params()[pi].value[i];
                g.params_mut()[pi].value[i] = orig + h;
                let lp = loss(&g);
                g.params_mut()[pi].value[i] = orig - h;
                let lm = loss(&g);
                g.params_mut()[pi].value[i] = orig;
                let fd = (lp - lm) / (2.0 * h as f64);
                let tol = 2e-3 + 2e-2 * fd.abs();
                assert!((fd - grad[i] as f64).abs() < tol, "{name}[{i}]: fd {fd} vs {}", grad[i]);
            }
        }
    }
}
