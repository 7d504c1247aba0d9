use rand::Rng;

use super::conv::Grads;
use super::gemm::{gemm, MatRef};
use super::{Module, Param, Tensor};
use crate::error::{Error, Result};

/// Fully connected layer, `y = x Wᵀ + b` with weight layout `[out, in]`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub name: String,
    pub weight: Param,
    pub bias: Param,
    pub in_features: usize,
    pub out_features: usize,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(name: &str, in_features: usize, out_features: usize, rng: &mut R) -> Self {
        Linear {
            name: name.to_string(),
            weight: Param::gaussian(format!("{name}.weight"), &[out_features, in_features], rng),
            bias: Param::zeros(format!("{name}.bias"), &[out_features]),
            in_features,
            out_features,
        }
    }

    fn check(&self, x: &Tensor) -> Result<()> {
        if x.shape().len() != 2 || x.shape()[1] != self.in_features {
            return Err(Error::Shape {
                layer: self.name.clone(),
                expected: vec![x.shape()[0], self.in_features],
                got: x.shape().to_vec(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor, with_bias: bool) -> Result<Tensor> {
        self.check(x)?;
        let b = x.batch();
        let mut y = Tensor::zeros(&[b, self.out_features]);
        let w = MatRef::row_major(&self.weight.value, self.out_features, self.in_features);
        gemm(
            1.0,
            MatRef::row_major(x.data(), b, self.in_features),
            w.t(),
            0.0,
            y.data_mut(),
            self.out_features,
            1,
        );
        if with_bias {
            for row in y.data_mut().chunks_exact_mut(self.out_features) {
                row.iter_mut().zip(&self.bias.value).for_each(|(v, b)| *v += b);
            }
        }
        Ok(y)
    }

    pub fn backward(&mut self, x: &Tensor, dy: &Tensor, grads: Grads) -> Result<Option<Tensor>> {
        self.check(x)?;
        let b = x.batch();
        dy.expect_shape(&self.name, &[b, self.out_features])?;
        let dym = MatRef::row_major(dy.data(), b, self.out_features);
        if grads.bias {
            for row in dy.data().chunks_exact(self.out_features) {
                self.bias.grad.iter_mut().zip(row).for_each(|(g, d)| *g += d);
            }
        }
        if grads.weight {
            let xm = MatRef::row_major(x.data(), b, self.in_features);
            gemm(1.0, dym.t(), xm, 1.0, &mut self.weight.grad, self.in_features, 1);
        }
        Ok(grads.input.then(|| {
            let mut dx = Tensor::zeros(&[b, self.in_features]);
            let w = MatRef::row_major(&self.weight.value, self.out_features, self.in_features);
            gemm(1.0, dym, w, 0.0, dx.data_mut(), self.in_features, 1);
            dx
        }))
    }
}

impl Module for Linear {
    fn params(&self) -> Vec<&Param> {
        vec![&self.weight, &self.bias]
    }
    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.weight, &mut self.bias]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forward_and_backward_by_hand() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut l = Linear::new("fc", 2, 3, &mut rng);
        l.weight.value = vec![1., 2., 3., 4., 5., 6.];
        l.bias.value = vec![0.5, 0.0, -0.5];
        let x = Tensor::from_vec(&[1, 2], vec![1.0, -1.0]).unwrap();
        let y = l.forward(&x, true).unwrap();
        assert_eq!(y.data(), &[-0.5, -1.0, -1.5]);
        let dy = Tensor::from_vec(&[1, 3], vec![1.0, 0.0, 2.0]).unwrap();
        let dx = l.backward(&x, &dy, Grads::ALL).unwrap().unwrap();
        assert_eq!(dx.data(), &[11.0, 14.0]);
        assert_eq!(l.weight.grad, vec![1., -1., 0., 0., 2., -2.]);
        assert_eq!(l.bias.grad, vec![1.0, 0.0, 2.0]);
    }

    #[test]
    fn rejects_wrong_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let l = Linear::new("fc3", 4, 2, &mut rng);
        assert!(matches!(
            l.forward(&Tensor::zeros(&[1, 3]), true),
            Err(Error::Shape { layer, .. }) if layer == "fc3"
        ));
    }
}
