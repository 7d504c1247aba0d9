use super::Param;
use crate::error::{Error, Result};

/// Adam with bias correction. Moment buffers follow parameter order.
#[derive(Clone, Debug)]
pub struct Adam {
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
    pub t: u64,
    pub m: Vec<Vec<f32>>,
    pub v: Vec<Vec<f32>>,
}

impl Adam {
    pub fn new(beta1: f32, beta2: f32, eps: f32) -> Self {
        Adam {
            beta1,
            beta2,
            eps,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    fn ensure_state(&mut self, params: &[&mut Param]) -> Result<()> {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != params.len()
            || self.m.iter().zip(params).any(|(m, p)| m.len() != p.len())
        {
            return Err(Error::Config("optimizer state does not match parameters".into()));
        }
        Ok(())
    }

    pub fn step(&mut self, params: &mut [&mut Param], lr: f32) -> Result<()> {
        self.ensure_state(params)?;
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let step = lr / bc1;
        for ((p, m), v) in params.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.value.len() {
                let g = p.grad[i];
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g * g;
                p.value[i] -= step * m[i] / ((v[i] / bc2).sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_quadratic() {
        let mut p = Param::zeros("x", &[2]);
        p.value = vec![3.0, -2.0];
        let mut adam = Adam::new(0.9, 0.999, 1e-8);
        for _ in 0..2000 {
            p.grad = p.value.iter().map(|x| 2.0 * x).collect();
            adam.step(&mut [&mut p], 0.01).unwrap();
        }
        assert!(p.value.iter().all(|x| x.abs() < 1e-2), "{:?}", p.value);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = Param::zeros("x", &[1]);
        p.grad = vec![5.0];
        let mut adam = Adam::new(0.5, 0.999, 1e-8);
        adam.step(&mut [&mut p], 0.1).unwrap();
        assert!((p.value[0] + 0.1).abs() < 1e-5);
    }
}
