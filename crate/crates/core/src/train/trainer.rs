use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loss::{gradient_penalty, loss_ae_grad, loss_total};
use super::{StepRecord, TrainConfig, TrainLog};
use crate::error::{Error, Result};
use crate::model::{
    condition_tensor, grid_tensor, mask_tensor, Checkpoint, Critic, DiscriminatorSpec, Generator, GeneratorSpec,
};
use crate::nn::{Adam, Module, Param, Tensor};
use crate::physics::Dataset;

const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_STEP: u64 = 3;

/// Independent random stream for `(seed, tag, index)`, so any step can be
/// replayed without running the ones before it.
fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 56) ^ index);
    rng
}

fn ensure_finite(params: &[&mut Param], what: &str, step: u64) -> Result<()> {
    for p in params {
        if p.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("{what} gradient of {}", p.name),
                step,
            });
        }
    }
    Ok(())
}

fn ensure_finite_value(v: f64, what: &str, step: u64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
            step,
        })
    }
}

/// Batch tensors for one training step.
struct Batch {
    input: Tensor,
    target: Tensor,
    cond: Tensor,
    masks: Tensor,
}

/// Critic-side quantities of one critic update.
#[derive(Clone, Copy, Debug, Default)]
pub struct CriticStep {
    pub d_loss: f64,
    pub gp: f64,
}

/// Adds the exact parameter gradient of `λ·mean((‖∇ score(x̂)‖ − 1)²)` to the
/// critic and returns the penalty with the per-sample gradient norms.
pub fn accumulate_gradient_penalty(
    critic: &mut Critic,
    real: &Tensor,
    fake: &Tensor,
    masks: &Tensor,
    eps: &[f32],
    lambda: f64,
) -> Result<(f64, Vec<f64>)> {
    let b = real.batch();
    let mut mixed = real.clone();
    for (i, &e) in eps.iter().enumerate().take(b) {
        let f = fake.item(i);
        for (m, &fv) in mixed.item_mut(i).iter_mut().zip(f) {
            *m = e * *m + (1.0 - e) * fv;
        }
    }
    let trace = critic.forward(&mixed, masks)?;
    let g = critic
        .backward(&trace, &vec![1.0; b], false, true)?
        .expect("input gradient requested");
    let norms: Vec<f64> = (0..b)
        .map(|i| g.item(i).iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt())
        .collect();
    let gp = gradient_penalty(&norms, lambda);
    if lambda > 0.0 {
        let mut v = g;
        for (i, &n) in norms.iter().enumerate() {
            let c = if n > 0.0 {
                2.0 * lambda * (n - 1.0) / n / b as f64
            } else {
                0.0
            };
            v.item_mut(i).iter_mut().for_each(|x| *x *= c as f32);
        }
        critic.tangent_backward(&trace, &v)?;
    }
    Ok((gp, norms))
}

/// Stateful training driver. All randomness is derived from the seed and
/// the step index, so a resumed run continues exactly as an unbroken one.
pub struct Trainer {
    pub state: Checkpoint,
    pub config: TrainConfig,
    pub log: TrainLog,
}

impl Trainer {
    pub fn new(generator: GeneratorSpec, critic: DiscriminatorSpec, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        if generator.resolution != critic.resolution {
            return Err(Error::ResolutionMismatch {
                left: format!("generator N={}", generator.resolution),
                right: format!("critic N={}", critic.resolution),
            });
        }
        let mut init = stream(config.seed, STREAM_INIT, 0);
        let adam = || Adam::new(config.adam_beta1 as f32, config.adam_beta2 as f32, 1e-8);
        let state = Checkpoint::new(
            Generator::new(generator, init.random())?,
            Critic::new(critic, init.random())?,
            adam(),
            adam(),
            config.seed,
        );
        Ok(Trainer {
            state,
            config,
            log: TrainLog::default(),
        })
    }

    /// Continues from a checkpoint; the seed must match the one it was trained with.
    pub fn resume(state: Checkpoint, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        if state.seed != config.seed {
            return Err(Error::Config(format!(
                "checkpoint seed {} differs from configured seed {}",
                state.seed, config.seed
            )));
        }
        Ok(Trainer {
            state,
            config,
            log: TrainLog::default(),
        })
    }

    pub fn steps_per_epoch(&self, data: &Dataset) -> u64 {
        data.len().div_ceil(self.config.batch_size) as u64
    }

    pub fn total_steps(&self, data: &Dataset) -> u64 {
        let full = self.config.epochs * self.steps_per_epoch(data);
        self.config.max_steps.map_or(full, |m| m.min(full))
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.is_empty() {
            return Err(Error::InvalidParameter("dataset is empty".into()));
        }
        let n = self.state.generator.spec().resolution;
        if data.grid.resolution != n {
            return Err(Error::ResolutionMismatch {
                left: format!("dataset N={}", data.grid.resolution),
                right: format!("model N={n}"),
            });
        }
        Ok(())
    }

    /// Runs until the configured budget is exhausted.
    pub fn run(&mut self, data: &Dataset) -> Result<()> {
        let total = self.total_steps(data);
        self.run_until(data, total)
    }

    /// Runs until `state.step == target` (or the budget ends first).
    pub fn run_until(&mut self, data: &Dataset, target: u64) -> Result<()> {
        self.check_data(data)?;
        let end = target.min(self.total_steps(data));
        while self.state.step < end {
            let record = self.step(data)?;
            self.log.push(record);
        }
        Ok(())
    }

    fn batch(&self, data: &Dataset, step: u64) -> Result<Batch> {
        let per_epoch = self.steps_per_epoch(data);
        let epoch = step / per_epoch;
        let slot = (step % per_epoch) as usize;
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut stream(self.config.seed, STREAM_SHUFFLE, epoch));
        let bs = self.config.batch_size;
        let picked: Vec<_> = order[slot * bs..((slot + 1) * bs).min(order.len())]
            .iter()
            .map(|&i| &data.samples[i])
            .collect();
        let conds: Vec<_> = picked.iter().map(|s| s.condition).collect();
        Ok(Batch {
            input: grid_tensor(picked.iter().map(|s| &s.input))?,
            target: grid_tensor(picked.iter().map(|s| &s.target))?,
            cond: condition_tensor(&conds)?,
            masks: mask_tensor(&conds, self.state.critic.spec().mask_spatial)?,
        })
    }

    fn critic_update(&mut self, batch: &Batch, lr: f32, rng: &mut ChaCha8Rng, step: u64) -> Result<CriticStep> {
        let b = batch.input.batch();
        let fake = self.state.generator.predict(&batch.input, &batch.cond)?;
        let critic = &mut self.state.critic;
        critic.zero_grad();
        let real_trace = critic.forward(&batch.target, &batch.masks)?;
        critic.backward(&real_trace, &vec![-1.0 / b as f32; b], true, false)?;
        let fake_trace = critic.forward(&fake, &batch.masks)?;
        critic.backward(&fake_trace, &vec![1.0 / b as f32; b], true, false)?;
        let eps: Vec<f32> = (0..b).map(|_| rng.random::<f32>()).collect();
        let gp = if self.config.gp_lambda > 0.0 {
            accumulate_gradient_penalty(critic, &batch.target, &fake, &batch.masks, &eps, self.config.gp_lambda)?.0
        } else {
            0.0
        };
        let mean = |s: &[f32]| s.iter().map(|&v| v as f64).sum::<f64>() / s.len() as f64;
        let d_loss = mean(&fake_trace.scores) - mean(&real_trace.scores) + gp;
        ensure_finite_value(d_loss, "critic loss", step)?;
        let mut params = critic.params_mut();
        ensure_finite(&params, "critic", step)?;
        self.state.critic_opt.step(&mut params, lr)?;
        Ok(CriticStep { d_loss, gp })
    }

    /// One generator step, preceded by `critic_steps` critic updates when the
    /// adversarial term has non-zero weight.
    pub fn step(&mut self, data: &Dataset) -> Result<StepRecord> {
        self.check_data(data)?;
        let started = Instant::now();
        let step = self.state.step;
        let per_epoch = self.steps_per_epoch(data);
        let epoch = step / per_epoch;
        let lr = self.config.lr_for_epoch(epoch);
        let batch = self.batch(data, step)?;
        let mut rng = stream(self.config.seed, STREAM_STEP, step);
        let beta = self.config.beta;
        let adversarial = beta < 1.0;

        let mut critic_out = CriticStep::default();
        if adversarial {
            for _ in 0..self.config.critic_steps {
                critic_out = self.critic_update(&batch, lr as f32, &mut rng, step)?;
            }
        }

        let trace = self.state.generator.forward(&batch.input, &batch.cond)?;
        let output = trace.output();
        let (l_ae, mut d_out) = loss_ae_grad(batch.target.data(), output.data(), self.config.alpha)?;
        d_out.iter_mut().for_each(|g| *g *= beta as f32);
        let mut l_gan_g = 0.0;
        if adversarial {
            let b = output.batch();
            let critic = &mut self.state.critic;
            let ct = critic.forward(output, &batch.masks)?;
            l_gan_g = -ct.scores.iter().map(|&s| s as f64).sum::<f64>() / b as f64;
            let g = critic
                .backward(&ct, &vec![-1.0 / b as f32; b], false, true)?
                .expect("input gradient requested");
            let w = (1.0 - beta) as f32;
            d_out.iter_mut().zip(g.data()).for_each(|(d, gv)| *d += w * gv);
        }
        let l_total = loss_total(l_ae, l_gan_g, beta);
        ensure_finite_value(l_total, "generator loss", step)?;
        let d_out = Tensor::from_vec(output.shape(), d_out)?;
        let generator = &mut self.state.generator;
        generator.zero_grad();
        generator.backward(&trace, &d_out)?;
        let mut params = generator.params_mut();
        ensure_finite(&params, "generator", step)?;
        self.state.gen_opt.step(&mut params, lr as f32)?;

        self.state.step = step + 1;
        self.state.epoch = self.state.step / per_epoch;
        Ok(StepRecord {
            step,
            epoch,
            lr,
            l_ae,
            l_gan_g,
            l_gan_d: critic_out.d_loss,
            gp: critic_out.gp,
            l_total,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }
}

/// Trains fresh networks on `data` for the configured budget.
pub fn train(
    data: &Dataset,
    generator: GeneratorSpec,
    critic: DiscriminatorSpec,
    config: TrainConfig,
) -> Result<(Checkpoint, TrainLog)> {
    let mut t = Trainer::new(generator, critic, config)?;
    t.run(data)?;
    Ok((t.state, t.log))
}
