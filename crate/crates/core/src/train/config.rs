use serde::{Deserialize, Serialize};

use crate::config::KeyValues;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gp_lambda: f64,
    pub batch_size: usize,
    pub lr_initial: f64,
    pub lr_after_epoch1: f64,
    pub epochs: u64,
    pub critic_steps: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    /// Stop after this many generator steps even if epochs remain.
    pub max_steps: Option<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha: 0.85,
            beta: 0.8,
            gp_lambda: 10.0,
            batch_size: 8,
            lr_initial: 5e-4,
            lr_after_epoch1: 1e-4,
            epochs: 2,
            critic_steps: 1,
            seed: 0,
            adam_beta1: 0.5,
            adam_beta2: 0.999,
            max_steps: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} must lie in (0, 1)", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta {} must lie in [0, 1]", self.beta));
        }
        if !(self.gp_lambda >= 0.0) {
            return bad(format!("gp_lambda {} must be >= 0", self.gp_lambda));
        }
        if self.batch_size == 0 || self.critic_steps == 0 {
            return bad("batch_size and critic_steps must be positive".into());
        }
        if !(self.lr_initial > 0.0 && self.lr_after_epoch1 > 0.0) {
            return bad("learning rates must be positive".into());
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)".into());
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn lr_for_epoch(&self, epoch: u64) -> f64 {
        if epoch == 0 {
            self.lr_initial
        } else {
            self.lr_after_epoch1
        }
    }

    /// Reads keys over the defaults. `alpha` and `beta` must be present.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.reject_unknown(&[
            "alpha",
            "beta",
            "gp_lambda",
            "batch_size",
            "lr_initial",
            "lr_after_epoch1",
            "epochs",
            "critic_steps",
            "seed",
            "adam_beta1",
            "adam_beta2",
            "max_steps",
        ])?;
        let d = TrainConfig::default();
        let cfg = TrainConfig {
            alpha: kv.require("alpha")?,
            beta: kv.require("beta")?,
            gp_lambda: kv.get_or("gp_lambda", d.gp_lambda)?,
            batch_size: kv.get_or("batch_size", d.batch_size)?,
            lr_initial: kv.get_or("lr_initial", d.lr_initial)?,
            lr_after_epoch1: kv.get_or("lr_after_epoch1", d.lr_after_epoch1)?,
            epochs: kv.get_or("epochs", d.epochs)?,
            critic_steps: kv.get_or("critic_steps", d.critic_steps)?,
            seed: kv.get_or("seed", d.seed)?,
            adam_beta1: kv.get_or("adam_beta1", d.adam_beta1)?,
            adam_beta2: kv.get_or("adam_beta2", d.adam_beta2)?,
            max_steps: kv.get("max_steps")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
