//! Composite objective and the optimization loop.

mod config;
mod log;
mod loss;
mod trainer;

pub use config::TrainConfig;
pub use log::{StepRecord, TrainLog};
pub use loss::{
    gradient_penalty, loss_ae, loss_ae_grad, loss_gan, loss_total, loss_total_grad, GanLosses, PROB_EPS,
};
pub use trainer::{accumulate_gradient_penalty, train, CriticStep, Trainer};
