//! Conditional voxel GAN for predicting how loaded structures deform.
//!
//! The crate is organized bottom-up:
//!
//! - [`voxel`]: occupancy grids, depth views and grid metrics
//! - [`physics`]: the elasticity oracle that produces ground-truth samples
//! - [`condition`]: (force, location, material) condition encodings
//! - [`nn`]: the small 3-D convolution engine the networks are built on
//! - [`model`]: generator, critic and checkpoints
//! - [`train`]: losses and the adversarial training loop
//! - [`assess`]: prediction, safety verdicts and evaluation reports

pub mod assess;
pub mod condition;
pub mod config;
pub mod error;
pub mod model;
pub mod nn;
pub mod physics;
pub mod train;
pub mod voxel;

pub use error::{Error, Result};
