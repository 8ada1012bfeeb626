//! The decoupling network `T`, its MMD training objective and Adam.

mod adam;
mod config;
mod mmd;
mod model;
mod train;

pub use adam::{adam_step, AdamState};
pub use config::{Activation, AdamConfig, NetConfig, TrainConfig, DEFAULT_BANDWIDTHS};
pub use mmd::{kernel_mixture, mmd_loss};
pub use model::{
    forward, glorot_init, loss_and_gradient, normal_scores, transform, Layer, NetWeights, INPUT_CLAMP,
};
pub use train::{train, train_with_progress, TrainReport};
