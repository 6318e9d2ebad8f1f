//! Minimal feed-forward network engine: dense layers, analytic backprop,
//! mini-batch SGD / Adam, MSE and binary cross-entropy.

mod io;
mod loss;
mod mlp;
mod optim;
mod spec;
mod train;

pub use io::{read_model, write_model, MODEL_MAGIC};
pub use loss::{loss, LossKind, BCE_CLAMP};
pub use mlp::{Mlp, ParamKind};
pub use optim::Optimizer;
pub use spec::{Activation, Layer, MlpSpec};
pub use train::{params_checksum, train, train_from_epoch, train_observed, TrainConfig, TrainHistory};
