use ndarray::Axis;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::loss::LossKind;
use super::mlp::Mlp;
use super::optim::Optimizer;
use crate::data::Dataset;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub loss: LossKind,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: Optimizer::default(),
            loss: LossKind::Mse,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config(format!(
                "learning_rate must be a positive number, got {}",
                self.learning_rate
            )));
        }
        self.optimizer.validate()
    }

    pub fn with_shuffle_seed(&self, shuffle_seed: u64) -> Self {
        TrainConfig {
            shuffle_seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Example-weighted mean of the mini-batch losses seen during each epoch.
    pub per_epoch_train_loss: Vec<f64>,
    pub final_params_checksum: u64,
}

/// First eight bytes (little endian) of the SHA-256 of the parameters'
/// little-endian encoding.
pub fn params_checksum(params: &[f64]) -> u64 {
    let mut hasher = Sha256::new();
    for p in params {
        hasher.update(p.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// Mini-batch training; returns a new network and leaves `mlp` untouched.
///
/// Each epoch shuffles the rows with a generator derived from
/// `(cfg.shuffle_seed, epoch)`, unless one batch covers the whole dataset.
/// Optimizer state starts fresh on every call.
pub fn train(mlp: &Mlp, data: &Dataset, cfg: &TrainConfig) -> Result<(Mlp, TrainHistory)> {
    train_from_epoch(mlp, data, cfg, 0)
}

/// Like [`train`], but numbers epochs from `first_epoch` when deriving the
/// shuffle streams. Continuing a run with `first_epoch = previous epochs`
/// reproduces the batch schedule of one longer run.
pub fn train_from_epoch(
    mlp: &Mlp,
    data: &Dataset,
    cfg: &TrainConfig,
    first_epoch: usize,
) -> Result<(Mlp, TrainHistory)> {
    train_observed(mlp, data, cfg, first_epoch, &mut |_, _| Ok(()))
}

/// [`train_from_epoch`] that hands the network to `observer` after every
/// epoch (with the global epoch number).
pub fn train_observed(
    mlp: &Mlp,
    data: &Dataset,
    cfg: &TrainConfig,
    first_epoch: usize,
    observer: &mut dyn FnMut(usize, &Mlp) -> Result<()>,
) -> Result<(Mlp, TrainHistory)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Data(format!("dataset `{}` is empty", data.name)));
    }
    let spec = mlp.spec();
    if data.feature_dim() != spec.input_dim {
        return Err(Error::Data(format!(
            "dataset `{}` has {} features, network expects {}",
            data.name,
            data.feature_dim(),
            spec.input_dim
        )));
    }
    if data.target_dim() != spec.output_dim {
        return Err(Error::Data(format!(
            "dataset `{}` has {} targets, network produces {}",
            data.name,
            data.target_dim(),
            spec.output_dim
        )));
    }

    let mut net = mlp.clone();
    let mut state = cfg.optimizer.state(net.param_count());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in first_epoch..first_epoch + cfg.epochs {
        // a single full batch is order-independent up to rounding; keep rows
        // in place so one epoch is exactly one gradient step
        if cfg.batch_size < data.len() {
            let mut rng = seed::rng(seed::derive(cfg.shuffle_seed, "epoch", epoch as u64));
            order.sort_unstable();
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let x = data.features.select(Axis(0), batch);
            let y = data.targets.select(Axis(0), batch);
            let (value, grad) = net.loss_and_gradients(x.view(), y.view(), cfg.loss)?;
            if !value.is_finite() {
                return Err(Error::Numeric(format!(
                    "training loss diverged at epoch {epoch}"
                )));
            }
            total += value * batch.len() as f64;
            state.step(net.params_mut(), &grad, cfg.learning_rate);
        }
        history.push(total / data.len() as f64);
        observer(epoch, &net)?;
    }
    let checksum = params_checksum(net.params());
    Ok((
        net,
        TrainHistory {
            per_epoch_train_loss: history,
            final_params_checksum: checksum,
        },
    ))
}
