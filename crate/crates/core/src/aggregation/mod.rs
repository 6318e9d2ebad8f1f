//! Combining networks trained on disjoint party datasets.
//!
//! Every strategy here sees only trained models (and, for the party that
//! trains last, its own rows); no function pools rows from different
//! parties except [`train_datasharing_baseline`], the comparison point.

mod average;
mod series;
mod transfer;

pub use average::{
    average_ensemble, balance_weights, size_weights, train_average, AggregateWeights, Weighting,
};
pub use series::{build_series_model, train_series, train_series_head, SeriesModel};
pub use transfer::{train_datasharing_baseline, train_transfer};


use ndarray::{Array2, ArrayView2};

use crate::data::Dataset;
use crate::nn::{self, LossKind, Mlp, MlpSpec, TrainConfig};
use crate::{metrics, seed, Error, Result};

/// Anything that maps a batch of inputs to a batch of outputs.
pub trait Predictor {
    fn predict(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>>;
}

impl Predictor for Mlp {
    fn predict(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.forward(inputs)
    }
}

/// Test loss recorded after one stage of an aggregation run.
#[derive(Debug, Clone, PartialEq)]
pub struct StageMetric {
    pub label: String,
    pub test_loss: f64,
}

/// Test performance of a method's current model after one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochPoint {
    pub stage: String,
    pub epoch: usize,
    pub test_loss: f64,
    /// Present when training with cross-entropy.
    pub test_accuracy: Option<f64>,
}

/// Result of an aggregation run.
///
/// `first_stage` is the network that has seen only the first dataset; its
/// loss is the "pre" figure and the final model's loss the "post" figure.
/// `trace` is empty unless tracing was requested.
#[derive(Debug, Clone)]
pub struct Outcome<M> {
    pub model: M,
    pub first_stage: Mlp,
    pub stages: Vec<StageMetric>,
    pub trace: Vec<EpochPoint>,
}

impl<M> Outcome<M> {
    pub fn pre_loss(&self) -> f64 {
        self.stages.first().map_or(f64::NAN, |s| s.test_loss)
    }

    pub fn post_loss(&self) -> f64 {
        self.stages.last().map_or(f64::NAN, |s| s.test_loss)
    }
}

pub fn eval_loss<P: Predictor>(model: &P, test: &Dataset, cfg: &TrainConfig) -> Result<f64> {
    let pred = model.predict(test.features.view())?;
    nn::loss(pred.view(), test.targets.view(), cfg.loss)
}

/// Collects per-epoch test metrics when enabled.
pub(crate) struct Tracer<'a> {
    test: &'a Dataset,
    cfg: &'a TrainConfig,
    enabled: bool,
    points: Vec<EpochPoint>,
}

impl<'a> Tracer<'a> {
    pub(crate) fn new(test: &'a Dataset, cfg: &'a TrainConfig, enabled: bool) -> Self {
        Tracer {
            test,
            cfg,
            enabled,
            points: Vec::new(),
        }
    }

    pub(crate) fn enabled(&self) -> bool {
        self.enabled
    }

    /// Evaluates `model` on `features` (the test inputs, possibly augmented).
    pub(crate) fn record_on(
        &mut self,
        stage: &str,
        epoch: usize,
        model: &Mlp,
        features: ArrayView2<f64>,
    ) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        let pred = model.forward(features)?;
        let test_loss = nn::loss(pred.view(), self.test.targets.view(), self.cfg.loss)?;
        let test_accuracy = match self.cfg.loss {
            LossKind::Bce => {
                let probs: Vec<f64> = pred.column(0).to_vec();
                let labels: Vec<f64> = self.test.targets.column(0).to_vec();
                Some(metrics::accuracy(&metrics::confusion(
                    &probs,
                    &labels,
                    metrics::DEFAULT_THRESHOLD,
                )?)?)
            }
            LossKind::Mse => None,
        };
        self.points.push(EpochPoint {
            stage: stage.to_owned(),
            epoch,
            test_loss,
            test_accuracy,
        });
        Ok(())
    }

    pub(crate) fn record(&mut self, stage: &str, epoch: usize, model: &Mlp) -> Result<()> {
        let features = self.test.features.view();
        self.record_on(stage, epoch, model, features)
    }

    pub(crate) fn finish(self) -> Vec<EpochPoint> {
        self.points
    }
}

/// Shuffle seed of party `index`; party 0 keeps the configured seed so a
/// single party reproduces plain training.
pub fn party_config(cfg: &TrainConfig, index: usize) -> TrainConfig {
    if index == 0 {
        cfg.clone()
    } else {
        cfg.with_shuffle_seed(seed::derive(cfg.shuffle_seed, "party", index as u64))
    }
}

/// Trains one network per dataset, every party starting from the same
/// initialisation `Mlp::init(spec, init_seed)`.
pub fn train_parties(
    datasets: &[Dataset],
    spec: &MlpSpec,
    cfg: &TrainConfig,
    init_seed: u64,
) -> Result<Vec<Mlp>> {
    Ok(train_parties_with_snapshots(datasets, spec, cfg, init_seed, false)?.0)
}

type PartySnapshots = Vec<Vec<Mlp>>;

/// As [`train_parties`], optionally keeping every party's network after each
/// epoch.
pub(crate) fn train_parties_with_snapshots(
    datasets: &[Dataset],
    spec: &MlpSpec,
    cfg: &TrainConfig,
    init_seed: u64,
    snapshots: bool,
) -> Result<(Vec<Mlp>, PartySnapshots)> {
    use rayon::prelude::*;
    let init = Mlp::init(spec, init_seed)?;
    let trained: Vec<(Mlp, Vec<Mlp>)> = datasets
        .par_iter()
        .enumerate()
        .map(|(j, ds)| {
            let mut kept = Vec::new();
            let (m, _) = nn::train_observed(&init, ds, &party_config(cfg, j), 0, &mut |_, net| {
                if snapshots {
                    kept.push(net.clone());
                }
                Ok(())
            })?;
            Ok((m, kept))
        })
        .collect::<Result<_>>()?;
    Ok(trained.into_iter().unzip())
}

pub(crate) fn check_shared_dims(datasets: &[Dataset]) -> Result<()> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::Config("no datasets given".into()))?;
    for ds in datasets {
        if ds.feature_dim() != first.feature_dim() || ds.target_dim() != first.target_dim() {
            return Err(Error::Data(format!(
                "`{}` and `{}` have different shapes",
                first.name, ds.name
            )));
        }
    }
    Ok(())
}
