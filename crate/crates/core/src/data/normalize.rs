use ndarray::Axis;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, TaskKind};
use crate::{Error, Result};

/// Per-feature statistics of a training set. Scaling uses min/max; mean and
/// standard deviation are kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

pub fn fit_normalizer(train: &Dataset) -> Result<NormStats> {
    if train.is_empty() {
        return Err(Error::Data(format!("cannot fit normalizer on empty `{}`", train.name)));
    }
    let x = &train.features;
    let min = x
        .fold_axis(Axis(0), f64::INFINITY, |&a, &b| a.min(b))
        .to_vec();
    let max = x
        .fold_axis(Axis(0), f64::NEG_INFINITY, |&a, &b| a.max(b))
        .to_vec();
    let mean = x.mean_axis(Axis(0)).expect("nonempty").to_vec();
    let std = x.std_axis(Axis(0), 0.0).to_vec();
    Ok(NormStats { min, max, mean, std })
}

impl NormStats {
    /// Min-max scales every feature with the training statistics. Values
    /// outside the training range are not clipped; constant features map to 0.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.feature_dim() != self.min.len() {
            return Err(Error::Shape(format!(
                "normalizer fitted on {} features, dataset has {}",
                self.min.len(),
                ds.feature_dim()
            )));
        }
        let mut out = ds.clone();
        for (j, mut col) in out.features.columns_mut().into_iter().enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            let range = hi - lo;
            if range > 0.0 {
                col.mapv_inplace(|v| (v - lo) / range);
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }
}

/// Z-scoring of regression targets with training-set statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub mean: f64,
    pub std: f64,
}

pub fn fit_target_scaler(train: &Dataset) -> Result<TargetScaler> {
    if train.task != TaskKind::Regression {
        return Err(Error::TaskKind("target scaling applies to regression only".into()));
    }
    if train.is_empty() {
        return Err(Error::Data(format!("cannot fit scaler on empty `{}`", train.name)));
    }
    let t = &train.targets;
    let mean = t.mean().expect("nonempty");
    let std = t.std(0.0);
    Ok(TargetScaler {
        mean,
        std: if std > 0.0 { std } else { 1.0 },
    })
}

impl TargetScaler {
    pub fn apply(&self, ds: &Dataset) -> Dataset {
        let mut out = ds.clone();
        out.targets.mapv_inplace(|v| (v - self.mean) / self.std);
        out
    }
}
