use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Predictions are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` before taking logs.
pub const BCE_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Mse,
    Bce,
}

fn check_shapes(pred: &ArrayView2<f64>, targets: &ArrayView2<f64>) -> Result<()> {
    if pred.dim() != targets.dim() {
        return Err(Error::Shape(format!(
            "predictions {:?} vs targets {:?}",
            pred.dim(),
            targets.dim()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Numeric(format!(
            "binary cross-entropy needs predictions in [0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Mean loss over every batch entry and output.
///
/// * `Mse`: mean of `(p - t)^2`
/// * `Bce`: mean of `-[t ln p + (1 - t) ln(1 - p)]` with `p` clamped by [`BCE_CLAMP`]
pub fn loss(pred: ArrayView2<f64>, targets: ArrayView2<f64>, kind: LossKind) -> Result<f64> {
    check_shapes(&pred, &targets)?;
    let count = pred.len() as f64;
    let mut total = 0.0;
    match kind {
        LossKind::Mse => {
            for (&p, &t) in pred.iter().zip(targets.iter()) {
                let r = p - t;
                total += r * r;
            }
        }
        LossKind::Bce => {
            for (&p, &t) in pred.iter().zip(targets.iter()) {
                check_probability(p)?;
                let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                total -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
            }
        }
    }
    Ok(total / count)
}

/// `dLoss/dPrediction` for every entry, already divided by the entry count.
pub(crate) fn loss_grad(
    pred: ArrayView2<f64>,
    targets: ArrayView2<f64>,
    kind: LossKind,
) -> Result<Array2<f64>> {
    check_shapes(&pred, &targets)?;
    let scale = 1.0 / pred.len() as f64;
    let mut grad = Array2::zeros(pred.dim());
    match kind {
        LossKind::Mse => {
            Zip::from(&mut grad)
                .and(&pred)
                .and(&targets)
                .for_each(|g, &p, &t| *g = 2.0 * (p - t) * scale);
        }
        LossKind::Bce => {
            for ((g, &p), &t) in grad.iter_mut().zip(pred.iter()).zip(targets.iter()) {
                check_probability(p)?;
                *g = if p < BCE_CLAMP || p > 1.0 - BCE_CLAMP {
                    0.0
                } else {
                    (-t / p + (1.0 - t) / (1.0 - p)) * scale
                };
            }
        }
    }
    Ok(grad)
}
