//! Evaluation metrics: MSE, confusion counts, precision / recall / F1,
//! accuracy and ROC / AUC.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::nn::LossKind;
use crate::{Error, Result};

/// Mean squared error over equally shaped batches (same definition as the
/// training loss).
pub fn mse(pred: ndarray::ArrayView2<f64>, target: ndarray::ArrayView2<f64>) -> Result<f64> {
    crate::nn::loss(pred, target, LossKind::Mse)
}

/// Decision threshold; a probability equal to it counts as positive.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check_pair(probs: &[f64], targets: &[f64]) -> Result<()> {
    if probs.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} scores vs {} targets",
            probs.len(),
            targets.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Numeric(format!("score {p} is not a probability")));
    }
    if let Some(t) = targets.iter().find(|&&t| t != 0.0 && t != 1.0) {
        return Err(Error::Data(format!("target {t} is not a binary label")));
    }
    Ok(())
}

pub fn confusion(probs: &[f64], targets: &[f64], threshold: f64) -> Result<ConfusionCounts> {
    check_pair(probs, targets)?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in probs.iter().zip(targets) {
        match (p >= threshold, t == 1.0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `(precision, recall, f1)`; every 0/0 is taken as 0.
pub fn precision_recall_f1(c: &ConfusionCounts) -> (f64, f64, f64) {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    (precision, recall, f1_score(precision, recall))
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    if c.total() == 0 {
        return Err(Error::MetricUndefined("accuracy of zero examples".into()));
    }
    Ok((c.tp + c.tn) as f64 / c.total() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Smallest score classified positive at this point (`+inf` for the origin).
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// One point per distinct score, swept from high to low, plus the origin.
/// AUC is the trapezoidal area, which equals the Mann-Whitney statistic
/// with ties counted as one half.
pub fn roc(probs: &[f64], targets: &[f64]) -> Result<RocCurve> {
    check_pair(probs, targets)?;
    let positives = targets.iter().filter(|&&t| t == 1.0).count();
    let negatives = targets.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::MetricUndefined(
            "ROC needs at least one positive and one negative target".into(),
        ));
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let score = probs[order[i]];
        while i < order.len() && probs[order[i]] == score {
            if targets[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = points.last().expect("origin present");
        let point = RocPoint {
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
            threshold: score,
        };
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    Ok(RocCurve { points, auc })
}

impl RocCurve {
    /// Two-column `fpr,tpr` text with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "fpr,tpr")?;
        for p in &self.points {
            writeln!(out, "{},{}", p.fpr, p.tpr)?;
        }
        Ok(())
    }
}
