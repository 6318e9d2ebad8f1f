use serde::{Deserialize, Serialize};

use super::{check_shared_dims, eval_loss, train_parties_with_snapshots, Outcome, StageMetric, Tracer};
use crate::data::{Dataset, TaskKind};
use crate::nn::{Mlp, MlpSpec, TrainConfig};
use crate::dd::Dd;
use crate::{Error, Result};

/// Convex combination weights, one per party.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateWeights(Vec<f64>);

impl AggregateWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Config("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config(format!("weight {w} is not a finite nonnegative number")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("weights sum to {sum}, not 1")));
        }
        Ok(AggregateWeights(weights))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("need at least one network".into()));
        }
        Ok(AggregateWeights(vec![1.0 / k as f64; k]))
    }

    /// Normalises nonnegative raw scores; all-zero scores fall back to uniform.
    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        let total: f64 = scores.iter().sum();
        if total == 0.0 {
            return Self::uniform(scores.len());
        }
        Self::new(scores.into_iter().map(|s| s / total).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Element-wise weighted mean of identically shaped networks:
/// `result[i] = Σ_j weights[j] · networks[j][i]`, accumulated in
/// double-double so the result is rounded once. Averaging `k` copies of a
/// network with uniform weights therefore returns it unchanged.
pub fn average_ensemble(networks: &[Mlp], weights: &AggregateWeights) -> Result<Mlp> {
    let first = networks
        .first()
        .ok_or_else(|| Error::Config("no networks to average".into()))?;
    if weights.len() != networks.len() {
        return Err(Error::Config(format!(
            "{} weights for {} networks",
            weights.len(),
            networks.len()
        )));
    }
    if let Some(other) = networks.iter().find(|n| n.spec() != first.spec()) {
        return Err(Error::IncompatibleArchitecture(format!(
            "{} vs {}",
            first.spec().to_text(),
            other.spec().to_text()
        )));
    }
    let mut acc = vec![Dd::default(); first.param_count()];
    for (net, &w) in networks.iter().zip(weights.as_slice()) {
        for (a, &p) in acc.iter_mut().zip(net.params()) {
            *a = a.add_prod(w, p);
        }
    }
    Mlp::from_params(first.spec(), acc.into_iter().map(Dd::value).collect())
}

/// Weights proportional to dataset size.
pub fn size_weights(datasets: &[Dataset]) -> Result<AggregateWeights> {
    if datasets.is_empty() {
        return Err(Error::Config("no datasets given".into()));
    }
    if let Some(ds) = datasets.iter().find(|d| d.is_empty()) {
        return Err(Error::Data(format!("`{}` is empty", ds.name)));
    }
    AggregateWeights::from_scores(datasets.iter().map(|d| d.len() as f64).collect())
}

/// Weights proportional to `size · 4p(1 - p)`, `p` being the fraction of
/// positive labels: balanced parties get full credit for their size, a
/// party holding a single class gets none. If every party is single-class the
/// weights are uniform.
pub fn balance_weights(datasets: &[Dataset]) -> Result<AggregateWeights> {
    if datasets.is_empty() {
        return Err(Error::Config("no datasets given".into()));
    }
    let mut scores = Vec::with_capacity(datasets.len());
    for ds in datasets {
        if ds.task != TaskKind::Classification {
            return Err(Error::TaskKind(format!(
                "balance weighting needs classification data, `{}` is regression",
                ds.name
            )));
        }
        let p = ds.positive_fraction()?;
        scores.push(ds.len() as f64 * 4.0 * p * (1.0 - p));
    }
    AggregateWeights::from_scores(scores)
}

/// How party networks are weighted when averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Uniform,
    Size,
    Balance,
}

impl Weighting {
    pub fn weights(self, datasets: &[Dataset]) -> Result<AggregateWeights> {
        match self {
            Weighting::Uniform => AggregateWeights::uniform(datasets.len()),
            Weighting::Size => size_weights(datasets),
            Weighting::Balance => balance_weights(datasets),
        }
    }
}

/// Trains one network per party from a shared initialisation and averages
/// them. Stages: each party's network, then the average. The trace follows
/// the average of the parties' networks epoch by epoch.
pub fn train_average(
    datasets: &[Dataset],
    test: &Dataset,
    spec: &MlpSpec,
    cfg: &TrainConfig,
    init_seed: u64,
    weighting: Weighting,
    trace: bool,
) -> Result<Outcome<Mlp>> {
    check_shared_dims(datasets)?;
    let weights = weighting.weights(datasets)?;
    let mut tracer = Tracer::new(test, cfg, trace);
    let (parties, snapshots) =
        train_parties_with_snapshots(datasets, spec, cfg, init_seed, tracer.enabled())?;
    if tracer.enabled() {
        for epoch in 0..cfg.epochs {
            let nets: Vec<Mlp> = snapshots.iter().map(|s| s[epoch].clone()).collect();
            tracer.record("average", epoch + 1, &average_ensemble(&nets, &weights)?)?;
        }
    }
    let model = average_ensemble(&parties, &weights)?;
    let mut stages = Vec::with_capacity(parties.len() + 1);
    for (j, net) in parties.iter().enumerate() {
        stages.push(StageMetric {
            label: format!("party{}", j + 1),
            test_loss: eval_loss(net, test, cfg)?,
        });
    }
    stages.push(StageMetric {
        label: "average".into(),
        test_loss: eval_loss(&model, test, cfg)?,
    });
    Ok(Outcome {
        model,
        first_stage: parties.into_iter().next().expect("at least one party"),
        stages,
        trace: tracer.finish(),
    })
}
