use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

use super::config::{Condition, ExperimentConfig, Method};
use super::report::{ReportRow, TraceRow};
use crate::aggregation::{
    self, build_series_model, train_series_head, EpochPoint, Outcome, Predictor, StageMetric,
};
use crate::data::{
    builtin_wdbc, fit_normalizer, fit_target_scaler, generate_dataset, load_wdbc, split_dataset,
    Dataset, NoiseSpec, Polynomial, TaskKind,
};
use crate::metrics::{self, RocCurve};
use crate::nn::{Mlp, MlpSpec, TrainConfig};
use crate::{seed, Error, Result};

/// Everything a run produces, in deterministic order.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub rows: Vec<ReportRow>,
    pub traces: Vec<TraceRow>,
    /// `(file stem, curve)` per classification row.
    pub rocs: Vec<(String, RocCurve)>,
}

/// Party datasets, shared test set and training setup of one trial.
struct Prepared {
    parts: Vec<Dataset>,
    test: Dataset,
    spec: MlpSpec,
    train: TrainConfig,
    init_seed: u64,
}

struct MethodRun {
    method: Method,
    order: &'static str,
    first_stage: Mlp,
    predictions: Array2<f64>,
    stages: Vec<StageMetric>,
    trace: Vec<EpochPoint>,
    wall_time: f64,
}

fn finish<M: Predictor>(
    method: Method,
    order: &'static str,
    outcome: Outcome<M>,
    test: &Dataset,
    started: Instant,
) -> Result<MethodRun> {
    let predictions = outcome.model.predict(test.features.view())?;
    Ok(MethodRun {
        method,
        order,
        first_stage: outcome.first_stage,
        predictions,
        stages: outcome.stages,
        trace: outcome.trace,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

fn run_method(method: Method, p: &Prepared, trace: bool) -> Result<Vec<MethodRun>> {
    let started = Instant::now();
    let (parts, test, spec, cfg, init) = (&p.parts, &p.test, &p.spec, &p.train, p.init_seed);
    match method {
        Method::None => {
            let o = aggregation::train_datasharing_baseline(parts, test, spec, cfg, init, trace)?;
            Ok(vec![finish(method, "", o, test, started)?])
        }
        Method::Average | Method::AverageSizeWeighted | Method::AverageBalanceWeighted => {
            let weighting = method.weighting().expect("averaging method");
            let o = aggregation::train_average(parts, test, spec, cfg, init, weighting, trace)?;
            Ok(vec![finish(method, "", o, test, started)?])
        }
        Method::Series if parts.len() == 1 => {
            // one party: no experts, the head is plain training
            let model = build_series_model(vec![], spec, init)?;
            let (model, _) = train_series_head(&model, &parts[0], cfg)?;
            let loss = aggregation::eval_loss(&model, test, cfg)?;
            let o = Outcome {
                first_stage: model.head().clone(),
                model,
                stages: vec![StageMetric {
                    label: "series".into(),
                    test_loss: loss,
                }],
                trace: Vec::new(),
            };
            Ok(vec![finish(method, "", o, test, started)?])
        }
        Method::Series => {
            let o = aggregation::train_series(parts, test, spec, cfg, init, trace)?;
            Ok(vec![finish(method, "", o, test, started)?])
        }
        Method::Transfer => {
            let forward = aggregation::train_transfer(parts, test, spec, cfg, init, trace)?;
            let forward = finish(method, "forward", forward, test, started)?;
            let started = Instant::now();
            let reversed: Vec<Dataset> = parts.iter().rev().cloned().collect();
            let reverse = aggregation::train_transfer(&reversed, test, spec, cfg, init, trace)?;
            Ok(vec![forward, finish(method, "reverse", reverse, test, started)?])
        }
    }
}

fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    cfg.seed.wrapping_add(trial as u64)
}

fn stage_text(stages: &[StageMetric]) -> String {
    stages
        .iter()
        .map(|s| format!("{}={}", s.label, s.test_loss))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Default)]
struct TrialOutput {
    rows: Vec<ReportRow>,
    traces: Vec<TraceRow>,
    rocs: Vec<(String, RocCurve)>,
}

fn run_trial(
    cfg: &ExperimentConfig,
    cond_index: usize,
    cond: &Condition,
    trial: usize,
    prepared: &Prepared,
) -> Result<TrialOutput> {
    let mut out = TrialOutput::default();
    let ts = trial_seed(cfg, trial);
    for &method in &cfg.methods {
        for run in run_method(method, prepared, cfg.trace)? {
            let mut row = ReportRow {
                task: cfg.task,
                method: run.method.name().into(),
                order: run.order.into(),
                trial,
                seed: ts,
                parties: cfg.parties,
                size: cond.size,
                degree: cond.degree,
                noise: cond.noise,
                width: cond.width,
                epochs: cond.epochs,
                batch_size: cond.batch_size,
                metric: String::new(),
                pre_metric: f64::NAN,
                post_metric: f64::NAN,
                test_loss: run.stages.last().map_or(f64::NAN, |s| s.test_loss),
                accuracy: None,
                precision: None,
                recall: None,
                f1: None,
                auc: None,
                stage_losses: stage_text(&run.stages),
                wall_time: run.wall_time,
            };
            let test = &prepared.test;
            match cfg.task {
                TaskKind::Regression => {
                    row.metric = "mse".into();
                    row.pre_metric = run.stages.first().map_or(f64::NAN, |s| s.test_loss);
                    row.post_metric = row.test_loss;
                }
                TaskKind::Classification => {
                    let labels: Vec<f64> = test.targets.column(0).to_vec();
                    let probs: Vec<f64> = run.predictions.column(0).to_vec();
                    let pre_probs: Vec<f64> =
                        run.first_stage.forward(test.features.view())?.column(0).to_vec();
                    let threshold = metrics::DEFAULT_THRESHOLD;
                    let counts = metrics::confusion(&probs, &labels, threshold)?;
                    let pre_counts = metrics::confusion(&pre_probs, &labels, threshold)?;
                    let (precision, recall, f1) = metrics::precision_recall_f1(&counts);
                    let roc = metrics::roc(&probs, &labels)?;
                    row.metric = "accuracy".into();
                    row.pre_metric = metrics::accuracy(&pre_counts)?;
                    row.post_metric = metrics::accuracy(&counts)?;
                    row.accuracy = Some(row.post_metric);
                    row.precision = Some(precision);
                    row.recall = Some(recall);
                    row.f1 = Some(f1);
                    row.auc = Some(roc.auc);
                    let suffix = if run.order.is_empty() {
                        String::new()
                    } else {
                        format!("_{}", run.order)
                    };
                    out.rocs
                        .push((format!("c{cond_index}_t{trial}_{}{suffix}", run.method), roc));
                }
            }
            if [row.pre_metric, row.post_metric, row.test_loss]
                .iter()
                .any(|v| !v.is_finite())
            {
                return Err(Error::Numeric(format!(
                    "{} (trial {trial}) produced a non-finite metric",
                    run.method
                )));
            }
            out.traces.extend(run.trace.into_iter().map(|p| TraceRow {
                condition: cond_index,
                trial,
                method: run.method.name().into(),
                order: run.order.into(),
                stage: p.stage,
                epoch: p.epoch,
                test_loss: p.test_loss,
                test_accuracy: p.test_accuracy,
            }));
            out.rows.push(row);
        }
    }
    Ok(out)
}

fn prepare_regression(cfg: &ExperimentConfig, cond: &Condition, trial: usize) -> Result<Prepared> {
    let ts = trial_seed(cfg, trial);
    let degree = cond.degree.expect("regression condition");
    let poly = Polynomial::generate(degree, seed::derive(ts, "poly", 0))?;
    let data = generate_dataset(
        &poly,
        cond.size.expect("regression condition"),
        NoiseSpec::new(cond.noise.expect("regression condition")),
        cfg.feature_range,
        seed::derive(ts, "data", 0),
    )?;
    let split = split_dataset(&data, cfg.test, cfg.parties, seed::derive(ts, "split", 0))?;
    let scaler = fit_target_scaler(&split.pooled_train()?)?;
    Ok(Prepared {
        parts: split.parts.iter().map(|p| scaler.apply(p)).collect(),
        test: scaler.apply(&split.test),
        spec: cfg.spec(data.feature_dim(), cond.width),
        train: cfg
            .train_config(cond.epochs, cond.batch_size)
            .with_shuffle_seed(seed::derive(ts, "shuffle", 0)),
        init_seed: seed::derive(ts, "init", 0),
    })
}

fn prepare_classification(
    cfg: &ExperimentConfig,
    data: &Dataset,
    cond: &Condition,
    trial: usize,
) -> Result<Prepared> {
    let ts = trial_seed(cfg, trial);
    let split = split_dataset(data, cfg.test, cfg.parties, seed::derive(ts, "split", 0))?;
    let stats = fit_normalizer(&split.pooled_train()?)?;
    Ok(Prepared {
        parts: split
            .parts
            .iter()
            .map(|p| stats.apply(p))
            .collect::<Result<_>>()?,
        test: stats.apply(&split.test)?,
        spec: cfg.spec(data.feature_dim(), cond.width),
        train: cfg
            .train_config(cond.epochs, cond.batch_size)
            .with_shuffle_seed(seed::derive(ts, "shuffle", 0)),
        init_seed: seed::derive(ts, "init", 0),
    })
}

fn sweep(
    cfg: &ExperimentConfig,
    prepare: impl Fn(&Condition, usize) -> Result<Prepared> + Sync,
) -> Result<RunOutput> {
    let conditions = cfg.conditions();
    let cells: Vec<(usize, usize)> = (0..conditions.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let results: Vec<TrialOutput> = cells
        .par_iter()
        .map(|&(c, t)| {
            let prepared = prepare(&conditions[c], t)?;
            run_trial(cfg, c, &conditions[c], t, &prepared)
        })
        .collect::<Result<_>>()?;
    let mut out = RunOutput::default();
    for r in results {
        out.rows.extend(r.rows);
        out.traces.extend(r.traces);
        out.rocs.extend(r.rocs);
    }
    Ok(out)
}

/// Synthetic polynomial regression: per trial, a random polynomial and
/// dataset, an 80/20-style split into parties and a test set, targets
/// z-scored with pooled training statistics, then every method.
pub fn run_regression(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if cfg.task != TaskKind::Regression {
        return Err(Error::Config("run_regression needs a regression config".into()));
    }
    cfg.validate()?;
    sweep(cfg, |cond, t| prepare_regression(cfg, cond, t))
}

/// WDBC classification: per trial, a fresh seeded split (256/256/57 by
/// default), min-max features fitted on pooled training rows, then every
/// method.
pub fn run_classification(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if cfg.task != TaskKind::Classification {
        return Err(Error::Config("run_classification needs a classification config".into()));
    }
    cfg.validate()?;
    let data = match &cfg.data_path {
        Some(path) => load_wdbc(path)?,
        None => builtin_wdbc(),
    };
    sweep(cfg, |cond, t| prepare_classification(cfg, &data, cond, t))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.task {
        TaskKind::Regression => run_regression(cfg),
        TaskKind::Classification => run_classification(cfg),
    }
}
