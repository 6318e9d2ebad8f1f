use super::{check_shared_dims, eval_loss, Outcome, StageMetric, Tracer};
use crate::data::Dataset;
use crate::nn::{self, Mlp, MlpSpec, TrainConfig};
use crate::Result;

/// One network, initialised once, trained on each dataset in order without
/// re-initialisation. Stage `s` numbers its epochs from `s · cfg.epochs`, so
/// feeding the same dataset twice with SGD replays a run of twice the
/// length. Optimizer state restarts at every stage.
pub fn train_transfer(
    datasets: &[Dataset],
    test: &Dataset,
    spec: &MlpSpec,
    cfg: &TrainConfig,
    init_seed: u64,
    trace: bool,
) -> Result<Outcome<Mlp>> {
    check_shared_dims(datasets)?;
    let mut tracer = Tracer::new(test, cfg, trace);
    let mut model = Mlp::init(spec, init_seed)?;
    let mut first_stage = None;
    let mut stages = Vec::with_capacity(datasets.len());
    for (s, ds) in datasets.iter().enumerate() {
        let label = format!("stage{}", s + 1);
        model = nn::train_observed(&model, ds, cfg, s * cfg.epochs, &mut |e, net| {
            tracer.record(&label, e + 1, net)
        })?
        .0;
        stages.push(StageMetric {
            label,
            test_loss: eval_loss(&model, test, cfg)?,
        });
        if s == 0 {
            first_stage = Some(model.clone());
        }
    }
    Ok(Outcome {
        model,
        first_stage: first_stage.expect("at least one dataset"),
        stages,
        trace: tracer.finish(),
    })
}

/// Pools every dataset (declared order) and trains one network: the
/// data-sharing comparison point, reported as `none`.
pub fn train_datasharing_baseline(
    datasets: &[Dataset],
    test: &Dataset,
    spec: &MlpSpec,
    cfg: &TrainConfig,
    init_seed: u64,
    trace: bool,
) -> Result<Outcome<Mlp>> {
    check_shared_dims(datasets)?;
    let refs: Vec<&Dataset> = datasets.iter().collect();
    let pooled = Dataset::concat("pooled", &refs)?;
    let mut tracer = Tracer::new(test, cfg, trace);
    let (model, _) = nn::train_observed(&Mlp::init(spec, init_seed)?, &pooled, cfg, 0, &mut |e, net| {
        tracer.record("none", e + 1, net)
    })?;
    let loss = eval_loss(&model, test, cfg)?;
    Ok(Outcome {
        first_stage: model.clone(),
        model,
        stages: vec![StageMetric {
            label: "none".into(),
            test_loss: loss,
        }],
        trace: tracer.finish(),
    })
}
