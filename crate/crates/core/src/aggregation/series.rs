use ndarray::{concatenate, Array2, ArrayView2, Axis};

use super::{
    check_shared_dims, eval_loss, party_config, train_parties_with_snapshots, Outcome, Predictor,
    StageMetric, Tracer,
};
use crate::data::Dataset;
use crate::nn::{self, Mlp, MlpSpec, TrainConfig, TrainHistory};
use crate::{Error, Result};

/// Frozen expert networks feeding a head network.
///
/// The head sees `[x ‖ expert_1(x) ‖ … ‖ expert_m(x)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesModel {
    experts: Vec<Mlp>,
    head: Mlp,
}

impl SeriesModel {
    pub fn from_parts(experts: Vec<Mlp>, head: Mlp) -> Result<Self> {
        let extra: usize = experts.iter().map(|e| e.spec().output_dim).sum();
        if extra >= head.spec().input_dim {
            return Err(Error::IncompatibleArchitecture(format!(
                "head takes {} inputs, experts already supply {extra}",
                head.spec().input_dim
            )));
        }
        let base = head.spec().input_dim - extra;
        if let Some(e) = experts.iter().find(|e| e.spec().input_dim != base) {
            return Err(Error::IncompatibleArchitecture(format!(
                "expert takes {} inputs, base dimension is {base}",
                e.spec().input_dim
            )));
        }
        Ok(SeriesModel { experts, head })
    }

    pub fn experts(&self) -> &[Mlp] {
        &self.experts
    }

    pub fn head(&self) -> &Mlp {
        &self.head
    }

    pub fn base_input_dim(&self) -> usize {
        self.head.spec().input_dim - self.expert_output_dim()
    }

    fn expert_output_dim(&self) -> usize {
        self.experts.iter().map(|e| e.spec().output_dim).sum()
    }

    /// Appends every expert's outputs, in stored order, to each input row.
    pub fn augment(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        if inputs.ncols() != self.base_input_dim() {
            return Err(Error::Shape(format!(
                "series model expects {} inputs, batch has {}",
                self.base_input_dim(),
                inputs.ncols()
            )));
        }
        let outputs = self
            .experts
            .iter()
            .map(|e| e.forward(inputs))
            .collect::<Result<Vec<_>>>()?;
        let mut views = vec![inputs];
        views.extend(outputs.iter().map(|o| o.view()));
        concatenate(Axis(1), &views).map_err(|e| Error::Shape(e.to_string()))
    }

    pub fn forward(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        let augmented = self.augment(inputs)?;
        self.head.forward(augmented.view())
    }
}

impl Predictor for SeriesModel {
    fn predict(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.forward(inputs)
    }
}

/// Wraps trained experts with a freshly initialised head whose input width is
/// `base_spec.input_dim` plus the experts' total output width. With no
/// experts the head equals `Mlp::init(base_spec, seed)`.
pub fn build_series_model(experts: Vec<Mlp>, base_spec: &MlpSpec, seed: u64) -> Result<SeriesModel> {
    if let Some(e) = experts.iter().find(|e| e.spec().input_dim != base_spec.input_dim) {
        return Err(Error::IncompatibleArchitecture(format!(
            "expert takes {} inputs, base architecture takes {}",
            e.spec().input_dim,
            base_spec.input_dim
        )));
    }
    let extra: usize = experts.iter().map(|e| e.spec().output_dim).sum();
    let head = Mlp::init(&base_spec.with_input_dim(base_spec.input_dim + extra), seed)?;
    Ok(SeriesModel { experts, head })
}

/// Trains only the head on `data`; expert parameters are never touched.
///
/// Expert outputs are deterministic for frozen experts, so the augmented
/// inputs are computed once up front.
pub fn train_series_head(
    model: &SeriesModel,
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<(SeriesModel, TrainHistory)> {
    let mut augmented = data.clone();
    augmented.features = model.augment(data.features.view())?;
    let (head, history) = nn::train(&model.head, &augmented, cfg)?;
    Ok((
        SeriesModel {
            experts: model.experts.clone(),
            head,
        },
        history,
    ))
}

/// Experts are trained independently on every dataset but the last (shared
/// initialisation, per-party shuffles); the head is trained on the last.
/// Stages: each expert alone, then the full series model. The trace covers
/// the first expert's epochs followed by the head's.
pub fn train_series(
    datasets: &[Dataset],
    test: &Dataset,
    base_spec: &MlpSpec,
    cfg: &TrainConfig,
    init_seed: u64,
    trace: bool,
) -> Result<Outcome<SeriesModel>> {
    if datasets.len() < 2 {
        return Err(Error::Config(format!(
            "series learning needs at least two datasets, got {}",
            datasets.len()
        )));
    }
    check_shared_dims(datasets)?;
    let (expert_sets, last) = datasets.split_at(datasets.len() - 1);
    let mut tracer = Tracer::new(test, cfg, trace);
    let (experts, snapshots) =
        train_parties_with_snapshots(expert_sets, base_spec, cfg, init_seed, tracer.enabled())?;
    for (epoch, net) in snapshots.first().into_iter().flatten().enumerate() {
        tracer.record("expert1", epoch + 1, net)?;
    }
    let mut stages = Vec::with_capacity(datasets.len());
    for (j, e) in experts.iter().enumerate() {
        stages.push(StageMetric {
            label: format!("expert{}", j + 1),
            test_loss: eval_loss(e, test, cfg)?,
        });
    }
    let first_stage = experts[0].clone();
    let model = build_series_model(experts, base_spec, init_seed)?;
    let head_cfg = party_config(cfg, datasets.len() - 1);
    let model = if tracer.enabled() {
        let aug_test = model.augment(test.features.view())?;
        let mut augmented = last[0].clone();
        augmented.features = model.augment(last[0].features.view())?;
        let (head, _) = nn::train_observed(&model.head, &augmented, &head_cfg, 0, &mut |e, net| {
            tracer.record_on("series", cfg.epochs + e + 1, net, aug_test.view())
        })?;
        SeriesModel {
            experts: model.experts,
            head,
        }
    } else {
        train_series_head(&model, &last[0], &head_cfg)?.0
    };
    stages.push(StageMetric {
        label: "series".into(),
        test_loss: eval_loss(&model, test, cfg)?,
    });
    Ok(Outcome {
        model,
        first_stage,
        stages,
        trace: tracer.finish(),
    })
}
