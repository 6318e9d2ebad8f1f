use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregation::Weighting;
use crate::data::{TaskKind, TestSize, DEFAULT_FEATURE_RANGE};
use crate::nn::{Activation, LossKind, MlpSpec, Optimizer, TrainConfig};
use crate::{Error, Result};

/// Aggregation strategy, selected by name in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Average,
    AverageSizeWeighted,
    AverageBalanceWeighted,
    Series,
    Transfer,
    None,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Average,
        Method::AverageSizeWeighted,
        Method::AverageBalanceWeighted,
        Method::Series,
        Method::Transfer,
        Method::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Average => "average",
            Method::AverageSizeWeighted => "average_size_weighted",
            Method::AverageBalanceWeighted => "average_balance_weighted",
            Method::Series => "series",
            Method::Transfer => "transfer",
            Method::None => "none",
        }
    }

    pub fn weighting(self) -> Option<Weighting> {
        match self {
            Method::Average => Some(Weighting::Uniform),
            Method::AverageSizeWeighted => Some(Weighting::Size),
            Method::AverageBalanceWeighted => Some(Weighting::Balance),
            _ => None,
        }
    }

    /// Report rows emitted per trial and condition (transfer runs both
    /// dataset orders).
    pub fn row_variants(self) -> usize {
        if self == Method::Transfer {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!("unknown method `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// One cell of the sweep. Data fields are `None` for classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub size: Option<usize>,
    pub degree: Option<u32>,
    pub noise: Option<f64>,
    pub width: usize,
    pub epochs: usize,
    pub batch_size: usize,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
    pub parties: usize,
    /// Record per-epoch test metrics for every method.
    pub trace: bool,
    pub test: TestSize,
    pub sizes: Vec<usize>,
    pub degrees: Vec<u32>,
    pub noise: Vec<f64>,
    pub feature_range: (f64, f64),
    /// WDBC file; the bundled copy when absent.
    pub data_path: Option<PathBuf>,
    pub depth: usize,
    pub widths: Vec<usize>,
    pub activation: Activation,
    pub epochs: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
}

pub const DEFAULT_REGRESSION_EPOCHS: usize = 60;
pub const DEFAULT_CLASSIFICATION_EPOCHS: usize = 50;

impl ExperimentConfig {
    pub fn regression_default() -> Self {
        ExperimentConfig {
            task: TaskKind::Regression,
            methods: vec![Method::Average, Method::Series, Method::Transfer, Method::None],
            trials: 10,
            seed: 0,
            parties: 2,
            trace: false,
            test: TestSize::Fraction(0.2),
            sizes: vec![3200],
            degrees: vec![2],
            noise: vec![0.0],
            feature_range: DEFAULT_FEATURE_RANGE,
            data_path: None,
            depth: 2,
            widths: vec![64],
            activation: Activation::Relu,
            epochs: vec![DEFAULT_REGRESSION_EPOCHS],
            batch_sizes: vec![32],
            learning_rate: 1e-3,
            optimizer: Optimizer::default(),
        }
    }

    pub fn classification_default() -> Self {
        ExperimentConfig {
            task: TaskKind::Classification,
            methods: Method::ALL.to_vec(),
            trace: true,
            test: TestSize::Count(57),
            sizes: vec![],
            degrees: vec![],
            noise: vec![],
            widths: vec![32],
            epochs: vec![DEFAULT_CLASSIFICATION_EPOCHS],
            ..ExperimentConfig::regression_default()
        }
    }

    pub fn default_for(task: TaskKind) -> Self {
        match task {
            TaskKind::Regression => Self::regression_default(),
            TaskKind::Classification => Self::classification_default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.trials < 1 {
            return fail("trials must be >= 1".into());
        }
        if self.methods.is_empty() {
            return fail("no methods selected".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return fail(format!("method `{m}` listed twice"));
            }
        }
        if self.parties < 1 {
            return fail("parties must be >= 1".into());
        }
        if self.depth < 1 {
            return fail("depth must be >= 1".into());
        }
        if self.widths.is_empty() || self.widths.contains(&0) {
            return fail("widths must be a nonempty list of positive integers".into());
        }
        if self.epochs.is_empty() {
            return fail("epochs sweep is empty".into());
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.contains(&0) {
            return fail("batch_sizes must be a nonempty list of positive integers".into());
        }
        match self.task {
            TaskKind::Regression => {
                if self.sizes.is_empty() || self.degrees.is_empty() || self.noise.is_empty() {
                    return fail("regression needs sizes, degrees and noise levels".into());
                }
                if self.sizes.contains(&0) || self.degrees.contains(&0) {
                    return fail("sizes and degrees must be >= 1".into());
                }
                if self.noise.iter().any(|n| !(*n >= 0.0)) {
                    return fail("noise levels must be >= 0".into());
                }
                if self.methods.contains(&Method::AverageBalanceWeighted) {
                    return fail("average_balance_weighted needs class labels (classification only)".into());
                }
                if !(self.feature_range.0 < self.feature_range.1) {
                    return fail("feature_range must be increasing".into());
                }
            }
            TaskKind::Classification => {
                if let Some(path) = &self.data_path {
                    if !path.exists() {
                        return fail(format!("data file {} does not exist", path.display()));
                    }
                }
            }
        }
        if let TestSize::Fraction(f) = self.test {
            if !(f > 0.0 && f < 1.0) {
                return fail(format!("test fraction must lie in (0, 1), got {f}"));
            }
        }
        self.train_config(0, 1).validate()
    }

    /// Cross product of every sweep axis, in a fixed nesting order.
    pub fn conditions(&self) -> Vec<Condition> {
        let (sizes, degrees, noise): (Vec<Option<usize>>, Vec<Option<u32>>, Vec<Option<f64>>) =
            match self.task {
                TaskKind::Regression => (
                    self.sizes.iter().copied().map(Some).collect(),
                    self.degrees.iter().copied().map(Some).collect(),
                    self.noise.iter().copied().map(Some).collect(),
                ),
                TaskKind::Classification => (vec![None], vec![None], vec![None]),
            };
        let mut out = Vec::new();
        for &size in &sizes {
            for &degree in &degrees {
                for &noise in &noise {
                    for &width in &self.widths {
                        for &epochs in &self.epochs {
                            for &batch_size in &self.batch_sizes {
                                out.push(Condition {
                                    size,
                                    degree,
                                    noise,
                                    width,
                                    epochs,
                                    batch_size,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn spec(&self, input_dim: usize, width: usize) -> MlpSpec {
        let output_activation = match self.task {
            TaskKind::Regression => Activation::Identity,
            TaskKind::Classification => Activation::Sigmoid,
        };
        MlpSpec {
            input_dim,
            hidden_layers: vec![(width, self.activation); self.depth],
            output_dim: 1,
            output_activation,
        }
    }

    pub fn train_config(&self, epochs: usize, batch_size: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size,
            learning_rate: self.learning_rate,
            optimizer: self.optimizer,
            loss: match self.task {
                TaskKind::Regression => LossKind::Mse,
                TaskKind::Classification => LossKind::Bce,
            },
            shuffle_seed: 0,
        }
    }

    /// Reads a TOML file; missing keys take the task's defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        file.resolve()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    task: Option<TaskKind>,
    methods: Option<Vec<Method>>,
    trials: Option<usize>,
    seed: Option<u64>,
    parties: Option<usize>,
    trace: Option<bool>,
    #[serde(default)]
    data: DataSection,
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    train: TrainSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataSection {
    sizes: Option<Vec<usize>>,
    degrees: Option<Vec<u32>>,
    noise: Option<Vec<f64>>,
    feature_range: Option<(f64, f64)>,
    test_fraction: Option<f64>,
    test_count: Option<usize>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    depth: Option<usize>,
    widths: Option<Vec<usize>>,
    activation: Option<Activation>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    epochs: Option<Vec<usize>>,
    batch_sizes: Option<Vec<usize>>,
    learning_rate: Option<f64>,
    optimizer: Option<String>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    eps: Option<f64>,
}

impl ConfigFile {
    fn resolve(self) -> Result<ExperimentConfig> {
        let task = self
            .task
            .ok_or_else(|| Error::Config("missing `task` (regression or classification)".into()))?;
        let mut cfg = ExperimentConfig::default_for(task);
        macro_rules! set {
            ($field:ident, $value:expr) => {
                if let Some(v) = $value {
                    cfg.$field = v;
                }
            };
        }
        set!(methods, self.methods);
        set!(trials, self.trials);
        set!(seed, self.seed);
        set!(parties, self.parties);
        set!(trace, self.trace);
        set!(sizes, self.data.sizes);
        set!(degrees, self.data.degrees);
        set!(noise, self.data.noise);
        set!(feature_range, self.data.feature_range);
        cfg.data_path = self.data.path.or(cfg.data_path);
        match (self.data.test_fraction, self.data.test_count) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give either test_fraction or test_count, not both".into(),
                ))
            }
            (Some(f), None) => cfg.test = TestSize::Fraction(f),
            (None, Some(c)) => cfg.test = TestSize::Count(c),
            (None, None) => {}
        }
        set!(depth, self.model.depth);
        set!(widths, self.model.widths);
        set!(activation, self.model.activation);
        set!(epochs, self.train.epochs);
        set!(batch_sizes, self.train.batch_sizes);
        set!(learning_rate, self.train.learning_rate);
        cfg.optimizer = match self.train.optimizer.as_deref() {
            None | Some("adam") => {
                let Optimizer::Adam { beta1, beta2, eps } = Optimizer::default() else {
                    unreachable!("default optimizer is adam")
                };
                Optimizer::Adam {
                    beta1: self.train.beta1.unwrap_or(beta1),
                    beta2: self.train.beta2.unwrap_or(beta2),
                    eps: self.train.eps.unwrap_or(eps),
                }
            }
            Some("sgd") => Optimizer::Sgd,
            Some(other) => return Err(Error::Config(format!("unknown optimizer `{other}`"))),
        };
        Ok(cfg)
    }
}
