use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nnagg::aggregation::{average_ensemble, AggregateWeights};
use nnagg::data::{
    builtin_wdbc, fit_normalizer, generate_dataset, load_wdbc, Dataset, NoiseSpec, Polynomial,
    TaskKind, DEFAULT_FEATURE_RANGE,
};
use nnagg::harness::{run_experiment, summarize, write_outputs, ExperimentConfig, Method};
use nnagg::metrics;
use nnagg::nn::{self, Activation, LossKind, Mlp, MlpSpec, TrainConfig};
use nnagg::{Error, Result};

#[derive(Parser)]
#[command(name = "nnagg", version, about = "Aggregate neural networks trained on disjoint datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// TOML experiment config; built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Restrict to these methods (repeat or comma-separate).
    #[arg(long = "method", value_delimiter = ',')]
    methods: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic polynomial regression comparison.
    Regress {
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// WDBC classification comparison.
    Classify {
        #[command(flatten)]
        sweep: SweepArgs,
        /// WDBC data file; the bundled copy by default.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Write a synthetic polynomial dataset as CSV (x1..x7,y).
    GenData {
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, default_value_t = 3200)]
        size: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Picks the polynomial (and the rows, unless --rows-seed is given).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw a different sample from the same polynomial.
        #[arg(long)]
        rows_seed: Option<u64>,
        /// Clamp interval for features, as LOW,HIGH.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        feature_range: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a single network on one dataset and save it.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
        format: DataFormat,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 60)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        learning_rate: f64,
        /// Seeds the initial weights. Parties that will be averaged later
        /// should share it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        shuffle_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a saved model on a dataset.
    EvalModel {
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
        format: DataFormat,
    },
    /// Combine saved models without touching any data.
    Aggregate {
        #[arg(long, value_enum, default_value_t = AggregateMethod::Average)]
        method: AggregateMethod,
        /// One weight per model; uniform by default.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        #[arg(required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    /// Header row, features then a single target column.
    Csv,
    /// Raw WDBC file; features are min-max scaled with its own statistics.
    Wdbc,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateMethod {
    Average,
}

fn sweep_config(args: &SweepArgs, task: TaskKind) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default_for(task),
    };
    if cfg.task != task {
        return Err(Error::Config(format!(
            "config task is {:?} but the subcommand runs {:?}",
            cfg.task, task
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if !args.methods.is_empty() {
        cfg.methods = args
            .methods
            .iter()
            .map(|m| m.parse::<Method>())
            .collect::<Result<_>>()?;
    }
    Ok(cfg)
}

fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    let result = run_experiment(cfg)?;
    write_outputs(cfg, &result, out)?;
    let metric = match cfg.task {
        TaskKind::Regression => "mse",
        TaskKind::Classification => "accuracy",
    };
    println!("{:<26} {:>5} {:>12} {:>12} {:>8} {:>8}", "method", "runs", format!("pre {metric}"), format!("post {metric}"), "f1", "auc");
    for s in summarize(&result.rows) {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<26} {:>5} {:>12.5} {:>12.5} {:>8} {:>8}",
            s.method,
            s.runs,
            s.pre_mean,
            s.post_mean,
            opt(s.f1_mean),
            opt(s.auc_mean)
        );
    }
    println!("reports written to {}", out.display());
    Ok(())
}

fn load_data(path: &Path, format: DataFormat, target_dim: usize, task: TaskKind) -> Result<Dataset> {
    match format {
        DataFormat::Csv => Dataset::load_csv(path, target_dim, task),
        DataFormat::Wdbc => {
            let raw = if path.as_os_str() == "builtin" {
                builtin_wdbc()
            } else {
                load_wdbc(path)?
            };
            fit_normalizer(&raw)?.apply(&raw)
        }
    }
}

fn task_of(format: DataFormat) -> TaskKind {
    match format {
        DataFormat::Csv => TaskKind::Regression,
        DataFormat::Wdbc => TaskKind::Classification,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Regress { sweep } => {
            let cfg = sweep_config(&sweep, TaskKind::Regression)?;
            run_sweep(&cfg, &sweep.out)
        }
        Command::Classify { sweep, data } => {
            let mut cfg = sweep_config(&sweep, TaskKind::Classification)?;
            if data.is_some() {
                cfg.data_path = data;
            }
            run_sweep(&cfg, &sweep.out)
        }
        Command::GenData {
            degree,
            size,
            noise,
            seed,
            rows_seed,
            feature_range,
            out,
        } => {
            let range = match feature_range.as_slice() {
                [] => DEFAULT_FEATURE_RANGE,
                [lo, hi] => (*lo, *hi),
                _ => unreachable!("clap enforces two values"),
            };
            let poly = Polynomial::generate(degree, nnagg::seed::derive(seed, "poly", 0))?;
            let data = generate_dataset(
                &poly,
                size,
                NoiseSpec::new(noise),
                range,
                nnagg::seed::derive(rows_seed.unwrap_or(seed), "data", 0),
            )?;
            data.save_csv(&out)?;
            println!("wrote {} rows to {}", data.len(), out.display());
            Ok(())
        }
        Command::Train {
            data,
            format,
            width,
            depth,
            epochs,
            batch_size,
            learning_rate,
            seed,
            shuffle_seed,
            out,
        } => {
            let task = task_of(format);
            let ds = load_data(&data, format, 1, task)?;
            let (output, loss) = match task {
                TaskKind::Regression => (Activation::Identity, LossKind::Mse),
                TaskKind::Classification => (Activation::Sigmoid, LossKind::Bce),
            };
            let spec = MlpSpec::new(
                ds.feature_dim(),
                vec![(width, Activation::Relu); depth],
                1,
                output,
            )?;
            let cfg = TrainConfig {
                epochs,
                batch_size,
                learning_rate,
                loss,
                shuffle_seed,
                ..TrainConfig::default()
            };
            let (model, history) = nn::train(&Mlp::init(&spec, seed)?, &ds, &cfg)?;
            model.save(&out)?;
            if let Some(last) = history.per_epoch_train_loss.last() {
                println!("final train loss {last:.6}");
            }
            println!("model written to {}", out.display());
            Ok(())
        }
        Command::EvalModel {
            model,
            data,
            format,
        } => {
            let model = Mlp::load(&model)?;
            let task = task_of(format);
            let ds = load_data(&data, format, model.spec().output_dim, task)?;
            let pred = model.forward(ds.features.view())?;
            match task {
                TaskKind::Regression => {
                    println!("mse {}", metrics::mse(pred.view(), ds.targets.view())?);
                }
                TaskKind::Classification => {
                    let probs = pred.column(0).to_vec();
                    let labels = ds.targets.column(0).to_vec();
                    let counts = metrics::confusion(&probs, &labels, metrics::DEFAULT_THRESHOLD)?;
                    let (p, r, f1) = metrics::precision_recall_f1(&counts);
                    println!("loss {}", nn::loss(pred.view(), ds.targets.view(), LossKind::Bce)?);
                    println!("accuracy {}", metrics::accuracy(&counts)?);
                    println!("precision {p}\nrecall {r}\nf1 {f1}");
                    println!("auc {}", metrics::roc(&probs, &labels)?.auc);
                }
            }
            Ok(())
        }
        Command::Aggregate {
            method: AggregateMethod::Average,
            weights,
            models,
            out,
        } => {
            let nets = models.iter().map(Mlp::load).collect::<Result<Vec<_>>>()?;
            let weights = if weights.is_empty() {
                AggregateWeights::uniform(nets.len())?
            } else {
                AggregateWeights::new(weights)?
            };
            average_ensemble(&nets, &weights)?.save(&out)?;
            println!("averaged {} models into {}", nets.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
