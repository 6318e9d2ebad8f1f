//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::collections::HashSet;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::Rng;

use nnagg::aggregation::{average_ensemble, train_transfer, AggregateWeights};
use nnagg::data::{
    generate_dataset, split_dataset, Dataset, NoiseSpec, Polynomial, TaskKind, TestSize,
    DEFAULT_FEATURE_RANGE, NUM_VARS,
};
use nnagg::harness::{run_classification, run_regression, ExperimentConfig, ReportRow};
use nnagg::nn::{self, Activation, Mlp, MlpSpec, TrainConfig};
use nnagg::seed;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn within(limit: Duration, took: Duration) -> String {
    format!("{:.1}s, limit {}s", took.as_secs_f64(), limit.as_secs())
}

fn gradient_oracle() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let (mut checked, mut s) = (0, 0u64);
    while checked < 50 {
        s += 1;
        let mut rng = seed::rng(seed::derive(2024, "grad", s));
        let (spec, loss) = common::random_spec(&mut rng);
        let mlp = Mlp::init(&spec, s).unwrap();
        let rows = rng.random_range(1..=8);
        let (x, y) = common::random_batch(&mut rng, &spec, loss, rows);
        if common::near_relu_kink(&mlp, &x, 1e-3) {
            continue;
        }
        worst = worst.max(common::gradient_error(&mlp, &x, &y, loss, 1e-5, 1e-6));
        checked += 1;
    }
    let took = start.elapsed();
    let limit = Duration::from_secs(10);
    verdict(
        worst < 1e-4 && took < limit,
        format!("max relative error {worst:.2e} over {checked} networks ({})", within(limit, took)),
    )
}

fn averaging_algebra() -> Verdict {
    let mut failures = 0;
    for case in 0..100u64 {
        let mut rng = seed::rng(seed::derive(7, "avg", case));
        let (spec, _) = common::random_spec(&mut rng);
        let k = rng.random_range(1..=6);
        let nets: Vec<Mlp> = (0..k).map(|j| Mlp::init(&spec, seed::derive(case, "net", j as u64)).unwrap()).collect();
        let copies = vec![nets[0].clone(); k];
        let idem = average_ensemble(&copies, &AggregateWeights::uniform(k).unwrap()).unwrap();
        let pick = rng.random_range(0..k);
        let mut w = vec![0.0; k];
        w[pick] = 1.0;
        let chosen = average_ensemble(&nets, &AggregateWeights::new(w).unwrap()).unwrap();
        let pair = average_ensemble(&nets[..1].iter().chain(&nets[k - 1..]).cloned().collect::<Vec<_>>(), &AggregateWeights::uniform(2).unwrap()).unwrap();
        let midpoint_ok = pair
            .params()
            .iter()
            .zip(nets[0].params().iter().zip(nets[k - 1].params()))
            .all(|(&m, (&a, &b))| m == (a + b) / 2.0);
        if idem.params() != nets[0].params() || chosen.params() != nets[pick].params() || !midpoint_ok {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("{failures} of 100 randomized cases broke idempotence, selection or the midpoint formula"))
}

fn polynomial_oracle() -> Verdict {
    let mut rng = seed::rng(99);
    let mut worst: f64 = 0.0;
    for case in 0..1000u64 {
        let degree = rng.random_range(1..=5);
        let p = Polynomial::generate(degree, seed::derive(99, "poly", case)).unwrap();
        let x: Vec<f64> = (0..NUM_VARS).map(|_| rng.random_range(-3.0..3.0)).collect();
        let rel = common::relative_error(p.eval(&x).unwrap(), &common::exact_eval(&p, &x));
        worst = worst.max(rel);
    }
    verdict(worst < 1e-12, format!("max relative error {worst:.2e} over 1000 pairs, degrees 1-5"))
}

fn indexed(n: usize) -> Dataset {
    let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
    Dataset::new("rows", x, Array2::zeros((n, 1)), TaskKind::Regression).unwrap()
}

fn split_arithmetic() -> Verdict {
    let split = split_dataset(&indexed(569), TestSize::Count(57), 2, 0).unwrap();
    let sizes = (split.parts[0].len(), split.parts[1].len(), split.test.len());
    let mut bad = 0;
    let mut rng = seed::rng(4);
    for case in 0..100u64 {
        let k = rng.random_range(1..=8);
        let n = rng.random_range(k + 1..=2000);
        let test = rng.random_range(1..=n - k);
        let split = split_dataset(&indexed(n), TestSize::Count(test), k, case).unwrap();
        let mut seen = HashSet::new();
        let mut total = 0;
        for part in split.parts.iter().chain([&split.test]) {
            total += part.len();
            for r in 0..part.len() {
                if !seen.insert(part.features[[r, 0]] as usize) {
                    bad += 1;
                }
            }
        }
        if total != n || seen.len() != n || split.test.len() != test || split.parts.len() != k {
            bad += 1;
        }
    }
    verdict(
        sizes == (256, 256, 57) && bad == 0,
        format!("569 rows -> {}/{}/{}; {bad} violations over 100 random (N, k)", sizes.0, sizes.1, sizes.2),
    )
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn method_mean(rows: &[ReportRow], method: &str, get: impl Fn(&ReportRow) -> f64) -> f64 {
    mean(rows.iter().filter(|r| r.method == method).map(get))
}

fn regression_run(rows: &[ReportRow], took: Duration) -> Verdict {
    let limit = Duration::from_secs(300);
    let finite = rows.iter().all(|r| r.post_metric.is_finite() && r.pre_metric.is_finite());
    let none = method_mean(rows, "none", |r| r.post_metric);
    let mut best = f64::INFINITY;
    let mut parts = Vec::new();
    for m in ["average", "series", "transfer"] {
        let v = method_mean(rows, m, |r| r.post_metric);
        let ratio = v.max(none) / v.min(none);
        best = best.min(ratio);
        parts.push(format!("{m} {v:.4}"));
    }
    verdict(
        finite && best < 10.0 && took < limit,
        format!("mean test MSE none {none:.4}, {}; best ratio {best:.2} ({})", parts.join(", "), within(limit, took)),
    )
}

fn series_improvement(rows: &[ReportRow]) -> Verdict {
    let series: Vec<&ReportRow> = rows.iter().filter(|r| r.method == "series").collect();
    let better = series.iter().filter(|r| r.post_metric <= r.pre_metric).count();
    verdict(better >= 7, format!("post <= pre in {better} of {} trials", series.len()))
}

fn classification_run(rows: &[ReportRow], took: Duration) -> Verdict {
    let limit = Duration::from_secs(180);
    let f1 = |m: &str| method_mean(rows, m, |r| r.f1.unwrap());
    // every method, every trial
    let worst_auc = rows
        .iter()
        .map(|r| (r.method.as_str(), r.auc.unwrap()))
        .fold(("", f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let (series, transfer, average) = (f1("series"), f1("transfer"), f1("average"));
    verdict(
        series >= 0.90 && transfer >= 0.90 && average >= 0.75 && worst_auc.1 > 0.90 && took < limit,
        format!(
            "mean F1 series {series:.3}, transfer {transfer:.3}, average {average:.3}; lowest AUC {:.3} ({}) ({})",
            worst_auc.1,
            worst_auc.0,
            within(limit, took)
        ),
    )
}

fn transfer_protocol(rows: &[ReportRow]) -> Verdict {
    let orders: HashSet<&str> = rows.iter().filter(|r| r.method == "transfer").map(|r| r.order.as_str()).collect();
    let staged = rows
        .iter()
        .filter(|r| r.method == "transfer")
        .all(|r| r.stage_losses.starts_with("stage1=") && r.stage_losses.contains(";stage2="));

    let p = Polynomial::generate(2, 1).unwrap();
    let data = generate_dataset(&p, 300, NoiseSpec::new(0.0), DEFAULT_FEATURE_RANGE, 2).unwrap();
    let test = generate_dataset(&p, 50, NoiseSpec::new(0.0), DEFAULT_FEATURE_RANGE, 3).unwrap();
    let spec = MlpSpec::new(NUM_VARS, vec![(16, Activation::Relu); 2], 1, Activation::Identity).unwrap();
    let cfg = TrainConfig { epochs: 5, shuffle_seed: 8, ..TrainConfig::default() };
    let out = train_transfer(std::slice::from_ref(&data), &test, &spec, &cfg, 6, false).unwrap();
    let (plain, _) = nn::train(&Mlp::init(&spec, 6).unwrap(), &data, &cfg).unwrap();
    let identical = out.model.params() == plain.params();
    verdict(
        orders == HashSet::from(["forward", "reverse"]) && staged && identical,
        format!(
            "orders {:?}, per-stage MSE recorded: {staged}, single-dataset transfer bit-identical: {identical}",
            { let mut o: Vec<_> = orders.into_iter().collect(); o.sort(); o }
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("regress", "task = \"regression\"\ntrials = 3\n[data]\nsizes = [400]\n[train]\nepochs = [5]\n"),
        ("classify", "task = \"classification\"\ntrials = 3\n[train]\nepochs = [5]\n"),
    ];
    let mut same = Vec::new();
    for (cmd, text) in configs {
        let cfg = dir.path().join(format!("{cmd}.toml"));
        fs::write(&cfg, text).unwrap();
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{cmd}{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_nnagg"))
                .args([cmd, "--config", cfg.to_str().unwrap(), "--seed", "11", "--out", out.to_str().unwrap()])
                .output()
                .unwrap();
            if !status.status.success() {
                return verdict(false, format!("{cmd} failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            let files: Vec<Vec<u8>> = ["report.csv", "report.json", "summary.csv", "summary.json"]
                .iter()
                .map(|f| fs::read(out.join(f)).unwrap())
                .collect();
            outputs.push(files);
        }
        same.push((cmd, outputs[0] == outputs[1]));
    }
    verdict(
        same.iter().all(|s| s.1),
        same.iter().map(|(c, s)| format!("{c} identical: {s}")).collect::<Vec<_>>().join(", "),
    )
}

fn noise_bound() -> Verdict {
    let mut violations = 0;
    let mut rows = 0;
    for level in [1.0, 2.0] {
        for degree in 1..=5u32 {
            let p = Polynomial::generate(degree, seed::derive(5, "noise", degree as u64)).unwrap();
            let data = generate_dataset(&p, 10_000, NoiseSpec::new(level), DEFAULT_FEATURE_RANGE, degree as u64).unwrap();
            let bound = 2.0 * level * degree as f64;
            for (x, y) in data.features.rows().into_iter().zip(data.targets.column(0)) {
                rows += 1;
                if (y - p.eval(x.as_slice().unwrap()).unwrap()).abs() > bound {
                    violations += 1;
                }
            }
        }
    }
    verdict(violations == 0, format!("{violations} violations of |y - f(x)| <= 2nd in {rows} rows (10,000 per n, d)"))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    results.push((1, "gradient oracle", gradient_oracle()));
    results.push((2, "averaging algebra", averaging_algebra()));
    results.push((3, "polynomial oracle", polynomial_oracle()));
    results.push((4, "split arithmetic", split_arithmetic()));

    let start = Instant::now();
    let regression = run_regression(&ExperimentConfig::regression_default());
    let reg_took = start.elapsed();
    let start = Instant::now();
    let classification = run_classification(&ExperimentConfig::classification_default());
    let cls_took = start.elapsed();
    match &regression {
        Ok(out) => {
            results.push((5, "regression desk-scale run", regression_run(&out.rows, reg_took)));
            results.push((6, "series improvement", series_improvement(&out.rows)));
        }
        Err(e) => {
            results.push((5, "regression desk-scale run", verdict(false, e.to_string())));
            results.push((6, "series improvement", verdict(false, e.to_string())));
        }
    }
    match &classification {
        Ok(out) => results.push((7, "WDBC classification", classification_run(&out.rows, cls_took))),
        Err(e) => results.push((7, "WDBC classification", verdict(false, e.to_string()))),
    }
    match &regression {
        Ok(out) => results.push((8, "transfer protocol", transfer_protocol(&out.rows))),
        Err(e) => results.push((8, "transfer protocol", verdict(false, e.to_string()))),
    }
    results.push((9, "determinism", determinism()));
    results.push((10, "noise bound", noise_bound()));

    let mut failed = 0;
    for (n, name, v) in &results {
        println!("[{}] {n:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
