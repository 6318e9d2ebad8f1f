use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nnagg::nn::{Activation, Mlp, MlpSpec};

fn nnagg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnagg")).args(args).output().unwrap()
}

fn tiny_config(dir: &Path, task: &str) -> String {
    let path = dir.join(format!("{task}.toml"));
    let data = if task == "regression" { "[data]\nsizes = [120]\n" } else { "" };
    fs::write(
        &path,
        format!("task = \"{task}\"\ntrials = 2\n{data}[model]\nwidths = [6]\n[train]\nepochs = [2]\n"),
    )
    .unwrap();
    path.display().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(nnagg(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(nnagg(&["regress", "--bogus"]).status.code(), Some(2));
    assert_eq!(nnagg(&[]).status.code(), Some(2));
    assert_eq!(nnagg(&["aggregate", "--method", "median", "a.bin", "--out", "b.bin"]).status.code(), Some(2));
}

#[test]
fn missing_config_is_named() {
    let out = nnagg(&["regress", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cfg"));
}

#[test]
fn unknown_method_is_an_error() {
    let out = nnagg(&["classify", "--method", "median"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("median"));
}

#[test]
fn aggregate_writes_the_mean_model() {
    let dir = tempfile::tempdir().unwrap();
    let spec = MlpSpec::new(3, vec![(4, Activation::Relu)], 1, Activation::Identity).unwrap();
    let a = Mlp::init(&spec, 1).unwrap();
    let b = Mlp::init(&spec, 2).unwrap();
    let (pa, pb, pc) = (dir.path().join("m1.bin"), dir.path().join("m2.bin"), dir.path().join("m3.bin"));
    a.save(&pa).unwrap();
    b.save(&pb).unwrap();
    let out = nnagg(&[
        "aggregate", "--method", "average",
        pa.to_str().unwrap(), pb.to_str().unwrap(),
        "--out", pc.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c = Mlp::load(&pc).unwrap();
    for i in 0..c.param_count() {
        assert_eq!(c.params()[i], (a.params()[i] + b.params()[i]) / 2.0);
    }
}

#[test]
fn classify_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "classification");
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = nnagg(&[
            "classify", "--config", &cfg, "--trials", "5", "--seed", "7",
            "--out", out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        reports.push((
            fs::read(out_dir.join("report.csv")).unwrap(),
            fs::read(out_dir.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports[0].0.clone()).unwrap();
    // header plus 5 trials of 6 methods, transfer twice
    assert_eq!(text.lines().count(), 1 + 5 * 7);
}

#[test]
fn gen_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("poly.csv");
    let model = dir.path().join("m.bin");
    let out = nnagg(&["gen-data", "--degree", "3", "--size", "50", "--noise", "1", "--seed", "4", "--out", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,x2,x3,x4,x5,x6,x7,y");
    assert_eq!(text.lines().count(), 51);

    let out = nnagg(&["train", "--data", data.to_str().unwrap(), "--epochs", "2", "--width", "5", "--out", model.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = nnagg(&["eval-model", model.to_str().unwrap(), "--data", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("mse "));
}

#[test]
fn eval_model_on_wdbc() {
    let dir = tempfile::tempdir().unwrap();
    let wdbc = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/wdbc.data");
    let model = dir.path().join("c.bin");
    let out = nnagg(&["train", "--data", wdbc.to_str().unwrap(), "--format", "wdbc", "--epochs", "3", "--width", "8", "--out", model.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = nnagg(&["eval-model", model.to_str().unwrap(), "--data", wdbc.to_str().unwrap(), "--format", "wdbc"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("accuracy ") && stdout.contains("auc "));
}

#[test]
fn regress_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), "regression");
    let out_dir = dir.path().join("out");
    let out = nnagg(&["regress", "--config", &cfg, "--method", "series,none", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["report.csv", "report.json", "summary.csv", "summary.json", "timings.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    // task mismatch between config and subcommand
    let out = nnagg(&["classify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
}
