use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CHAIN: &str = "[nodes]\nA observed\nB observed\nC observed\n[edges]\nA -> B\nB -> C\n";

fn causalnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causalnet")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn prior() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/cardio.graph")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Simulated data in `dir/sim`, returned as (data, schema).
fn simulated(dir: &Path) -> (String, String) {
    let out = p(dir, "sim");
    let o = causalnet(&["simulate", "--preset", "default", "--seed", "2", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (format!("{out}/data.csv"), format!("{out}/data.schema"))
}

#[test]
fn dsep_answers_on_a_chain() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "chain.graph", CHAIN);
    let o = causalnet(&["dsep", "--graph", &g, "--x", "A", "--y", "C", "--z", "B"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "d-separated: true\n");
    let o = causalnet(&["dsep", "--graph", &g, "--x", "A", "--y", "C"]);
    assert_eq!(stdout(&o), "d-separated: false\n");
}

#[test]
fn exit_codes_separate_usage_from_runtime_errors() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "chain.graph", CHAIN);
    assert_eq!(causalnet(&["--version"]).status.code(), Some(0));
    assert!(stdout(&causalnet(&["--version"])).starts_with("causalnet "));
    assert_eq!(causalnet(&["dsep", "--graph", &g]).status.code(), Some(2));
    assert_eq!(causalnet(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(causalnet(&["--threads", "0", "dsep", "--graph", &g, "--x", "A", "--y", "C"]).status.code(), Some(2));
    let missing = p(dir.path(), "absent.graph");
    assert_eq!(causalnet(&["dsep", "--graph", &missing, "--x", "A", "--y", "C"]).status.code(), Some(1));
    let bad = write(dir.path(), "cycle.graph", "[nodes]\nA observed\nB observed\n[edges]\nA -> B\nB -> A\n");
    assert_eq!(causalnet(&["dsep", "--graph", &bad, "--x", "A", "--y", "B"]).status.code(), Some(1));
}

#[test]
fn classify_reports_the_mechanism() {
    let dir = TempDir::new().unwrap();
    let g = write(
        dir.path(),
        "m.graph",
        "[nodes]\nY observed\nX partially_observed\nR_X indicator=X\n[edges]\nY -> X\nX -> R_X\n",
    );
    let o = causalnet(&["classify", "--graph", &g]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("class: MNAR"), "{text}");
    assert!(text.contains("recoverable: false"), "{text}");
}

#[test]
fn sem_is_reproducible_and_replayable() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = simulated(dir.path());
    let prior = prior();
    let run = |out: &str, threads: &str| {
        let o = causalnet(&[
            "--threads", threads, "sem", "--data", &data, "--schema", &schema, "--graph", prior.to_str().unwrap(),
            "--seed", "9", "--max-iterations", "3", "--out", out,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (p(dir.path(), "a"), p(dir.path(), "b"));
    run(&a, "1");
    run(&b, "3");
    for f in ["sem.graph", "sem.network", "trace.txt", "manifest.txt", "summary.txt"] {
        assert_eq!(fs::read(format!("{a}/{f}")).unwrap(), fs::read(format!("{b}/{f}")).unwrap(), "{f}");
    }
    let manifest = fs::read_to_string(format!("{a}/manifest.txt")).unwrap();
    assert!(manifest.contains("\nseed=9\n"));
    assert!(manifest.contains("output.sem.graph=sha256:"));
    assert!(!manifest.contains("threads"));

    let o = causalnet(&["replay", "--manifest", &format!("{a}/manifest.txt"), "--out", &p(dir.path(), "r")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("outputs identical"));

    // a changed input is caught before anything runs
    let mut csv = fs::read_to_string(&data).unwrap();
    csv.push('\n');
    fs::write(&data, csv).unwrap();
    let o = causalnet(&["replay", "--manifest", &format!("{a}/manifest.txt"), "--out", &p(dir.path(), "r2")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("changed"));
    assert!(!dir.path().join("r2").exists());
}

#[test]
fn nothing_is_written_outside_out() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = simulated(dir.path());
    let work = dir.path().join("cwd");
    fs::create_dir(&work).unwrap();
    let out = p(dir.path(), "fitted");
    let o = Command::new(env!("CARGO_BIN_EXE_causalnet"))
        .current_dir(&work)
        .args(["sem", "--data", &data, "--schema", &schema, "--graph", prior().to_str().unwrap()])
        .args(["--seed", "1", "--max-iterations", "2", "--out", &out])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_dir(&work).unwrap().count(), 0);
    let mut top: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    top.sort();
    assert_eq!(top, ["cwd", "fitted", "sim"]);
    for f in ["sem.graph", "sem.network", "trace.txt", "manifest.txt", "summary.txt"] {
        assert!(dir.path().join("fitted").join(f).exists(), "{f}");
    }
}

#[test]
fn predictions_cover_every_row() {
    let dir = TempDir::new().unwrap();
    let (data, schema) = simulated(dir.path());
    let net = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/cardio_truth.network");
    let out = p(dir.path(), "pred");
    let o = causalnet(&[
        "predict", "--network", net.to_str().unwrap(), "--data", &data, "--schema", &schema, "--target", "cvds",
        "--level", "yes", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(&data).unwrap().lines().count() - 1;
    let preds = fs::read_to_string(format!("{out}/predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), rows + 1);
    for line in preds.lines().skip(1) {
        let score: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&score));
    }
}
