//! End-to-end runs of the `pisotile` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pisotile"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_verdicts_and_default_selection() {
    let dir = TempDir::new().unwrap();
    let cubic = dir.path().join("cubic.json");
    std::fs::write(&cubic, r#"["3","-4","-1","1"]"#).unwrap();
    let o = run(dir.path(), &["classify", path_str(&cubic), "--select", "1,2", "--select", "1"]);
    assert!(o.status.success());
    let v = read_json(&dir.path().join("classify.json"));
    assert_eq!(v["selections"][0]["pisot_family"], "yes");
    assert_eq!(v["selections"][1]["pisot_family"], "no");
    assert_eq!(v["roots"].as_array().unwrap().len(), 3);

    let golden = dir.path().join("golden.json");
    std::fs::write(&golden, r#"["-1","-1","1"]"#).unwrap();
    let v = stdout_json(&run(dir.path(), &["classify", path_str(&golden)]));
    assert_eq!(v["pisot_number"], true);
    assert_eq!(v["selections"][0]["select"], serde_json::json!([1]));
    assert_eq!(v["selections"][0]["pisot_family"], "yes");
}

#[test]
fn classify_rejects_malformed_input() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"coeffs": [1, 2]}"#).unwrap();
    assert_eq!(run(dir.path(), &["classify", path_str(&bad)]).status.code(), Some(2));
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"["-1","-1","1"]"#).unwrap();
    let o = run(dir.path(), &["classify", path_str(&good), "--select", "7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn expand_counts_tiles() {
    let dir = TempDir::new().unwrap();
    let fib = fixture("fib.json");
    let v = stdout_json(&run(dir.path(), &["expand", path_str(&fib), "--k", "8"]));
    assert_eq!(v["tiles"], 55);
    assert_eq!(v["census"], serde_json::json!([34, 21]));
    let patch = read_json(&dir.path().join("patch.json"));
    assert!(patch.is_object() || patch.is_array());

    let v = stdout_json(&run(dir.path(), &["expand", path_str(&fib), "--k", "0"]));
    assert_eq!(v["tiles"], 1);

    let svg = dir.path().join("fib.svg");
    let o = run(dir.path(), &["expand", path_str(&fib), "--k", "4", "--render", path_str(&svg)]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn expand_refuses_to_render_three_dimensions() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["product", path_str(&fixture("fib_x_fib.json")), path_str(&fixture("fib.json")), "--name", "cube.json"],
    );
    assert!(o.status.success());
    let cube = dir.path().join("cube.json");
    let svg = dir.path().join("cube.svg");
    let o = run(dir.path(), &["expand", path_str(&cube), "--k", "1", "--render", path_str(&svg)]);
    assert_eq!(o.status.code(), Some(5));
    assert!(!svg.exists());
}

#[test]
fn invalid_rule_exits_with_code_4() {
    let dir = TempDir::new().unwrap();
    let mut spec = read_json(&fixture("fib.json"));
    // Move a child outside its parent's image.
    spec["digits"]["2,1"] = serde_json::json!([[5.0]]);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, spec.to_string()).unwrap();
    let o = run(dir.path(), &["validate", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stdout_json(&o)["valid"], false);
    assert_eq!(run(dir.path(), &["expand", path_str(&bad)]).status.code(), Some(4));

    let o = run(dir.path(), &["validate", path_str(&fixture("fib.json"))]);
    assert!(o.status.success());
    let v = stdout_json(&o);
    assert_eq!(v["valid"], true);
    assert_eq!(v["primitive"], true);
    assert_eq!(v["substitution_matrix"], serde_json::json!([[1, 1], [1, 0]]));
}

#[test]
fn spectrum_reports_dense_fibonacci_deterministically() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let fib = fixture("fib.json");
    for dir in [&a, &b] {
        let o = run(dir.path(), &["spectrum", path_str(&fib), "--gamma", "0.5"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = std::fs::read(a.path().join("report.json")).unwrap();
    let tb = std::fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["relatively_dense"], true);
    assert_eq!(v["rank"], 1);
    assert_eq!(v["banner"]["pisot_family"], "yes");
    let csv = std::fs::read_to_string(a.path().join("decay_0000.csv")).unwrap();
    assert!(csv.starts_with("n,eps_n,bound_n\n"));
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn spectrum_rejects_bad_grid() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["spectrum", path_str(&fixture("fib.json")), "--grid", "0:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn meyer_trends() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["meyer", path_str(&fixture("fib.json"))]);
    assert!(o.status.success());
    assert_eq!(read_json(&dir.path().join("meyer.json"))["trend"], "stable");
    let o = run(dir.path(), &["meyer", path_str(&fixture("fib.json")), "--windows", "20"]);
    assert!(o.status.success());
    assert_eq!(read_json(&dir.path().join("meyer.json"))["trend"], "inconclusive");
}

#[test]
fn seed_tile_out_of_range_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["--seed-tile", "3", "expand", path_str(&fixture("fib.json"))]);
    assert_eq!(o.status.code(), Some(4));
}
