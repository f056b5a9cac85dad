use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ciphermimic"))
        .current_dir(dir)
        .env_remove("CIPHERMIMIC_OUT")
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic_and_writes_a_manifest() {
    let t = tempfile::tempdir().unwrap();
    let args = ["gen", "--cipher", "des:rounds=1", "--count", "2^10", "--test-count", "2^10", "--seed", "1"];
    let a = run(t.path(), &[&args[..], &["--out", "a"]].concat());
    let b = run(t.path(), &[&args[..], &["--out", "b"]].concat());
    assert_eq!((code(&a), code(&b)), (0, 0), "{}", String::from_utf8_lossy(&a.stderr));
    for f in ["train.ncps", "test.ncps"] {
        let x = std::fs::read(t.path().join("a").join(f)).unwrap();
        assert_eq!(x, std::fs::read(t.path().join("b").join(f)).unwrap());
    }
    let m = json(&t.path().join("a/gen-manifest.json"));
    assert_eq!(m["config"]["seed"], 1);
    assert_eq!(m["config"]["cipher"]["name"], "des");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    let ma = m["outputs"][1]["sha256"].clone();
    let mb = json(&t.path().join("b/gen-manifest.json"))["outputs"][1]["sha256"].clone();
    assert_eq!(ma, mb);

    // Re-running from the manifest reproduces the files.
    let c = run(t.path(), &["gen", "--config", "a/gen-manifest.json", "--out", "c"]);
    assert_eq!(code(&c), 0);
    assert_eq!(
        std::fs::read(t.path().join("a/train.ncps")).unwrap(),
        std::fs::read(t.path().join("c/train.ncps")).unwrap()
    );
}

#[test]
fn gen_hitag2_widths() {
    let t = tempfile::tempdir().unwrap();
    let o = run(t.path(), &["gen", "--cipher", "hitag2", "--count", "2^10", "--format", "jsonl", "--out", "h"]);
    assert_eq!(code(&o), 0);
    let m = json(&t.path().join("h/gen-manifest.json"));
    assert_eq!((m["summary"]["input_bits"].as_u64(), m["summary"]["output_bits"].as_u64()), (Some(48), Some(1)));
    let text = std::fs::read_to_string(t.path().join("h/train.jsonl")).unwrap();
    assert_eq!(text.lines().next().unwrap(), r#"{"in_bits":48,"out_bits":1}"#);
    assert_eq!(text.lines().count(), 1025);
}

#[test]
fn gen_beyond_the_input_space_fails_with_a_config_code() {
    let t = tempfile::tempdir().unwrap();
    let o = run(t.path(), &["gen", "--cipher", "identity:width=4", "--count", "17", "--test-count", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exhausted"));
}

#[test]
fn train_identity_toy_from_a_config_file() {
    let t = tempfile::tempdir().unwrap();
    std::fs::write(
        t.path().join("exp.toml"),
        r#"
seed = 3
out_dir = "toy"

[cipher]
name = "identity"
width = 12

[data]
train_count = "2^6"
test_count = "2^6"

[suite]
architectures = ["fat_shallow"]
activations = ["sigmoid"]
"#,
    )
    .unwrap();
    assert_eq!(code(&run(t.path(), &["gen", "-c", "exp.toml"])), 0);
    let o = run(t.path(), &["train", "-c", "exp.toml"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&t.path().join("toy/fat_shallow-sigmoid.report.json"));
    assert_eq!(report["final_cmr"], 1.0);
    let curve = std::fs::read_to_string(t.path().join("toy/fat_shallow-sigmoid.curve.csv")).unwrap();
    assert_eq!(curve.lines().next().unwrap(), "epoch,loss,cmr");
    assert_eq!(curve.lines().count(), report["epochs_run"].as_u64().unwrap() as usize + 1);
    assert!(t.path().join("toy/fat_shallow-sigmoid.ncmn").is_file());
    assert!(t.path().join("toy/train-manifest.json").is_file());
}

#[test]
fn activation_sweep_writes_one_curve_each() {
    let t = tempfile::tempdir().unwrap();
    let gen = run(t.path(), &["gen", "--cipher", "des:rounds=1", "--count", "512", "--test-count", "256", "--out", "s"]);
    assert_eq!(code(&gen), 0);
    let o = run(
        t.path(),
        &["train", "--out", "s", "--activation", "sigmoid,tanh,relu", "--epochs", "2", "--jobs", "2"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for act in ["sigmoid", "tanh", "relu"] {
        assert!(t.path().join(format!("s/fat_shallow-{act}.curve.csv")).is_file());
    }
}

#[test]
fn train_rejects_mismatched_widths_and_missing_files() {
    let t = tempfile::tempdir().unwrap();
    run(t.path(), &["gen", "--cipher", "identity:width=8", "--count", "32", "--test-count", "32", "--out", "a"]);
    run(t.path(), &["gen", "--cipher", "identity:width=9", "--count", "32", "--test-count", "32", "--out", "b"]);
    let o = run(t.path(), &["train", "--train-data", "a/train.ncps", "--test-data", "b/test.ncps", "--epochs", "1"]);
    assert_eq!(code(&o), 1);
    let o = run(t.path(), &["train", "--cipher", "hitag2", "--out", "a", "--epochs", "1"]);
    assert_eq!(code(&o), 1);
    let o = run(t.path(), &["train", "--out", "nowhere"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn eval_and_compare() {
    let t = tempfile::tempdir().unwrap();
    let o = run(
        t.path(),
        &["eval", "--cipher", "identity:width=12", "--m1-start", "6", "--m2", "6", "--max-comp-data", "6", "--out", "id"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ind = json(&t.path().join("id/indicator.json"));
    assert_eq!(ind["cmr"], 1.0);
    assert_eq!(ind["comp_data"], 6);
    for key in ["cipher", "comp_time", "best_architecture", "base_match_rate", "history"] {
        assert!(ind.get(key).is_some(), "{key}");
    }

    // Hand-written indicators shaped like the three ciphers.
    let write = |name: &str, cmr: f64, base: f64, data: u32, time: u64| {
        let v = serde_json::json!({
            "cipher": name, "cmr": cmr, "comp_data": data, "comp_time": time,
            "best_architecture": "fat_shallow/sigmoid", "base_match_rate": base, "history": []
        });
        std::fs::write(t.path().join(format!("{name}.json")), v.to_string()).unwrap();
    };
    write("des-r1", 0.997, 0.75, 16, 1 << 19);
    write("hitag2", 0.98, 0.5, 20, 1 << 22);
    write("des-r3", 0.50, 0.5, 20, 1 << 30);
    let o = run(t.path(), &["compare", "des-r1.json", "hitag2.json", "des-r3.json", "--out", "cmp"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(t.path().join("cmp/ranking.csv")).unwrap();
    let order: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(order, ["des-r3", "hitag2", "des-r1"]);
    assert!(stdout(&o).contains("hitag2"));
}

#[test]
fn compare_errors() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(t.path(), &["compare"])), 1);
    std::fs::write(t.path().join("bad.json"), "{").unwrap();
    assert_eq!(code(&run(t.path(), &["compare", "bad.json"])), 2);
    assert_eq!(code(&run(t.path(), &["compare", "missing.json"])), 1);
    assert_eq!(code(&run(t.path(), &["bogus"])), 1);
    assert_eq!(code(&run(t.path(), &["--help"])), 0);
}

#[test]
fn output_directory_from_the_environment() {
    let t = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ciphermimic"))
        .current_dir(t.path())
        .env("CIPHERMIMIC_OUT", "from-env")
        .args(["gen", "--cipher", "identity:width=8", "--count", "16", "--test-count", "16"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(t.path().join("from-env/train.ncps").is_file());
}

#[test]
fn report_collects_curves_and_sweeps() {
    let t = tempfile::tempdir().unwrap();
    run(t.path(), &["gen", "--cipher", "identity:width=10", "--count", "64", "--test-count", "64", "--out", "r"]);
    assert_eq!(code(&run(t.path(), &["train", "--out", "r", "--epochs", "3"])), 0);
    let e = run(
        t.path(),
        &["eval", "--cipher", "identity:width=10", "--m1-start", "4", "--m2", "5", "--max-comp-data", "5", "--epochs", "3", "--out", "r"],
    );
    assert_eq!(code(&e), 0);
    let o = run(t.path(), &["report", "r", "--out", "rep"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let curves = std::fs::read_to_string(t.path().join("rep/curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 4);
    let sweep = std::fs::read_to_string(t.path().join("rep/sweep.csv")).unwrap();
    assert!(sweep.lines().nth(1).unwrap().starts_with("r,identity10,4,"));
    assert_eq!(code(&run(t.path(), &["report", "nope"])), 1);
}
