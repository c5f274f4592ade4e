//! End-to-end tests of the `scalekit` binary: exit codes, artifact contents,
//! and re-readability of everything it writes.

use std::path::Path;
use std::process::Command;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    run_with_env(dir, args, &[])
}

fn run_with_env(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scalekit"));
    cmd.args(args).current_dir(dir);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

#[test]
fn complexity_of_registry_model_writes_flat_csv() {
    let dir = tmp();
    let out = run_in(dir.path(), &["complexity", "EfficientNet-B0"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("EfficientNet-B0"));
    let csv = std::fs::read_to_string(dir.path().join("EfficientNet-B0_complexity.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,flops,params,acts"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "EfficientNet-B0");
    let flops: f64 = row[1].parse().unwrap();
    let params: f64 = row[2].parse().unwrap();
    let acts: f64 = row[3].parse().unwrap();
    assert!((flops / 0.39e9 - 1.0).abs() < 0.03);
    assert!((params / 5.3e6 - 1.0).abs() < 0.03);
    assert!((acts / 6.7e6 - 1.0).abs() < 0.10);
}

#[test]
fn unknown_model_exits_2() {
    let dir = tmp();
    let out = run_in(dir.path(), &["complexity", "NoSuchNet-9GF"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("unknown model"), "{}", out.stderr);
}

#[test]
fn invalid_spec_exits_3_listing_violations() {
    let dir = tmp();
    let bad = r#"{
        "schema": "scalekit/1",
        "name": "bad",
        "input_resolution": 224,
        "stages": [{
            "depth": 0, "width": 64, "group_width": 8,
            "bottleneck_ratio": 1.0, "stride": 1,
            "block_kind": "PlainConv", "kernel": 3
        }]
    }"#;
    let path = dir.path().join("bad.json");
    std::fs::write(&path, bad).unwrap();
    let out = run_in(dir.path(), &["complexity", path.to_str().unwrap()]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("depth must be >= 1"), "{}", out.stderr);
}

#[test]
fn malformed_json_exits_3_with_location() {
    let dir = tmp();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run_in(dir.path(), &["complexity", path.to_str().unwrap()]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("line"), "{}", out.stderr);
}

#[test]
fn scale_by_one_reproduces_the_input_spec() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &["scale", "RegNetY-500MF", "--policy", "dwr", "--s", "1"],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let written = std::fs::read_to_string(dir.path().join("RegNetY-500MF.json")).unwrap();
    let spec = scalekit::deserialize(&written).unwrap();
    assert_eq!(spec, scalekit::registry_model("RegNetY-500MF").unwrap());
}

#[test]
fn scale_rejects_conflicting_strategy_flags() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &[
            "scale",
            "EfficientNet-B0",
            "--policy",
            "w",
            "--alpha",
            "0.8",
            "--s",
            "2",
        ],
    );
    assert_eq!(out.code, 64, "{}", out.stderr);
}

#[test]
fn scale_rejects_alpha_outside_unit_interval() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &["scale", "EfficientNet-B0", "--alpha", "1.5", "--s", "2"],
    );
    assert_eq!(out.code, 64);
    assert!(out.stderr.contains("alpha"), "{}", out.stderr);
}

#[test]
fn fast_scale_hits_the_flop_target_within_tolerance() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &["scale", "RegNetY-500MF", "--alpha", "0.8", "--s", "10"],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let comparison =
        std::fs::read_to_string(dir.path().join("RegNetY-500MF_a0.8_s10_comparison.csv")).unwrap();
    let flops_row: Vec<&str> = comparison
        .lines()
        .find(|l| l.starts_with("flops,"))
        .unwrap()
        .split(',')
        .collect();
    let scaled: f64 = flops_row[2].parse().unwrap();
    let achieved: f64 = flops_row[3].parse().unwrap();
    assert!((scaled / 5e9 - 1.0).abs() < 0.15, "scaled = {scaled}");
    assert!(
        (achieved / 10.0 - 1.0).abs() < 0.10,
        "achieved = {achieved}"
    );
    // the scaled spec is re-readable and valid
    let written = std::fs::read_to_string(dir.path().join("RegNetY-500MF_a0.8_s10.json")).unwrap();
    let spec = scalekit::deserialize(&written).unwrap();
    assert!(scalekit::validate_network(&spec).is_empty());
}

#[test]
fn sweep_writes_one_row_per_policy_and_scale() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "EfficientNet-B0",
            "--policies",
            "w,dwr",
            "--s-grid",
            "1,2,4",
        ],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let csv = std::fs::read_to_string(dir.path().join("EfficientNet-B0_sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "name,policy,alpha,s,flops,params,acts,quantized");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].contains(",w,"));
    assert!(lines[4].contains(",dwr,"));
}

#[test]
fn sweep_with_single_point_emits_single_row() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "EfficientNet-B0",
            "--policies",
            "w",
            "--s-grid",
            "2",
        ],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let csv = std::fs::read_to_string(dir.path().join("EfficientNet-B0_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn sweep_with_empty_grid_is_a_usage_error() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "EfficientNet-B0",
            "--policies",
            "w",
            "--s-grid",
            "",
        ],
    );
    assert_eq!(out.code, 64, "{}{}", out.stdout, out.stderr);
    let missing = run_in(dir.path(), &["sweep", "EfficientNet-B0", "--policies", "w"]);
    assert_eq!(missing.code, 64);
}

#[test]
fn sweep_rejects_decreasing_grid() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "EfficientNet-B0",
            "--policies",
            "w",
            "--s-grid",
            "4,2",
        ],
    );
    assert_eq!(out.code, 64);
}

#[test]
fn sample_is_byte_reproducible_and_respects_the_window() {
    let dir_a = tmp();
    let dir_b = tmp();
    let args = [
        "sample",
        "--kind",
        "Y",
        "--flops",
        "500MF",
        "--tolerance",
        "0.1",
        "--count",
        "8",
        "--seed",
        "7",
    ];
    let out_a = run_in(dir_a.path(), &args);
    assert_eq!(out_a.code, 0, "{}", out_a.stderr);
    let out_b = run_in(dir_b.path(), &args);
    assert_eq!(out_b.code, 0);
    let index_name = "regnety_sampled_seed7_index.csv";
    let index_a = std::fs::read(dir_a.path().join(index_name)).unwrap();
    let index_b = std::fs::read(dir_b.path().join(index_name)).unwrap();
    assert_eq!(index_a, index_b, "index must be byte-identical across runs");
    let text = String::from_utf8(index_a).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let flops: f64 = fields[7].parse().unwrap();
        assert!((450e6..=550e6).contains(&flops), "{flops}");
        // every written spec file is re-readable
        let spec_path = dir_a.path().join(format!("{}.json", fields[0]));
        let spec = scalekit::deserialize(&std::fs::read_to_string(spec_path).unwrap()).unwrap();
        assert!(scalekit::validate_network(&spec).is_empty());
    }
}

#[test]
fn sample_with_unreachable_target_exits_4() {
    let dir = tmp();
    let out = run_in(dir.path(), &["sample", "--kind", "Y", "--flops", "1MF"]);
    assert_eq!(out.code, 4, "{}{}", out.stdout, out.stderr);
    assert!(out.stderr.contains("exhausted"), "{}", out.stderr);
}

const TABLE_CSV: &str = "model,strategy,flops,params,acts,epoch_time_min,batch_size\n\
EN-B0,compound,400000000,5300000,6700000,2.8,1024\n\
EN-B1,compound,700000000,7800000,10900000,4.6,1024\n\
EN-B2,compound,1000000000,9100000,13800000,5.9,1024\n\
EN-B3,compound,1800000000,12200000,23800000,9.5,1024\n\
EN-B4,compound,4400000000,19300000,49500000,19.2,1024\n\
EN-B5,compound,10300000000,30400000,98900000,40.8,1024\n";

#[test]
fn fit_runtime_then_predict_round_trips() {
    let dir = tmp();
    std::fs::write(dir.path().join("times.csv"), TABLE_CSV).unwrap();
    let fit = run_in(dir.path(), &["fit-runtime", "times.csv"]);
    assert_eq!(fit.code, 0, "{}", fit.stderr);
    assert!(fit.stdout.contains("pooled r"), "{}", fit.stdout);
    let model_text = std::fs::read_to_string(dir.path().join("times_model.json")).unwrap();
    let model: scalekit::RuntimeModel = serde_json::from_str(&model_text).unwrap();
    assert!(model.fit_r > 0.99);
    // predicting the first row's model lands near its measured time
    let predict = run_in(
        dir.path(),
        &["predict", "times_model.json", "EfficientNet-B0"],
    );
    assert_eq!(predict.code, 0, "{}", predict.stderr);
    let minutes: f64 = predict
        .stdout
        .split("epoch time ")
        .nth(1)
        .and_then(|rest| rest.split(' ').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        (minutes - 2.8).abs() <= 0.15 * 2.8,
        "predicted {minutes} min, expected within 15% of 2.8"
    );
}

#[test]
fn fit_runtime_reports_bad_rows_with_line_numbers() {
    let dir = tmp();
    let bad = "model,strategy,flops,params,acts,epoch_time_min,batch_size\n\
               a,w,1e9,5e6,6e6,2.8,256\n\
               b,w,1e9,5e6,not-a-number,3.1,256\n";
    std::fs::write(dir.path().join("bad.csv"), bad).unwrap();
    let out = run_in(dir.path(), &["fit-runtime", "bad.csv"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("row 3"), "{}", out.stderr);
}

#[test]
fn missing_measurement_file_exits_2() {
    let dir = tmp();
    let out = run_in(dir.path(), &["fit-runtime", "nope.csv"]);
    assert_eq!(out.code, 2);
}

#[test]
fn registry_env_dir_resolves_extra_models() {
    let dir = tmp();
    let registry = tmp();
    let spec = scalekit::registry_model("RegNetY-500MF").unwrap();
    let mut renamed = spec.clone();
    renamed.name = "MyNet".to_string();
    std::fs::write(
        registry.path().join("MyNet.json"),
        scalekit::serialize(&renamed),
    )
    .unwrap();
    let out = run_with_env(
        dir.path(),
        &["complexity", "MyNet"],
        &[("SCALEKIT_REGISTRY", registry.path().to_str().unwrap())],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("MyNet"));
}

#[test]
fn json_lines_format_emits_parseable_objects() {
    let dir = tmp();
    let out = run_in(
        dir.path(),
        &["complexity", "EfficientNet-B0", "--format", "json-lines"],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let text =
        std::fs::read_to_string(dir.path().join("EfficientNet-B0_complexity.jsonl")).unwrap();
    for line in text.lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["name"], "EfficientNet-B0");
        assert!(value["flops"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir_a = tmp();
    let dir_b = tmp();
    for dir in [&dir_a, &dir_b] {
        let out = run_in(
            dir.path(),
            &[
                "sweep",
                "RegNetZ-500MF",
                "--policies",
                "w,dWr,dwr",
                "--s-grid",
                "1,2,4,8,16",
            ],
        );
        assert_eq!(out.code, 0, "{}", out.stderr);
    }
    let a = std::fs::read(dir_a.path().join("RegNetZ-500MF_sweep.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("RegNetZ-500MF_sweep.csv")).unwrap();
    assert_eq!(a, b);
}
