use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bench(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bench"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("H2DIST_")) {
        cmd.env_remove(k);
    }
    cmd.envs(env.iter().copied());
    cmd.output().expect("bench runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn dense_level0_is_an_8_by_8_report_without_compression() {
    let r = json(&bench(&["run", "--level", "0", "--variant", "dense"], &[]));
    assert_eq!(r["n"], 8);
    assert_eq!(r["dense_scalars"], 64);
    assert_eq!(r["storage"]["total"], 0);
    assert_eq!(r["errors"], serde_json::json!({}));
    assert!(r.get("nodes").is_none());
    assert!(r["timing"]["setup_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn h2_against_dense_reports_an_error_below_tolerance() {
    let r = json(&bench(&["run", "--level", "2", "--variant", "h2", "--m", "4", "--eta", "1", "--verify-dense"], &[]));
    let e = r["errors"]["dense"]["max"].as_f64().unwrap();
    assert!(e < 1e-3);
    assert!(r["errors"].get("sequential").is_none());
}

#[test]
fn distributed_against_sequential_is_exact_to_1e12() {
    let r = json(&bench(&["run", "--level", "2", "--variant", "distributed", "--p", "4", "--verify-sequential"], &[]));
    assert!(r["errors"]["sequential"]["max"].as_f64().unwrap() <= 1e-12);
    let nodes = r["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 4);
    let indices: u64 = nodes.iter().map(|n| n["indices"].as_u64().unwrap()).sum();
    assert_eq!(indices, 128);
    assert!(nodes.iter().all(|n| n["messages"]["build"]["total"]["messages"].as_u64().unwrap() > 0));
}

#[test]
fn exit_codes_distinguish_usage_and_verification() {
    assert_eq!(bench(&["run", "--p", "2"], &[]).status.code(), Some(2));
    assert_eq!(bench(&["run", "--m", "0"], &[]).status.code(), Some(2));
    assert_eq!(bench(&["run", "--level", "x"], &[]).status.code(), Some(2));
    assert_eq!(bench(&["frobnicate"], &[]).status.code(), Some(2));
    let fail = bench(&["run", "--level", "3", "--m", "2", "--verify-dense", "--vectors", "1"], &[]);
    assert_eq!(fail.status.code(), Some(3));
    // The report is still written before the verdict.
    let r: Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert!(r["errors"]["dense"]["max"].as_f64().unwrap() >= 1e-3);
}

#[test]
fn reports_are_byte_stable_apart_from_timing() {
    let args = ["run", "--level", "2", "--variant", "shared", "--p", "3", "--m", "3", "--verify-sequential"];
    let a = without_timing(json(&bench(&args, &[])));
    let b = without_timing(json(&bench(&args, &[])));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn flags_beat_environment_beats_config_file() {
    let cfg = scratch("config.toml");
    std::fs::write(&cfg, "level = 2\nm = 2\nvariant = \"distributed\"\np = 2\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let r = json(&bench(&["run", "--config", cfg], &[]));
    assert_eq!((r["n"].as_u64(), r["config"]["m"].as_u64()), (Some(128), Some(2)));
    let r = json(&bench(&["run", "--config", cfg], &[("H2DIST_LEVEL", "1"), ("H2DIST_P", "4")]));
    assert_eq!((r["n"].as_u64(), r["nodes"].as_array().unwrap().len()), (Some(32), 4));
    let r = json(&bench(&["run", "--config", cfg, "--level", "0"], &[("H2DIST_LEVEL", "1")]));
    assert_eq!(r["n"], 8);
    std::fs::write(scratch("bad.toml"), "colour = 3\n").unwrap();
    let bad = bench(&["run", "--config", scratch("bad.toml").to_str().unwrap()], &[]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let path = scratch("report.json");
    let out = bench(&["run", "--level", "1", "--out", path.to_str().unwrap()], &[]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["n"], 32);
}

fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let headers = rd.headers().unwrap().clone();
    rd.records()
        .map(|r| headers.iter().map(String::from).zip(r.unwrap().iter().map(String::from)).collect())
        .collect()
}

#[test]
fn m_sweep_has_a_strictly_decreasing_error_column() {
    let stem = scratch("m_sweep");
    let out = bench(
        &["sweep", "--level", "3", "--axis", "m", "--values", "2,3,4", "--vectors", "3", "--out", stem.to_str().unwrap()],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&std::fs::read_to_string(stem.with_extension("csv")).unwrap());
    let errs: Vec<f64> = rows.iter().map(|r| r["error_dense"].parse().unwrap()).collect();
    assert_eq!(errs.len(), 3);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap()).unwrap();
    assert_eq!(doc["axis"], "m");
    assert_eq!(doc["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn p_sweep_rows_agree_and_level_sweep_reports_growth() {
    let out = bench(
        &["sweep", "--level", "3", "--variant", "distributed", "--axis", "p", "--values", "1,2,4,8", "--vectors", "2", "--m", "3"],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r["deviation_from_first"].parse::<f64>().unwrap() <= 1e-12);
    }

    let out = bench(&["sweep", "--axis", "level", "--values", "1,2", "--m", "3"], &[]);
    let rows = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(rows[0]["growth"], "");
    let growth: f64 = rows[1]["growth"].parse().unwrap();
    let spi: Vec<f64> = rows.iter().map(|r| r["scalars_per_index"].parse().unwrap()).collect();
    assert!((growth - spi[1] / spi[0]).abs() < 1e-12);
}

#[test]
fn dump_trees_outlines_are_consistent() {
    let out = bench(&["dump-trees", "--level", "2", "--format", "json"], &[]);
    let doc = json(&out);
    let clusters = doc[0]["clusters"].as_array().unwrap();
    assert_eq!(clusters[0]["indices"], 128);
    let ids: std::collections::HashSet<&str> = clusters.iter().map(|c| c["id"].as_str().unwrap()).collect();
    for c in clusters {
        let kids = c["children"].as_array().unwrap();
        assert!(kids.iter().all(|k| ids.contains(k.as_str().unwrap())));
        if !kids.is_empty() {
            let sum: u64 = kids
                .iter()
                .map(|k| clusters.iter().find(|d| d["id"] == *k).unwrap()["indices"].as_u64().unwrap())
                .sum();
            assert_eq!(Some(sum), c["indices"].as_u64());
        }
    }

    let shared = json(&bench(&["dump-trees", "--level", "2", "--variant", "shared", "--p", "4", "--format", "json"], &[]));
    assert_eq!(shared[0]["clusters"][0]["id"], "s:0");
    assert_eq!(shared[0]["clusters"][0]["indices"], 128);

    let text = bench(&["dump-trees", "--level", "1", "--variant", "distributed", "--p", "2"], &[]);
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.starts_with("# node 0\n0:0 n=16"));
    assert!(text.contains("# node 1\n1:0 n=16"));
}

#[test]
fn helmholtz_runs_against_dense() {
    let r = json(&bench(
        &["run", "--level", "3", "--kernel", "helmholtz", "--kappa", "2", "--verify-dense", "--vectors", "2"],
        &[],
    ));
    assert!(r["errors"]["dense"]["max"].as_f64().unwrap() < 1e-3);
}
