use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sheetstack::synth::{retail_corpus, RetailOptions};

fn bin(data_root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sheetstack"))
        .arg("--data-root")
        .arg(data_root)
        .args(args)
        .env_remove("SHEETSTACK_WINDOW")
        .env_remove("SHEETSTACK_SEED")
        .env_remove("SHEETSTACK_NORMALIZE")
        .output()
        .expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_corpus(dir: &Path, sheets: usize) -> Vec<PathBuf> {
    retail_corpus(RetailOptions { sheets, ..RetailOptions::default() })
        .into_iter()
        .map(|s| {
            let path = dir.join(&s.name);
            std::fs::write(&path, &s.csv).unwrap();
            path
        })
        .collect()
}

#[test]
fn ingest_feed_command_series_dumps() {
    let files = tempfile::tempdir().unwrap();
    let data = tempfile::tempdir().unwrap();
    let paths = write_corpus(files.path(), 12);
    let mut args = vec!["ingest", "R1"];
    args.extend(paths.iter().map(|p| p.to_str().unwrap()));
    let runs = ok(bin(data.path(), &args));
    let runs: Vec<Value> = runs.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(runs.len(), 12);
    assert_eq!(runs[11]["window"]["count"], 10);

    let feed = ok(bin(data.path(), &["feed", "R1"]));
    let feed_again = ok(bin(data.path(), &["feed", "R1"]));
    assert_eq!(feed, feed_again);
    let parsed: Value = serde_json::from_str(&feed).unwrap();
    assert_eq!(parsed["user"], "default");

    let outcome = ok(bin(data.path(), &["command", "--user", "ana", "use", "attributes", "Sales", "for", "R1"]));
    let outcome: Value = serde_json::from_str(&outcome).unwrap();
    assert_eq!(outcome["config"]["attribute_allowlist"], serde_json::json!(["Sales"]));
    let user_feed = ok(bin(data.path(), &["feed", "R1", "--user", "ana"]));
    assert_eq!(serde_json::from_str::<Value>(&user_feed).unwrap(), outcome["feed"]);

    let key = parsed["insights"][0]["series_key"].as_str().unwrap().to_string();
    let detail: Value = serde_json::from_str(&ok(bin(data.path(), &["series", &key, "--report", "R1"]))).unwrap();
    assert_eq!(detail["series_key"], key.as_str());

    let stats = ok(bin(data.path(), &["dump-stats", "R1"]));
    assert!(stats.starts_with("group\tentity\tattribute"));
    let series = ok(bin(data.path(), &["dump-series", "R1"]));
    assert!(series.lines().any(|l| l.starts_with("NTS\tP1000\tSales\t")));
}

#[test]
fn global_flags_and_env() {
    let files = tempfile::tempdir().unwrap();
    let data = tempfile::tempdir().unwrap();
    let paths = write_corpus(files.path(), 6);
    let mut args = vec!["ingest", "R1"];
    args.extend(paths.iter().map(|p| p.to_str().unwrap()));
    ok(bin(data.path(), &args));

    let feed: Value = serde_json::from_str(&ok(bin(data.path(), &["--window", "3", "feed", "R1"]))).unwrap();
    assert_eq!(feed["window"]["count"], 3);
    let out = Command::new(env!("CARGO_BIN_EXE_sheetstack"))
        .args(["feed", "R1"])
        .env("SHEETSTACK_DATA_ROOT", data.path())
        .env("SHEETSTACK_WINDOW", "all")
        .output()
        .unwrap();
    let feed: Value = serde_json::from_str(&ok(out)).unwrap();
    assert_eq!(feed["window"]["count"], 6);
}

#[test]
fn errors_exit_nonzero() {
    let data = tempfile::tempdir().unwrap();
    let out = bin(data.path(), &["feed", "missing"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown report type"));

    let out = bin(data.path(), &["command", "make", "it", "nicer"]);
    assert!(!out.status.success());
    let out = bin(data.path(), &["--window", "1", "feed", "R1"]);
    assert!(!out.status.success());
}
