use std::path::PathBuf;
use std::process::{Command, Output};

fn bidclub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bidclub")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bidclub-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn unknown_experiment_exits_2() {
    let out = bidclub(&["sealed-bid"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn malformed_config_exits_2_with_line() {
    let path = scratch("bad.cfg");
    std::fs::write(&path, "trials = 100\n[gamma_A]\n1 0.5\n2 oops\n").unwrap();
    let out = bidclub(&["revenue", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn missing_config_exits_3() {
    let out = bidclub(&["revenue", "--config", "/nonexistent/bidclub.cfg"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_3() {
    let out = bidclub(&["bid-table", "--out", "/nonexistent/dir/table.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reference_equilibrium_passes() {
    let out = bidclub(&["equilibrium", "--config", &config("reference.cfg"), "--trials", "20000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("scenario,statistic,mean,stderr,pass"));
}

#[test]
fn false_name_deviation_is_reported() {
    let out = bidclub(&["equilibrium", "--config", &config("false_name.cfg"), "--trials", "20000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("false-name"));
}

#[test]
fn bid_table_contents() {
    let out = bidclub(&["bid-table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "v,model,bid");
    assert_eq!(rows.len(), 405);
    assert!(rows.contains(&"0.6,n=3,0.4"));
}

#[test]
fn output_is_reproducible() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for path in [&a, &b] {
        let out = bidclub(&["revenue", "--seed", "11", "--trials", "10000", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn trace_is_json_lines() {
    let cfg = scratch("trace.cfg");
    let trace = scratch("trace.jsonl");
    std::fs::write(&cfg, format!("trials = 10000\ntrace = {}\ntrace_limit = 5\n", trace.display())).unwrap();
    let out = bidclub(&["revenue", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("seller_revenue").is_some());
    }
}
