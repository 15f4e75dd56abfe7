use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn roughvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roughvol"))
        .args(args)
        .env_remove("ROUGHVOL_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn body(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn price_table_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8"] {
        let out = dir.path().join(format!("price_{threads}.csv"));
        let o = roughvol(&[
            "price", "--paths", "3000", "--steps", "100", "--seed", "99", "--threads", threads, "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    // The environment variable is honoured the same way.
    let o = Command::new(env!("CARGO_BIN_EXE_roughvol"))
        .args(["price", "--paths", "3000", "--steps", "100", "--seed", "99"])
        .env("ROUGHVOL_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(o.stdout, outputs[0]);
}

#[test]
fn price_table_has_forty_entries_and_header() {
    let o = roughvol(&["price", "--paths", "500", "--steps", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["# command: price", "# config: {", "# config_sha256: ", "# seed: 20240101", "# rng: chacha12"] {
        assert!(text.contains(key), "missing {key}");
    }
    let rows = body(&text);
    assert_eq!(rows.len(), 6);
    let values: usize = rows[1..]
        .iter()
        .map(|r| r.split(',').skip(1).step_by(2).count())
        .sum();
    assert_eq!(values, 40);
}

#[test]
fn missing_output_directories_are_created() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a/b/kernel.json");
    let o = roughvol(&["verify-kernel", "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["command"], "verify-kernel");
    assert_eq!(doc["config"]["model"]["alpha"], 0.62);
    let rows = doc["result"].as_array().unwrap();
    let l2: Vec<f64> = rows.iter().map(|r| r["l2_error"].as_f64().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(l2[0] > l2[1] && l2[1] > l2[2], "{l2:?}");
}

#[test]
fn config_errors_exit_one_with_the_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, "{\n  \"model\": {\n    \"alpha\": 1.4\n  }\n}\n").unwrap();
    let o = roughvol(&["price", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("run.json:3") && msg.contains("model.alpha"), "{msg}");

    fs::write(&cfg, "{\"model\": {\"alpah\": 0.6}}").unwrap();
    let o = roughvol(&["price", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpah"));

    let o = roughvol(&["price", "--set", "discretization.horizon=0.0015"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn exploding_volatility_exits_two() {
    let o = roughvol(&["price", "--paths", "200", "--steps", "100", "--set", "model.vol_of_vol=1000"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("log-volatility limit"));
}

#[test]
fn simulate_dumps_every_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("paths.csv");
    let o = roughvol(&["simulate", "--paths", "2", "--steps", "50", "--horizon", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let rows = body(&text);
    assert_eq!(rows[0], "path,t,lambda,Lambda,X");
    assert_eq!(rows.len(), 1 + 2 * 101);
    let last: Vec<&str> = rows[101].split(',').collect();
    assert_eq!((last[0], last[1]), ("0", "2"));
}

#[test]
fn bench_reports_both_backends() {
    let o = roughvol(&["bench", "--set", "bench.steps=[100,200]", "--set", "bench.paths=5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = body(&text);
    assert_eq!(rows[0], "backend,n_100,n_200");
    assert!(rows[1].starts_with("fft,") && rows[2].starts_with("naive,"));
    let t: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!(t > 0.0);
}

#[test]
fn hurst_and_compare_run_on_small_designs() {
    let o = roughvol(&["hurst", "--steps", "400", "--paths", "60"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let last = *body(&text).last().unwrap();
    let h: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(h > 0.0 && h < 0.5, "{h}");

    let o = roughvol(&["hurst", "--paths", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let o = roughvol(&["compare-limit", "--paths", "100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"pricing": {"strikes": [100]}, "execution": {"seed": 5}}"#).unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["price", "--config", cfg.to_str().unwrap(), "--paths", "400", "--steps", "100"];
        args.extend_from_slice(extra);
        let o = roughvol(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        String::from_utf8(o.stdout).unwrap()
    };
    let a = run(&[]);
    assert!(a.contains("# seed: 5"));
    assert_eq!(body(&a).len(), 2);
    let b = run(&["--seed", "6"]);
    assert!(b.contains("# seed: 6"));
    assert_ne!(body(&a)[1], body(&b)[1]);
    assert!(Path::new(&cfg).exists());
}
