use std::path::Path;
use std::process::{Command, Output};

fn compass(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compass"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = walk(dir)
        .into_iter()
        .map(|p| p.strip_prefix(dir).unwrap().display().to_string())
        .collect();
    v.sort();
    v
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        }
        out.push(p);
    }
    out
}

#[test]
fn validate_reports_the_bad_key() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[model]\ngamma_noise_per_second = -5\n").unwrap();
    let o = compass(&["validate", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.gamma_noise_per_second"), "{}", stderr(&o));

    std::fs::write(dir.path().join("good.toml"), "name = \"ok\"\n").unwrap();
    let o = compass(&["validate", "--config", "good.toml"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: ok"));
}

#[test]
fn missing_config_is_a_file_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = compass(&["sweep", "--config", "nope.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.toml"), "{}", stderr(&o));
    assert!(listing(dir.path()).is_empty());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["sweep", "--config", "a", "--bogus"], &["scan", "--axis", "k"], &[]] {
        let o = compass(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains("Usage"), "{args:?}");
    }
    let o = compass(&["reproduce", "fig9"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fig9"));
}

#[test]
fn sweep_writes_only_under_out() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "name = \"quick run\"\nangles = 11\n").unwrap();
    let o = compass(&["--threads", "1", "--seedless", "sweep", "--config", "run.toml", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(listing(dir.path()), ["res", "res/quick-run.csv", "res/quick-run.svg", "run.toml"]);

    let csv = std::fs::read_to_string(dir.path().join("res/quick-run.csv")).unwrap();
    let rows = compass_cli::csv::parse_sweep_csv(&csv).unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.yields.is_some()));
}

#[test]
fn reproduce_fig3_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let o = compass(&["reproduce", "fig3", "--angles", "5", "--out", "res"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let files = listing(dir.path());
    assert!(files.iter().all(|f| f.starts_with("res")));
    assert!(files.contains(&"res/fig3/fig3.svg".to_string()), "{files:?}");
    assert!(files.contains(&"res/fig3/fig3-summary.csv".to_string()), "{files:?}");
    let summary = std::fs::read_to_string(dir.path().join("res/fig3/fig3-summary.csv")).unwrap();
    // every series solved at every angle
    for line in summary.lines().skip(1) {
        assert!(line.ends_with(",0"), "{line}");
    }
}

#[test]
fn scan_over_noise() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.toml"), "name = \"noise scan\"\nangles = 7\n").unwrap();
    let o = compass(
        &["scan", "--axis", "noise", "--grid", "0,1e3,1e4", "--config", "s.toml", "--out", "res"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("res/noise-scan-scan-gamma_noise.csv")).unwrap();
    let rows = compass_cli::csv::parse_numeric_csv(&text, compass_cli::csv::SCAN_HEADER).unwrap();
    assert_eq!(rows.len(), 3);
    let c: Vec<f64> = rows.iter().map(|r| r[1].unwrap()).collect();
    assert!(c[0] > c[1] && c[1] > c[2], "{c:?}");
}
