use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn cellfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellfree")).args(args).output().expect("binary runs")
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        r.headers().unwrap(),
        vec!["experiment", "scheme", "mode", "bound", "x", "y", "seed", "config_hash"]
    );
    r.records().map(|x| x.unwrap()).collect()
}

fn series_counts(rows: &[csv::StringRecord]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in rows {
        *counts.entry(format!("{}-{}:{}", &r[1], &r[2], &r[3])).or_insert(0) += 1;
    }
    counts
}

#[test]
fn ul_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ul.csv");
    let t0 = Instant::now();
    let o = cellfree(&["fig-cdf-ul", "--drops", "2", "--realizations", "10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(t0.elapsed() < Duration::from_secs(10));
    let rows = read_rows(&out);
    let counts = series_counts(&rows);
    assert_eq!(counts.len(), 6);
    assert!(counts.values().all(|&n| n == 40), "{counts:?}");
    assert!(rows.iter().all(|r| &r[0] == "fig_cdf_ul" && &r[6] == "1"));
}

#[test]
fn dl_series_and_eta_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dl.csv");
    let p = out.to_str().unwrap();
    let o = cellfree(&["fig-cdf-dl", "--drops", "1", "--realizations", "5", "--out", p]);
    assert!(o.status.success());
    let rows = read_rows(&out);
    let keys: Vec<String> = series_counts(&rows).into_keys().collect();
    assert_eq!(
        keys,
        ["GMR-distributed:dl_hardening", "MMSE-centralized:dl_hardening", "RCMMSE-centralized:dl_hardening"]
    );
    let default_hash = rows[0][7].to_string();

    let o = cellfree(&["fig-cdf-dl", "--drops", "1", "--realizations", "5", "--eta", "network_wide_equal", "--out", p]);
    assert!(o.status.success());
    let rows = read_rows(&out);
    assert!(rows.iter().all(|r| &r[0] == "fig_cdf_dl:eta=network_wide_equal"));
    assert_ne!(rows[0][7], default_hash);
}

#[test]
fn sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "[experiment]\nseries = [\"MMSE-c:csi\", \"MR-d:uatf\"]\nsweep = [8, 16, 32]\nn_drops = 2\nn_realizations = 10\nseed = 5\n",
    )
    .unwrap();
    let out = dir.path().join("sweep.csv");
    let o = cellfree(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 6);
    let xs: Vec<&str> = rows.iter().map(|r| &r[4]).collect();
    assert_eq!(xs, ["8.0", "8.0", "16.0", "16.0", "32.0", "32.0"]);
    assert!(rows.iter().all(|r| &r[0] == "sweep_m" && &r[6] == "5"));
}

#[test]
fn exit_codes() {
    assert_eq!(cellfree(&["sweep", "--config", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(cellfree(&["fig-cdf-ul", "--drops", "0"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[experiment]\nseries = [\"MMSE-d:uatf\"]\n").unwrap();
    assert_eq!(cellfree(&["fig-cdf-ul", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));

    let o = cellfree(&["validate"]);
    assert_eq!(o.status.code(), Some(0));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("B matrix vs explicit sum"));
    assert!(report.trim_end().ends_with("0 failed"));
    assert_eq!(cellfree(&["validate"]).stdout, report.as_bytes());
}
