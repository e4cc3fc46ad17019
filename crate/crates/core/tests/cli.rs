use std::path::Path;

use market_abm::cli::{run, CliError};
use market_abm::config::ConfigError;

fn exec(args: &[&str]) -> Result<String, CliError> {
    let mut out = Vec::new();
    let mut argv = vec!["market-abm"];
    argv.extend_from_slice(args);
    run(argv, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn small<'a>(dir: &'a Path, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "--n",
        "20",
        "--t-c",
        "200",
        "--t-e",
        "5000",
        "--out-dir",
        dir.to_str().unwrap(),
    ];
    v.extend_from_slice(extra);
    v
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn simulate_writes_series_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate"];
    args.extend(small(
        dir.path(),
        &["--ta-m", "300", "--seed", "4", "--trade-counts", "true"],
    ));
    exec(&args).unwrap();

    let rows = data_rows(&dir.path().join("series_seed4.csv"));
    assert_eq!(rows.len(), 5000);
    assert!(rows[0].starts_with("1,"));
    assert!(rows[4999].starts_with("5000,"));
    assert_eq!(rows[0].split(',').count(), 3);

    let summary = std::fs::read_to_string(dir.path().join("summary_seed4.txt")).unwrap();
    assert!(summary.contains("# seed=4\n"));
    assert!(summary.contains("# ta_m=300\n"));
    let line = summary.lines().find(|l| l.starts_with("profit_m=")).unwrap();
    assert!(line["profit_m=".len()..].parse::<f64>().is_ok(), "{line}");
}

#[test]
fn several_seeds_in_one_call() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--seeds", "1,2,3", "--workers", "2"];
    args.extend(small(dir.path(), &[]));
    let out = exec(&args).unwrap();
    for s in 1..=3 {
        assert!(dir.path().join(format!("series_seed{s}.csv")).exists());
        assert!(out.contains(&format!("seed {s}: wrote")));
    }
}

#[test]
fn stored_series_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--seed", "9"];
    args.extend(small(dir.path(), &[]));
    exec(&args).unwrap();
    let series = dir.path().join("series_seed9.csv");
    let s = series.to_str().unwrap();

    let bt = exec(&["backtest", s, "--kind", "momentum", "--lookback", "100"]).unwrap();
    let rev = exec(&["backtest", s, "--kind", "reversal", "--lookback", "100"]).unwrap();
    let profit = |text: &str| -> f64 {
        let l = text.lines().find(|l| l.starts_with("profit=")).unwrap();
        l["profit=".len()..].parse().unwrap()
    };
    assert_eq!(profit(&bt), -profit(&rev));

    let opt = exec(&[
        "optimize", s, "--kind", "m", "--n-p", "10", "--l-p", "5", "--t-max", "2000",
    ])
    .unwrap();
    assert!(opt.contains("t_best="));

    let st = exec(&["stats", s, "--window", "50"]).unwrap();
    assert!(st.contains("window=50\n") && st.contains("kurtosis="));
}

#[test]
fn stats_on_short_series_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("short.csv");
    std::fs::write(&p, "tick,mid\n1,100.00\n2,100.01\n3,100.02\n").unwrap();
    let err = exec(&["stats", p.to_str().unwrap()]).unwrap_err();
    assert!(matches!(err, CliError::Stats(_)), "{err}");
}

#[test]
fn config_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    // cancel time beyond the end of the run
    let err = exec(&[
        "simulate",
        "--t-c",
        "9000",
        "--t-e",
        "5000",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ])
    .unwrap_err();
    assert!(matches!(err, CliError::Config(_) | CliError::Params(_)), "{err}");

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "n = 10\nsigma = 2\n").unwrap();
    let err = exec(&["simulate", "--config", cfg.to_str().unwrap()]).unwrap_err();
    assert!(matches!(err, CliError::Config(ConfigError::UnknownKey(_))), "{err}");

    let err = exec(&["simulate", "--preset", "huge"]).unwrap_err();
    assert!(matches!(err, CliError::Config(_)), "{err}");
    assert!(matches!(exec(&["frobnicate"]), Err(CliError::Usage(_))));
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# comment\nn = 20\nt_c = 200\nt_e = 3000\nseed = 5\n").unwrap();
    let out_dir = dir.path().join("o");
    exec(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--t-e",
        "2500",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ])
    .unwrap();
    assert_eq!(data_rows(&out_dir.join("series_seed5.csv")).len(), 2500);
}

#[test]
fn metaloop_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let args = small(
        &out,
        &[
            "--mode", "both", "--n-meta", "3", "--n-p", "6", "--l-p", "4", "--t-max", "3000", "--seed", "2",
        ],
    );
    let mut argv = vec!["metaloop"];
    argv.extend(args);

    exec(&argv).unwrap();
    let first = std::fs::read(out.join("metaloop_both_seed2.csv")).unwrap();
    let iters = std::fs::read(out.join("metaloop_both_seed2_iters.csv")).unwrap();
    exec(&argv).unwrap();
    assert_eq!(first, std::fs::read(out.join("metaloop_both_seed2.csv")).unwrap());
    assert_eq!(iters, std::fs::read(out.join("metaloop_both_seed2_iters.csv")).unwrap());

    let rows = data_rows(&out.join("metaloop_both_seed2.csv"));
    assert_eq!(rows.len(), 3);
    // iteration 0 has no lookbacks and no profits
    assert!(rows[0].starts_with("0,,,,,"));
}
