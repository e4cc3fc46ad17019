//! Command-line front end: `simulate`, `backtest`, `optimize`, `metaloop`
//! and `stats`.
//!
//! Configuration is layered: built-in defaults, then `--preset`, then
//! `--config FILE` (or the header embedded in an input series), then
//! individual flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::agents::TaKind;
use crate::backtest::{backtest, BacktestError};
use crate::config::{ConfigError, RunConfig};
use crate::io::{self, IoError, IterSummary};
use crate::market::{Market, RunOptions, SimResult, TaSetup};
use crate::metaloop::{optimize_lookback, run_meta_with, MetaError, MetaRecord};
use crate::params::ParamError;
use crate::pso::SwarmConfigError;
use crate::stats::{self, StatsError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Meta(#[from] MetaError),
    #[error(transparent)]
    Backtest(#[from] BacktestError),
    #[error(transparent)]
    Swarm(#[from] SwarmConfigError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Usage(#[from] clap::Error),
}

macro_rules! config_flags {
    ($($field:ident => $help:literal),* $(,)?) => {
        /// One flag per configuration key; values are parsed exactly like
        /// the config file.
        #[derive(Args, Debug, Default, Clone)]
        pub struct ConfigFlags {
            $(
                #[arg(long, value_name = "VALUE", help = $help)]
                pub $field: Option<String>,
            )*
        }

        impl ConfigFlags {
            fn overrides(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push((stringify!($field), x.as_str()));
                    }
                )*
                v
            }
        }
    };
}

config_flags!(
    delta_p => "Tick size",
    p_f => "Fundamental value",
    n => "Number of normal agents",
    w1_max => "Upper bound of the fundamental weight",
    w2_max => "Upper bound of the chartist weight",
    w3_max => "Upper bound of the noise weight",
    tau_max => "Longest chartist lookback",
    sigma_eps => "Noise scale",
    noise_scale => "How sigma_eps is read: stddev or variance",
    p_d => "Half-width of the order price scatter",
    t_c => "Order lifetime in ticks; also the warm-up length",
    s => "Position size of the technical agents",
    t_e => "Ticks per run",
    n_p => "Swarm particles",
    l_p => "Swarm iterations",
    t_min => "Smallest lookback searched",
    t_max => "Largest lookback searched",
    w => "Swarm inertia",
    c1 => "Pull towards the global best",
    c2 => "Pull towards the particle's own best",
    mode => "Meta-loop mode: ta_m_only or both",
    n_meta => "Meta-loop records, including the run without technical agents",
    seed => "Master seed",
    ta_m => "Momentum lookback, or none",
    ta_r => "Reversal lookback, or none",
    window => "Return window in ticks",
    burn_in => "Ticks skipped before measuring returns (default: t_c)",
    out_dir => "Output directory",
    trade_counts => "Add a per-tick trade count column to the series file",
);

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// `key=value` configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Named parameter set applied before the config file: `full` or `desk`.
    #[arg(long)]
    pub preset: Option<String>,
    #[command(flatten)]
    pub flags: ConfigFlags,
}

#[derive(Args, Debug, Clone)]
pub struct Fanout {
    /// Comma-separated master seeds; overrides `seed` and runs each independently.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Worker threads for multi-seed runs.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Parser, Debug)]
#[command(
    name = "market-abm",
    about = "Agent-based order book market and strategy re-optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the market once per seed; write the series CSV and a summary.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fanout: Fanout,
    },
    /// Backtest one strategy on a stored series.
    Backtest {
        series: PathBuf,
        #[arg(long)]
        kind: TaKind,
        #[arg(long)]
        lookback: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Search the best lookback for one strategy on a stored series.
    Optimize {
        series: PathBuf,
        #[arg(long)]
        kind: TaKind,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated simulate / optimize loop.
    Metaloop {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fanout: Fanout,
    },
    /// Kurtosis and squared-return autocorrelations of a stored series.
    Stats {
        series: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn resolve(common: &Common, embedded: Option<&str>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &common.preset {
        cfg.apply_preset(p)?;
    }
    if let Some(text) = embedded {
        cfg.merge_str(text)?;
    }
    if let Some(path) = &common.config {
        cfg.merge_file(path)?;
    }
    for (k, v) in common.flags.overrides() {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_series(path: &Path, common: &Common) -> Result<(RunConfig, crate::market::PriceSeries), CliError> {
    let file = io::read_series(path)?;
    let cfg = resolve(common, Some(&file.header))?;
    let series = file.to_series(cfg.sim.delta_p);
    Ok((cfg, series))
}

fn seeds_of(cfg: &RunConfig, fanout: &Fanout) -> Vec<u64> {
    if fanout.seeds.is_empty() {
        vec![cfg.seed]
    } else {
        fanout.seeds.clone()
    }
}

fn fan_out<T, F>(seeds: &[u64], workers: usize, job: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64) -> Result<T, CliError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    pool.install(|| seeds.par_iter().map(|&s| job(s)).collect())
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

fn summary_fields(cfg: &RunConfig, r: &SimResult) -> Vec<(&'static str, String)> {
    let mut f = vec![
        ("ticks", r.series.len().to_string()),
        ("trade_count", r.trade_count.to_string()),
        ("na_orders", r.na_orders.to_string()),
        (
            "final_mid",
            r.series.at(r.series.len() as u64).to_money(cfg.sim.delta_p).to_string(),
        ),
        ("profit_m", fmt_opt(r.profit_m)),
        ("profit_r", fmt_opt(r.profit_r)),
        ("position_m", fmt_opt(r.ta_m.map(|t| t.position))),
        ("position_r", fmt_opt(r.ta_r.map(|t| t.position))),
        ("returns", "non-overlapping log returns".to_string()),
    ];
    match stats::stylized_facts(&r.series, cfg.window, cfg.burn_in()) {
        Ok(sf) => {
            f.push(("return_samples", sf.samples.to_string()));
            f.push(("return_stdev", sf.return_stdev.to_string()));
            f.push(("kurtosis", sf.kurtosis.to_string()));
            for (i, a) in sf.sq_autocorr.iter().enumerate() {
                let key = [
                    "sq_autocorr_1",
                    "sq_autocorr_2",
                    "sq_autocorr_3",
                    "sq_autocorr_4",
                    "sq_autocorr_5",
                ][i];
                f.push((key, a.to_string()));
            }
        }
        Err(e) => f.push(("stats_error", e.to_string())),
    }
    f
}

fn cmd_simulate<W: Write>(common: &Common, fanout: &Fanout, out: &mut W) -> Result<(), CliError> {
    let base = resolve(common, None)?;
    let seeds = seeds_of(&base, fanout);
    let reports = fan_out(&seeds, fanout.workers, |seed| {
        let mut cfg = base.clone();
        cfg.seed = seed;
        let tas = TaSetup {
            momentum: cfg.ta_m,
            reversal: cfg.ta_r,
        };
        let result = Market::new(cfg.sim.clone(), tas, seed)?
            .with_options(RunOptions {
                record_trade_counts: cfg.trade_counts,
                record_ta_fills: false,
            })
            .run();
        let series_path = cfg.out_dir.join(format!("series_seed{seed}.csv"));
        let summary_path = cfg.out_dir.join(format!("summary_seed{seed}.txt"));
        io::write_series(&series_path, &result.series, result.trade_counts.as_deref(), &cfg)?;
        let fields = summary_fields(&cfg, &result);
        io::write_summary(&summary_path, &cfg, &fields)?;
        Ok((seed, series_path, fields))
    })?;
    for (seed, path, fields) in reports {
        writeln!(out, "seed {seed}: wrote {}", path.display())?;
        for (k, v) in fields {
            writeln!(out, "  {k}={v}")?;
        }
    }
    Ok(())
}

fn cmd_backtest<W: Write>(
    path: &Path,
    kind: TaKind,
    lookback: u64,
    common: &Common,
    out: &mut W,
) -> Result<(), CliError> {
    let (cfg, series) = load_series(path, common)?;
    let o = backtest(&series, kind, lookback, &cfg.sim)?;
    writeln!(out, "kind={}", kind.name())?;
    writeln!(out, "lookback={lookback}")?;
    writeln!(out, "profit={}", o.profit)?;
    writeln!(out, "final_position={}", o.position)?;
    writeln!(out, "trades={}", o.trades)?;
    Ok(())
}

fn cmd_optimize<W: Write>(path: &Path, kind: TaKind, common: &Common, out: &mut W) -> Result<(), CliError> {
    let (cfg, series) = load_series(path, common)?;
    let o = optimize_lookback(&series, kind, &cfg.sim, &cfg.swarm, cfg.seed, 0)?;
    writeln!(out, "kind={}", kind.name())?;
    writeln!(out, "t_best={}", o.t_best)?;
    writeln!(out, "best_profit={}", o.best_fitness)?;
    Ok(())
}

fn cmd_metaloop<W: Write>(common: &Common, fanout: &Fanout, out: &mut W) -> Result<(), CliError> {
    let base = resolve(common, None)?;
    let seeds = seeds_of(&base, fanout);
    let reports = fan_out(&seeds, fanout.workers, |seed| {
        let mut cfg = base.clone();
        cfg.seed = seed;
        let mut summaries = Vec::new();
        let records: Vec<MetaRecord> = run_meta_with(&cfg.sim, &cfg.swarm, cfg.mode, cfg.n_meta, seed, |rec, res| {
            let sf = stats::stylized_facts(&res.series, cfg.window, cfg.burn_in()).ok();
            summaries.push(IterSummary {
                iter: rec.iter,
                trade_count: res.trade_count,
                final_mid: res.series.at(res.series.len() as u64).to_money(cfg.sim.delta_p),
                return_stdev: sf.as_ref().map(|s| s.return_stdev),
                kurtosis: sf.as_ref().map(|s| s.kurtosis),
            });
        })?;
        let stem = format!("metaloop_{}_seed{seed}", cfg.mode);
        let path = cfg.out_dir.join(format!("{stem}.csv"));
        io::write_metaloop(&path, &records, &cfg)?;
        io::write_iter_summaries(&cfg.out_dir.join(format!("{stem}_iters.csv")), &summaries, &cfg)?;
        Ok((seed, path, records))
    })?;
    for (seed, path, records) in reports {
        writeln!(out, "seed {seed}: wrote {}", path.display())?;
        for r in records {
            writeln!(
                out,
                "  iter {:>3}  tm={:>7} tr={:>7}  profit_m={:<12} profit_r={:<12} -> next_tm={} next_tr={}",
                r.iter,
                fmt_opt(r.tm),
                fmt_opt(r.tr),
                r.profit_m.map_or("-".into(), |p| format!("{p:.3}")),
                r.profit_r.map_or("-".into(), |p| format!("{p:.3}")),
                fmt_opt(r.next_tm),
                fmt_opt(r.next_tr),
            )?;
        }
    }
    Ok(())
}

fn cmd_stats<W: Write>(path: &Path, common: &Common, out: &mut W) -> Result<(), CliError> {
    let (cfg, series) = load_series(path, common)?;
    let sf = stats::stylized_facts(&series, cfg.window, cfg.burn_in())?;
    writeln!(out, "window={}", cfg.window)?;
    writeln!(out, "burn_in={}", cfg.burn_in())?;
    writeln!(out, "returns=non-overlapping log returns")?;
    writeln!(out, "samples={}", sf.samples)?;
    writeln!(out, "kurtosis={:.3}", sf.kurtosis)?;
    for (i, a) in sf.sq_autocorr.iter().enumerate() {
        writeln!(out, "sq_autocorr_lag{}={:.3}", i + 1, a)?;
    }
    writeln!(out, "return_stdev={:.6}", sf.return_stdev)?;
    Ok(())
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T, W>(args: I, out: &mut W) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = Cli::try_parse_from(args)?;
    match &cli.command {
        Command::Simulate { common, fanout } => cmd_simulate(common, fanout, out),
        Command::Backtest {
            series,
            kind,
            lookback,
            common,
        } => cmd_backtest(series, *kind, *lookback, common, out),
        Command::Optimize { series, kind, common } => cmd_optimize(series, *kind, common, out),
        Command::Metaloop { common, fanout } => cmd_metaloop(common, fanout, out),
        Command::Stats { series, common } => cmd_stats(series, common, out),
    }
}
