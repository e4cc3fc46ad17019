//! Simulate, optimize lookbacks by backtesting on the result, re-simulate.
//!
//! Iteration 0 runs without technical agents. Every later iteration runs
//! with the lookbacks optimized on the previous iteration's series and the
//! same master seed, so the normal agents see identical draws and any change
//! in prices comes from the technical agents alone. The swarm restarts every
//! iteration with draws keyed on the iteration number; the whole loop is
//! still a pure function of the configuration and seed.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::agents::TaKind;
use crate::backtest::backtest_profit;
use crate::market::{Market, PriceSeries, SimResult, TaSetup};
use crate::params::{ParamError, SimParams};
use crate::pso::{optimize, PsoKeys, PsoOutcome, SwarmConfig, SwarmConfigError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetaMode {
    MomentumOnly,
    Both,
}

impl MetaMode {
    pub fn has_reversal(self) -> bool {
        matches!(self, MetaMode::Both)
    }
}

impl fmt::Display for MetaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetaMode::MomentumOnly => "ta_m_only",
            MetaMode::Both => "both",
        })
    }
}

impl FromStr for MetaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ta_m_only" | "momentum" => Ok(MetaMode::MomentumOnly),
            "both" => Ok(MetaMode::Both),
            other => Err(format!("unknown mode `{other}` (expected ta_m_only or both)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetaRecord {
    pub iter: usize,
    /// Lookbacks used in this iteration's run.
    pub tm: Option<u64>,
    pub tr: Option<u64>,
    /// Realized in-simulation profits.
    pub profit_m: Option<f64>,
    pub profit_r: Option<f64>,
    /// Lookbacks optimized on this iteration's series.
    pub next_tm: Option<u64>,
    pub next_tr: Option<u64>,
    /// Backtested profit of `next_tm` / `next_tr` on this iteration's series.
    pub bt_profit_m: Option<f64>,
    pub bt_profit_r: Option<f64>,
}

#[derive(Debug, Error)]
pub enum MetaError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Swarm(#[from] SwarmConfigError),
    #[error("meta iteration count must be at least 1")]
    NoIterations,
}

pub const MOMENTUM_LANE: u8 = 0;
pub const REVERSAL_LANE: u8 = 1;

/// Optimize one strategy's lookback against a fixed series. `meta_iter`
/// selects the swarm's random draws.
pub fn optimize_lookback(
    series: &PriceSeries,
    kind: TaKind,
    sp: &SimParams,
    cfg: &SwarmConfig,
    master_seed: u64,
    meta_iter: u64,
) -> Result<PsoOutcome, SwarmConfigError> {
    let lane = match kind {
        TaKind::Momentum => MOMENTUM_LANE,
        TaKind::Reversal => REVERSAL_LANE,
    };
    optimize(
        |lb| backtest_profit(series, kind, lb, sp).expect("swarm bounds keep lookback >= 1"),
        cfg,
        PsoKeys {
            master_seed,
            lane,
            meta_iter,
        },
    )
}

pub fn run_meta(
    sp: &SimParams,
    cfg: &SwarmConfig,
    mode: MetaMode,
    n_meta: usize,
    master_seed: u64,
) -> Result<Vec<MetaRecord>, MetaError> {
    run_meta_with(sp, cfg, mode, n_meta, master_seed, |_, _| {})
}

/// As [`run_meta`], handing every iteration's record and simulation result to
/// `observe` before moving on.
pub fn run_meta_with<F>(
    sp: &SimParams,
    cfg: &SwarmConfig,
    mode: MetaMode,
    n_meta: usize,
    master_seed: u64,
    mut observe: F,
) -> Result<Vec<MetaRecord>, MetaError>
where
    F: FnMut(&MetaRecord, &SimResult),
{
    if n_meta == 0 {
        return Err(MetaError::NoIterations);
    }
    sp.validate()?;
    cfg.validate()?;

    let mut records = Vec::with_capacity(n_meta);
    let mut setup = TaSetup::NONE;
    for iter in 0..n_meta {
        let result = Market::new(sp.clone(), setup, master_seed)?.run();
        let series = &result.series;
        let (m, r) = rayon::join(
            || optimize_lookback(series, TaKind::Momentum, sp, cfg, master_seed, iter as u64),
            || {
                mode.has_reversal()
                    .then(|| optimize_lookback(series, TaKind::Reversal, sp, cfg, master_seed, iter as u64))
                    .transpose()
            },
        );
        let (m, r) = (m?, r?);
        let record = MetaRecord {
            iter,
            tm: setup.momentum,
            tr: setup.reversal,
            profit_m: result.profit_m,
            profit_r: result.profit_r,
            next_tm: Some(m.t_best),
            next_tr: r.as_ref().map(|o| o.t_best),
            bt_profit_m: Some(m.best_fitness),
            bt_profit_r: r.as_ref().map(|o| o.best_fitness),
        };
        observe(&record, &result);
        records.push(record);
        setup = TaSetup {
            momentum: record.next_tm,
            reversal: record.next_tr,
        };
    }
    Ok(records)
}

/// Index of the first iteration whose `(tm, tr)` equals an earlier one, with
/// the cycle length.
pub fn detect_cycle(records: &[MetaRecord]) -> Option<(usize, usize)> {
    let pairs: Vec<_> = records.iter().map(|r| (r.next_tm, r.next_tr)).collect();
    for j in 1..pairs.len() {
        if let Some(i) = pairs[..j].iter().position(|p| *p == pairs[j]) {
            return Some((j, j - i));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> (SimParams, SwarmConfig) {
        let sp = SimParams {
            n: 50,
            tau_max: 500,
            t_c: 500,
            t_e: 40_000,
            ..SimParams::default()
        };
        let cfg = SwarmConfig {
            n_particles: 8,
            iterations: 5,
            t_min: 50,
            t_max: 5_000,
            ..SwarmConfig::default()
        };
        (sp, cfg)
    }

    #[test]
    fn record_chain() {
        let (sp, cfg) = tiny();
        let recs = run_meta(&sp, &cfg, MetaMode::Both, 4, 3).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs[0].tm.is_none() && recs[0].tr.is_none() && recs[0].profit_m.is_none());
        for w in recs.windows(2) {
            assert_eq!(w[0].next_tm, w[1].tm);
            assert_eq!(w[0].next_tr, w[1].tr);
            assert!(w[1].profit_m.is_some() && w[1].profit_r.is_some());
        }
    }

    #[test]
    fn momentum_only_has_no_reversal() {
        let (sp, cfg) = tiny();
        let recs = run_meta(&sp, &cfg, MetaMode::MomentumOnly, 3, 3).unwrap();
        assert!(recs.iter().all(|r| r.tr.is_none() && r.next_tr.is_none()));
        assert!(recs[1].tm.is_some());
    }

    #[test]
    fn iteration_zero_is_mode_independent() {
        let (sp, cfg) = tiny();
        let mut a = None;
        let mut b = None;
        run_meta_with(&sp, &cfg, MetaMode::MomentumOnly, 1, 9, |_, r| {
            a = Some(r.series.clone())
        })
        .unwrap();
        run_meta_with(&sp, &cfg, MetaMode::Both, 1, 9, |_, r| b = Some(r.series.clone())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn next_params_reproduce_best_fitness() {
        let (sp, cfg) = tiny();
        let mut checks = 0;
        run_meta_with(&sp, &cfg, MetaMode::Both, 3, 4, |rec, res| {
            let m = backtest_profit(&res.series, TaKind::Momentum, rec.next_tm.unwrap(), &sp).unwrap();
            let r = backtest_profit(&res.series, TaKind::Reversal, rec.next_tr.unwrap(), &sp).unwrap();
            assert_eq!(m, rec.bt_profit_m.unwrap());
            assert_eq!(r, rec.bt_profit_r.unwrap());
            checks += 1;
        })
        .unwrap();
        assert_eq!(checks, 3);
    }

    #[test]
    fn cycle_detection() {
        let rec = |tm| MetaRecord {
            iter: 0,
            tm: None,
            tr: None,
            profit_m: None,
            profit_r: None,
            next_tm: Some(tm),
            next_tr: None,
            bt_profit_m: None,
            bt_profit_r: None,
        };
        let recs: Vec<_> = [5, 7, 9, 7, 9].into_iter().map(rec).collect();
        assert_eq!(detect_cycle(&recs), Some((3, 2)));
        let recs: Vec<_> = [5, 7, 9].into_iter().map(rec).collect();
        assert_eq!(detect_cycle(&recs), None);
    }

    #[test]
    fn zero_iterations_rejected() {
        let (sp, cfg) = tiny();
        assert!(matches!(
            run_meta(&sp, &cfg, MetaMode::Both, 0, 1),
            Err(MetaError::NoIterations)
        ));
    }
}
