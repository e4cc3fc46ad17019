//! Zero-impact evaluation of a lookback strategy on a recorded series.
//!
//! The strategy trades at the recorded mid of each decision tick and always
//! gets filled in full, so its own orders never move the prices it sees.
//! Decision ticks follow the live schedule (every `n` ticks). Cash is
//! accumulated in integer ticks, which keeps results exact.

use thiserror::Error;

use crate::agents::{ta_target, TaKind};
use crate::market::PriceSeries;
use crate::params::SimParams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BacktestError {
    #[error("lookback must be at least 1 tick")]
    ZeroLookback,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BacktestOutcome {
    pub cash_ticks: i128,
    pub position: i64,
    /// Number of rebalancing trades.
    pub trades: u64,
    /// Final cash per fundamental value, open shares valued at the fundamental.
    pub profit: f64,
}

/// Profit of `kind` with `lookback` on `series`, in units of the fundamental.
pub fn backtest_profit(
    series: &PriceSeries,
    kind: TaKind,
    lookback: u64,
    sp: &SimParams,
) -> Result<f64, BacktestError> {
    backtest(series, kind, lookback, sp).map(|o| o.profit)
}

pub fn backtest(
    series: &PriceSeries,
    kind: TaKind,
    lookback: u64,
    sp: &SimParams,
) -> Result<BacktestOutcome, BacktestError> {
    if lookback == 0 {
        return Err(BacktestError::ZeroLookback);
    }
    let mids = series.as_slice();
    let n = sp.n as usize;
    let lb = lookback as usize;
    let mut position = 0i64;
    let mut cash_ticks = 0i128;
    let mut trades = 0u64;
    // decision tick t (1-based) = k*n; first eligible t > lookback
    let first = (lb / n + 1) * n;
    let mut t = first;
    while t <= mids.len() {
        let now = mids[t - 1];
        if let Some(target) = ta_target(kind, now, mids[t - 1 - lb], sp.s) {
            let delta = target - position;
            if delta != 0 {
                cash_ticks -= i128::from(delta) * i128::from(now.0);
                position = target;
                trades += 1;
            }
        }
        t += n;
    }
    Ok(BacktestOutcome {
        cash_ticks,
        position,
        trades,
        profit: profit_from(cash_ticks, position, sp),
    })
}

/// `(cash + position * p_f) / p_f` with cash given in ticks.
pub fn profit_from(cash_ticks: i128, position: i64, sp: &SimParams) -> f64 {
    (cash_ticks as f64 * sp.delta_p + position as f64 * sp.p_f) / sp.p_f
}
