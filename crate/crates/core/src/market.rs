//! The simulation loop.
//!
//! One normal agent orders per tick, in rotation. After the last agent of
//! each rotation the momentum agent and then the reversal agent may
//! rebalance with market orders; their actions do not advance the clock.
//! Mid prices are recorded after every tick and are the only price history
//! any agent reads.

use crate::agents::{na_form_order, ta_target, NAOrderIntent, NAParams, TAState, TaKind};
use crate::orderbook::{AgentId, Book, LimitOrder, Price, Side, Tick, Trade};
use crate::params::{ParamError, SimParams};
use crate::rng::StreamKey;

/// Mid price recorded at every tick, in tick units. Tick `t` is stored at
/// index `t - 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PriceSeries {
    mids: Vec<Price>,
}

impl PriceSeries {
    pub fn new(mids: Vec<Price>) -> Self {
        Self { mids }
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            mids: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, p: Price) {
        self.mids.push(p);
    }

    pub fn len(&self) -> usize {
        self.mids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mids.is_empty()
    }

    /// Mid at 1-based tick `t`.
    #[inline]
    pub fn at(&self, t: Tick) -> Price {
        self.mids[(t - 1) as usize]
    }

    #[inline]
    pub fn get(&self, t: Tick) -> Option<Price> {
        if t == 0 {
            None
        } else {
            self.mids.get((t - 1) as usize).copied()
        }
    }

    pub fn as_slice(&self) -> &[Price] {
        &self.mids
    }

    /// Mids in monetary units.
    pub fn money(&self, delta_p: f64) -> Vec<f64> {
        self.mids.iter().map(|p| p.to_money(delta_p)).collect()
    }
}

/// Lookbacks of the technical agents taking part in a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct TaSetup {
    pub momentum: Option<u64>,
    pub reversal: Option<u64>,
}

impl TaSetup {
    pub const NONE: TaSetup = TaSetup {
        momentum: None,
        reversal: None,
    };

    pub fn momentum(tm: u64) -> Self {
        Self {
            momentum: Some(tm),
            reversal: None,
        }
    }

    pub fn both(tm: u64, tr: u64) -> Self {
        Self {
            momentum: Some(tm),
            reversal: Some(tr),
        }
    }

    /// Technical agents place no order while `t` is below the largest
    /// enabled lookback.
    pub fn no_trade_threshold(&self) -> Option<u64> {
        match (self.momentum, self.reversal) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(0).max(b.unwrap_or(0))),
        }
    }
}

/// A technical agent's execution, kept when fill recording is enabled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaFill {
    pub kind: TaKind,
    pub side: Side,
    pub price: Price,
    pub qty: u32,
    pub tick: Tick,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep the number of trades executed at each tick.
    pub record_trade_counts: bool,
    /// Keep every technical-agent fill.
    pub record_ta_fills: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub series: PriceSeries,
    pub ta_m: Option<TAState>,
    pub ta_r: Option<TAState>,
    pub profit_m: Option<f64>,
    pub profit_r: Option<f64>,
    /// Number of executions over the whole run.
    pub trade_count: u64,
    /// Limit orders actually placed by normal agents.
    pub na_orders: u64,
    /// Decision points at which a technical agent was eligible to act.
    pub ta_decisions: u64,
    pub trade_counts: Option<Vec<u32>>,
    pub ta_fills: Vec<TaFill>,
}

pub fn momentum_agent_id(sp: &SimParams) -> AgentId {
    AgentId(sp.n)
}

pub fn reversal_agent_id(sp: &SimParams) -> AgentId {
    AgentId(sp.n + 1)
}

/// Move a technical agent to `target` with one market order, accounting
/// from the actual fills. A shortfall leaves the position between the old
/// value and the target.
pub fn ta_rebalance(book: &mut Book, ta: &mut TAState, agent: AgentId, target: i64, now: Tick, fills: &mut Vec<Trade>) {
    let diff = target - ta.position;
    if diff == 0 {
        return;
    }
    let side = if diff > 0 { Side::Buy } else { Side::Sell };
    let start = fills.len();
    // qty is non-zero here so the order is well-formed
    let _ = book.submit_market_into(agent, side, diff.unsigned_abs() as u32, now, fills);
    for f in &fills[start..] {
        let notional = i128::from(f.price.0) * i128::from(f.qty);
        match side {
            Side::Buy => {
                ta.position += i64::from(f.qty);
                ta.cash_ticks -= notional;
            }
            Side::Sell => {
                ta.position -= i64::from(f.qty);
                ta.cash_ticks += notional;
            }
        }
    }
}

/// A configured market, ready to run.
#[derive(Clone, Debug)]
pub struct Market {
    sp: SimParams,
    tas: TaSetup,
    seed: u64,
    opts: RunOptions,
}

impl Market {
    pub fn new(sp: SimParams, tas: TaSetup, seed: u64) -> Result<Self, ParamError> {
        sp.validate()?;
        for lb in [tas.momentum, tas.reversal].into_iter().flatten() {
            if lb == 0 {
                return Err(ParamError::NotPositive {
                    name: "lookback",
                    value: "0".into(),
                });
            }
        }
        Ok(Self {
            sp,
            tas,
            seed,
            opts: RunOptions::default(),
        })
    }

    pub fn with_options(mut self, opts: RunOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn params(&self) -> &SimParams {
        &self.sp
    }

    pub fn run(&self) -> SimResult {
        let sp = &self.sp;
        let n = u64::from(sp.n);
        let p_f = sp.p_f_ticks();
        let eps_std = sp.eps_std();
        let nas: Vec<NAParams> = (0..n).map(|j| NAParams::draw(self.seed, j, sp)).collect();

        let mut book = Book::with_order_ttl(sp.t_c);
        let mut series = PriceSeries::with_capacity(sp.t_e as usize);
        let mut trade_counts = self
            .opts
            .record_trade_counts
            .then(|| Vec::with_capacity(sp.t_e as usize));
        let mut ta_fills = Vec::new();

        let mut ta_m = self.tas.momentum.map(|lb| TAState::new(TaKind::Momentum, lb));
        let mut ta_r = self.tas.reversal.map(|lb| TAState::new(TaKind::Reversal, lb));
        let threshold = self.tas.no_trade_threshold();
        let id_m = momentum_agent_id(sp);
        let id_r = reversal_agent_id(sp);

        let mut fills: Vec<Trade> = Vec::with_capacity(256);
        let mut trade_count = 0u64;
        let mut na_orders = 0u64;
        let mut ta_decisions = 0u64;

        for t in 1..=sp.t_e {
            let j = (t - 1) % n;
            let agent = &nas[j as usize];
            fills.clear();

            book.cancel_expired(t, sp.t_c);
            let p_prev = if t == 1 { p_f } else { series.at(t - 1) };
            let p_lag = t
                .checked_sub(agent.tau + 1)
                .filter(|&lag| lag >= 1)
                .map(|lag| series.at(lag).to_money(sp.delta_p));
            let eps = StreamKey::na_epsilon(self.seed, j, t).normal(eps_std);
            let rho = StreamKey::na_rho(self.seed, j, t).uniform(0.0, 1.0);

            if let Ok(Some(NAOrderIntent { side, price })) =
                na_form_order(agent, p_prev.to_money(sp.delta_p), p_lag, eps, rho, t, sp)
            {
                let order = LimitOrder {
                    agent: AgentId(j as u32),
                    side,
                    price,
                    qty: NAOrderIntent::QTY,
                };
                if book.submit_limit_into(order, t, &mut fills).is_ok() {
                    na_orders += 1;
                }
            }
            series.push(book.mid_price().unwrap_or(p_f));

            if t % n == 0 && threshold.is_some_and(|th| t >= th) {
                let p_now = series.at(t);
                for (ta, id) in [(&mut ta_m, id_m), (&mut ta_r, id_r)] {
                    let Some(ta) = ta.as_mut() else { continue };
                    if t <= ta.lookback {
                        continue;
                    }
                    ta_decisions += 1;
                    let Some(target) = ta_target(ta.kind, p_now, series.at(t - ta.lookback), sp.s) else {
                        continue;
                    };
                    let start = fills.len();
                    ta_rebalance(&mut book, ta, id, target, t, &mut fills);
                    if self.opts.record_ta_fills {
                        let side = if target > 0 { Side::Buy } else { Side::Sell };
                        ta_fills.extend(fills[start..].iter().map(|f| TaFill {
                            kind: ta.kind,
                            side,
                            price: f.price,
                            qty: f.qty,
                            tick: t,
                        }));
                    }
                }
            }

            trade_count += fills.len() as u64;
            if let Some(tc) = trade_counts.as_mut() {
                tc.push(fills.len() as u32);
            }
        }

        SimResult {
            profit_m: ta_m.map(|ta| ta.profit(sp)),
            profit_r: ta_r.map(|ta| ta.profit(sp)),
            series,
            ta_m,
            ta_r,
            trade_count,
            na_orders,
            ta_decisions,
            trade_counts,
            ta_fills,
        }
    }
}

/// Run one simulation.
pub fn run(sp: &SimParams, tas: TaSetup, master_seed: u64) -> Result<SimResult, ParamError> {
    Ok(Market::new(sp.clone(), tas, master_seed)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimParams {
        SimParams {
            n: 100,
            tau_max: 1000,
            t_c: 1000,
            t_e: 60_000,
            ..SimParams::default()
        }
    }

    #[test]
    fn rebalance_difference_arithmetic() {
        let mut book = Book::new();
        for i in 0..250 {
            book.submit_limit(
                LimitOrder {
                    agent: AgentId(0),
                    side: Side::Sell,
                    price: Price(1_000_000 + i),
                    qty: 1,
                },
                1,
            )
            .unwrap();
        }
        let mut ta = TAState {
            kind: TaKind::Momentum,
            lookback: 10,
            position: -100,
            cash_ticks: 0,
        };
        let mut fills = Vec::new();
        ta_rebalance(&mut book, &mut ta, AgentId(99), 100, 2, &mut fills);
        assert_eq!(fills.iter().map(|f| f.qty).sum::<u32>(), 200);
        assert_eq!(ta.position, 100);
        let spent: i128 = (0..200).map(|i| 1_000_000 + i).sum();
        assert_eq!(ta.cash_ticks, -spent);

        fills.clear();
        ta_rebalance(&mut book, &mut ta, AgentId(99), 100, 3, &mut fills);
        assert!(fills.is_empty());
    }

    #[test]
    fn rebalance_shortfall() {
        let mut book = Book::new();
        for i in 0..150 {
            book.submit_limit(
                LimitOrder {
                    agent: AgentId(0),
                    side: Side::Sell,
                    price: Price(500 + i),
                    qty: 1,
                },
                1,
            )
            .unwrap();
        }
        let mut ta = TAState::new(TaKind::Momentum, 10);
        ta.position = -100;
        let mut fills = Vec::new();
        ta_rebalance(&mut book, &mut ta, AgentId(99), 100, 2, &mut fills);
        assert_eq!(ta.position, 50);

        let mut empty = Book::new();
        let before = ta;
        ta_rebalance(&mut empty, &mut ta, AgentId(99), -100, 3, &mut fills);
        assert_eq!(ta, before);
    }

    #[test]
    fn series_length_and_determinism() {
        let sp = small();
        let a = run(&sp, TaSetup::NONE, 11).unwrap();
        let b = run(&sp, TaSetup::NONE, 11).unwrap();
        assert_eq!(a.series.len(), sp.t_e as usize);
        assert_eq!(a, b);
        assert!(a.ta_m.is_none() && a.profit_m.is_none());
        let c = run(&sp, TaSetup::NONE, 12).unwrap();
        assert_ne!(a.series, c.series);
    }

    #[test]
    fn na_draws_independent_of_tas() {
        let sp = small();
        let tm = 5_000;
        let base = run(&sp, TaSetup::NONE, 5).unwrap();
        let with = run(&sp, TaSetup::momentum(tm), 5).unwrap();
        // first possible TA action is after the first multiple of n above tm
        let first = (tm / u64::from(sp.n) + 1) * u64::from(sp.n);
        for t in 1..=first {
            assert_eq!(base.series.at(t), with.series.at(t), "tick {t}");
        }
        assert_ne!(base.series, with.series);
    }

    #[test]
    fn fill_log_reconciles_cash() {
        let sp = small();
        let m = Market::new(sp.clone(), TaSetup::both(3_000, 7_000), 8)
            .unwrap()
            .with_options(RunOptions {
                record_ta_fills: true,
                record_trade_counts: true,
            });
        let r = m.run();
        for (kind, state) in [(TaKind::Momentum, r.ta_m.unwrap()), (TaKind::Reversal, r.ta_r.unwrap())] {
            let mut cash = 0i128;
            let mut pos = 0i64;
            for f in r.ta_fills.iter().filter(|f| f.kind == kind) {
                let q = i64::from(f.qty);
                match f.side {
                    Side::Buy => {
                        pos += q;
                        cash -= i128::from(f.price.0 * q);
                    }
                    Side::Sell => {
                        pos -= q;
                        cash += i128::from(f.price.0 * q);
                    }
                }
            }
            assert_eq!(cash, state.cash_ticks);
            assert_eq!(pos, state.position);
            assert!(state.position.abs() <= i64::from(sp.s));
        }
        let counts = r.trade_counts.unwrap();
        assert_eq!(counts.len(), sp.t_e as usize);
        assert_eq!(counts.iter().map(|&c| u64::from(c)).sum::<u64>(), r.trade_count);
    }

    #[test]
    fn decision_count() {
        let sp = small();
        let tm = 2_500;
        let r = run(&sp, TaSetup::momentum(tm), 3).unwrap();
        let n = u64::from(sp.n);
        let skipped = (1..=sp.t_e / n).filter(|k| k * n <= tm).count() as u64;
        assert_eq!(r.ta_decisions, sp.t_e / n - skipped);
        assert!(r.na_orders <= sp.t_e && r.na_orders + 10 >= sp.t_e);
    }

    #[test]
    fn no_trade_threshold() {
        assert_eq!(TaSetup::NONE.no_trade_threshold(), None);
        assert_eq!(TaSetup::momentum(40).no_trade_threshold(), Some(40));
        assert_eq!(TaSetup::both(40, 90).no_trade_threshold(), Some(90));
    }

    #[test]
    fn rejects_zero_lookback() {
        assert!(Market::new(small(), TaSetup::momentum(0), 1).is_err());
    }
}
