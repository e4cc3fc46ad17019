//! Decision rules of the two agent families.
//!
//! Normal agents mix a fundamental term, a chartist term and noise into an
//! expected log return, turn it into an expected price, scatter an order
//! price around it and buy or sell one share depending on which side of the
//! expected price the order landed. Technical agents hold `+S` or `-S`
//! shares depending on the sign of a lagged price change.

use crate::orderbook::{round_to_tick, OrderError, Price, Side, Tick};
use crate::params::SimParams;
use crate::rng::StreamKey;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NAParams {
    /// Weights of the fundamental, chartist and noise terms.
    pub w: [f64; 3],
    /// Chartist lookback in ticks.
    pub tau: u64,
}

impl NAParams {
    /// Draw the parameters of agent `agent` from the `AgentInit` stream.
    pub fn draw(master_seed: u64, agent: u64, sp: &SimParams) -> Self {
        let mut w = [0.0; 3];
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = StreamKey::agent_init(master_seed, agent, i as u64).uniform(0.0, sp.w_max[i]);
        }
        let tau_raw = StreamKey::agent_init(master_seed, agent, 3).uniform(1.0, sp.tau_max as f64 + 1.0);
        let tau = (tau_raw as u64).clamp(1, sp.tau_max);
        Self { w, tau }
    }
}

/// Expected log return. `p_lag` is `None` while the chartist lookback
/// reaches before the start of the series, which zeroes the middle term.
///
/// Panics on non-positive prices.
pub fn na_expected_return(p: &NAParams, p_f: f64, p_prev: f64, p_lag: Option<f64>, eps: f64) -> f64 {
    assert!(p_f > 0.0 && p_prev > 0.0, "prices must be positive");
    let fundamental = p.w[0] * (p_f / p_prev).ln();
    let chartist = match p_lag {
        Some(lag) => {
            assert!(lag > 0.0, "lagged price must be positive");
            p.w[1] * (p_prev / lag).ln()
        }
        None => 0.0,
    };
    (fundamental + chartist + p.w[2] * eps) / (p.w[0] + p.w[1] + p.w[2])
}

/// A normal agent's order: always exactly one share.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NAOrderIntent {
    pub side: Side,
    pub price: Price,
}

impl NAOrderIntent {
    pub const QTY: u32 = 1;
}

/// Form a normal agent's limit order at tick `t`.
///
/// Returns `Ok(None)` when the order price ties exactly with the reference
/// price (expected price, or the fundamental during warm-up).
pub fn na_form_order(
    p: &NAParams,
    p_prev: f64,
    p_lag: Option<f64>,
    eps: f64,
    rho: f64,
    t: Tick,
    sp: &SimParams,
) -> Result<Option<NAOrderIntent>, OrderError> {
    let r_e = na_expected_return(p, sp.p_f, p_prev, p_lag, eps);
    let p_e = p_prev * r_e.exp();
    let p_o = p_e + sp.p_d * (2.0 * rho - 1.0);
    let reference = if t < sp.t_c { sp.p_f } else { p_e };
    let side = if reference > p_o {
        Side::Buy
    } else if reference < p_o {
        Side::Sell
    } else {
        return Ok(None);
    };
    let price = round_to_tick(p_o, side, sp.delta_p)?;
    Ok(Some(NAOrderIntent { side, price }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaKind {
    Momentum,
    Reversal,
}

impl TaKind {
    pub fn name(self) -> &'static str {
        match self {
            TaKind::Momentum => "momentum",
            TaKind::Reversal => "reversal",
        }
    }

    pub fn flipped(self) -> TaKind {
        match self {
            TaKind::Momentum => TaKind::Reversal,
            TaKind::Reversal => TaKind::Momentum,
        }
    }
}

impl std::str::FromStr for TaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "momentum" | "m" => Ok(TaKind::Momentum),
            "reversal" | "r" => Ok(TaKind::Reversal),
            other => Err(format!(
                "unknown strategy kind `{other}` (expected momentum or reversal)"
            )),
        }
    }
}

/// Target position from the sign of `p_now - p_lag`; `None` leaves the
/// current position unchanged.
#[inline]
pub fn ta_target(kind: TaKind, p_now: Price, p_lag: Price, s: u32) -> Option<i64> {
    let s = i64::from(s);
    let up = match p_now.cmp(&p_lag) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => return None,
    };
    Some(match (kind, up) {
        (TaKind::Momentum, true) | (TaKind::Reversal, false) => s,
        _ => -s,
    })
}

/// State of a technical agent. Cash is kept in integer tick units so fill
/// accounting is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TAState {
    pub kind: TaKind,
    pub lookback: u64,
    pub position: i64,
    pub cash_ticks: i128,
}

impl TAState {
    pub fn new(kind: TaKind, lookback: u64) -> Self {
        Self {
            kind,
            lookback,
            position: 0,
            cash_ticks: 0,
        }
    }

    pub fn cash(&self, delta_p: f64) -> f64 {
        self.cash_ticks as f64 * delta_p
    }

    /// Final cash per fundamental value, with open shares valued at `p_f`.
    pub fn profit(&self, sp: &SimParams) -> f64 {
        (self.cash(sp.delta_p) + self.position as f64 * sp.p_f) / sp.p_f
    }
}
