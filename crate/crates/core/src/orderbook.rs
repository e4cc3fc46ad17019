//! Continuous double auction book with price-time priority.
//!
//! Prices are integer counts of the minimum tick so that matching and
//! level equality are exact. Trades execute at the resting order's price.
//! Resting orders can carry a time-to-live; expired orders are purged before
//! any matching at or after their expiry tick.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Simulation clock. Advances by one per normal-agent order.
pub type Tick = u64;

/// A price as an integer number of minimum ticks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Price(pub i64);

impl Price {
    #[inline]
    pub fn ticks(self) -> i64 {
        self.0
    }

    /// Monetary value for a tick size `delta_p`.
    #[inline]
    pub fn to_money(self, delta_p: f64) -> f64 {
        self.0 as f64 * delta_p
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Order {
    pub id: OrderId,
    pub agent: AgentId,
    pub side: Side,
    pub price: Price,
    pub qty: u32,
    pub placed_tick: Tick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Trade {
    pub buy_agent: AgentId,
    pub sell_agent: AgentId,
    pub price: Price,
    pub qty: u32,
    pub tick: Tick,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("order price must be positive and finite, got {0}")]
    InvalidPrice(f64),
    #[error("order price must be at least one tick, got {0} ticks")]
    NonPositiveTicks(i64),
    #[error("order price {0} is beyond the largest representable tick")]
    PriceOverflow(f64),
    #[error("order quantity must be at least 1")]
    ZeroQuantity,
}

/// Largest tick count accepted by the book. Keeps sums of two prices and
/// price-quantity products far from integer overflow.
pub const MAX_TICKS: i64 = 1 << 52;

/// Relative distance from the grid under which a raw price counts as on-grid.
/// Absorbs the representation error of values like `10000.45 / 0.01`.
const GRID_SNAP: f64 = 1e-9;

/// Round a monetary price onto the tick grid: buys round down, sells round up.
pub fn round_to_tick(raw: f64, side: Side, delta_p: f64) -> Result<Price, OrderError> {
    if !raw.is_finite() || raw <= 0.0 {
        return Err(OrderError::InvalidPrice(raw));
    }
    let q = raw / delta_p;
    let nearest = q.round();
    let ticks = if (q - nearest).abs() <= GRID_SNAP * nearest.abs().max(1.0) {
        nearest
    } else {
        match side {
            Side::Buy => q.floor(),
            Side::Sell => q.ceil(),
        }
    };
    if ticks > MAX_TICKS as f64 {
        return Err(OrderError::PriceOverflow(raw));
    }
    let ticks = ticks as i64;
    if ticks <= 0 {
        return Err(OrderError::NonPositiveTicks(ticks));
    }
    Ok(Price(ticks))
}

/// A limit order request; the book assigns id and placement tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LimitOrder {
    pub agent: AgentId,
    pub side: Side,
    pub price: Price,
    pub qty: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Submission {
    pub fills: Vec<Trade>,
    pub rested: bool,
}

type Level = VecDeque<Order>;

#[derive(Clone, Debug, Default)]
pub struct Book {
    bids: BTreeMap<Price, Level>,
    asks: BTreeMap<Price, Level>,
    // (placed_tick, id, side, price) in placement order; entries for orders
    // that have since filled are skipped on purge
    placements: VecDeque<(Tick, OrderId, Side, Price)>,
    ttl: Option<Tick>,
    next_id: u64,
    resting: usize,
}

impl Book {
    pub fn new() -> Self {
        Self::default()
    }

    /// A book whose resting orders are cancelled `ttl` ticks after placement.
    pub fn with_order_ttl(ttl: Tick) -> Self {
        Self {
            ttl: Some(ttl),
            ..Self::default()
        }
    }

    pub fn best_bid(&self) -> Option<Price> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<Price> {
        self.asks.keys().next().copied()
    }

    /// Average of best bid and best ask, rounded half-down onto the grid.
    pub fn mid_price(&self) -> Option<Price> {
        match (self.best_bid(), self.best_ask()) {
            (Some(b), Some(a)) => Some(Price((b.0 + a.0).div_euclid(2))),
            _ => None,
        }
    }

    /// Number of resting orders.
    pub fn len(&self) -> usize {
        self.resting
    }

    pub fn is_empty(&self) -> bool {
        self.resting == 0
    }

    /// Total resting quantity on one side.
    pub fn depth(&self, side: Side) -> u64 {
        self.side(side)
            .values()
            .flat_map(|l| l.iter())
            .map(|o| u64::from(o.qty))
            .sum()
    }

    /// Resting orders of one side, best price first, FIFO within a level.
    pub fn orders(&self, side: Side) -> Vec<Order> {
        match side {
            Side::Buy => self.bids.values().rev().flatten().copied().collect(),
            Side::Sell => self.asks.values().flatten().copied().collect(),
        }
    }

    fn side(&self, side: Side) -> &BTreeMap<Price, Level> {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    /// Remove every resting order with `now - placed_tick >= ttl`.
    pub fn cancel_expired(&mut self, now: Tick, ttl: Tick) -> usize {
        let mut removed = 0;
        while let Some(&(placed, id, side, price)) = self.placements.front() {
            if now.saturating_sub(placed) < ttl {
                break;
            }
            self.placements.pop_front();
            if self.remove_order(side, price, id) {
                removed += 1;
            }
        }
        removed
    }

    fn purge(&mut self, now: Tick) {
        if let Some(ttl) = self.ttl {
            self.cancel_expired(now, ttl);
        }
    }

    fn remove_order(&mut self, side: Side, price: Price, id: OrderId) -> bool {
        let levels = match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        };
        let Some(level) = levels.get_mut(&price) else {
            return false;
        };
        let Some(pos) = level.iter().position(|o| o.id == id) else {
            return false;
        };
        level.remove(pos);
        if level.is_empty() {
            levels.remove(&price);
        }
        self.resting -= 1;
        true
    }

    /// Match `qty` of an incoming order against the opposite side while
    /// `crosses(resting_price)` holds. Returns the unfilled remainder.
    fn take(
        &mut self,
        agent: AgentId,
        side: Side,
        mut qty: u32,
        limit: Option<Price>,
        now: Tick,
        fills: &mut Vec<Trade>,
    ) -> u32 {
        while qty > 0 {
            let mut entry = match side {
                Side::Buy => match self.asks.first_entry() {
                    Some(e) => e,
                    None => break,
                },
                Side::Sell => match self.bids.last_entry() {
                    Some(e) => e,
                    None => break,
                },
            };
            let level_price = *entry.key();
            let crosses = match (side, limit) {
                (_, None) => true,
                (Side::Buy, Some(p)) => level_price <= p,
                (Side::Sell, Some(p)) => level_price >= p,
            };
            if !crosses {
                break;
            }
            let level = entry.get_mut();
            while qty > 0 {
                let Some(resting) = level.front_mut() else {
                    break;
                };
                let q = qty.min(resting.qty);
                let (buy_agent, sell_agent) = match side {
                    Side::Buy => (agent, resting.agent),
                    Side::Sell => (resting.agent, agent),
                };
                fills.push(Trade {
                    buy_agent,
                    sell_agent,
                    price: level_price,
                    qty: q,
                    tick: now,
                });
                qty -= q;
                resting.qty -= q;
                if resting.qty == 0 {
                    level.pop_front();
                    self.resting -= 1;
                }
            }
            if level.is_empty() {
                entry.remove();
            }
        }
        qty
    }

    /// Submit a limit order, appending executions to `fills`. Returns whether
    /// an unfilled remainder was left resting.
    pub fn submit_limit_into(
        &mut self,
        order: LimitOrder,
        now: Tick,
        fills: &mut Vec<Trade>,
    ) -> Result<bool, OrderError> {
        if order.qty == 0 {
            return Err(OrderError::ZeroQuantity);
        }
        if order.price.0 <= 0 {
            return Err(OrderError::NonPositiveTicks(order.price.0));
        }
        if order.price.0 > MAX_TICKS {
            return Err(OrderError::PriceOverflow(order.price.0 as f64));
        }
        self.purge(now);
        let remainder = self.take(order.agent, order.side, order.qty, Some(order.price), now, fills);
        if remainder == 0 {
            return Ok(false);
        }
        debug_assert!(self.placements.back().is_none_or(|p| p.0 <= now));
        let id = OrderId(self.next_id);
        self.next_id += 1;
        let resting = Order {
            id,
            agent: order.agent,
            side: order.side,
            price: order.price,
            qty: remainder,
            placed_tick: now,
        };
        let levels = match order.side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        };
        levels.entry(order.price).or_default().push_back(resting);
        self.placements.push_back((now, id, order.side, order.price));
        self.resting += 1;
        Ok(true)
    }

    pub fn submit_limit(&mut self, order: LimitOrder, now: Tick) -> Result<Submission, OrderError> {
        let mut fills = Vec::new();
        let rested = self.submit_limit_into(order, now, &mut fills)?;
        Ok(Submission { fills, rested })
    }

    /// Market order: walks the opposite side best-first; any shortfall is
    /// discarded, never rested.
    pub fn submit_market_into(
        &mut self,
        agent: AgentId,
        side: Side,
        qty: u32,
        now: Tick,
        fills: &mut Vec<Trade>,
    ) -> Result<u32, OrderError> {
        if qty == 0 {
            return Err(OrderError::ZeroQuantity);
        }
        self.purge(now);
        let remainder = self.take(agent, side, qty, None, now, fills);
        Ok(qty - remainder)
    }

    pub fn submit_market(&mut self, agent: AgentId, side: Side, qty: u32, now: Tick) -> Result<Vec<Trade>, OrderError> {
        let mut fills = Vec::new();
        self.submit_market_into(agent, side, qty, now, &mut fills)?;
        Ok(fills)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: AgentId = AgentId(1);
    const B: AgentId = AgentId(2);

    fn limit(agent: AgentId, side: Side, price: i64, qty: u32) -> LimitOrder {
        LimitOrder {
            agent,
            side,
            price: Price(price),
            qty,
        }
    }

    #[test]
    fn tick_rounding() {
        assert_eq!(round_to_tick(10000.456, Side::Buy, 0.01), Ok(Price(1_000_045)));
        assert_eq!(round_to_tick(10000.456, Side::Sell, 0.01), Ok(Price(1_000_046)));
        assert_eq!(round_to_tick(10000.45, Side::Buy, 0.01), Ok(Price(1_000_045)));
        assert_eq!(round_to_tick(10000.45, Side::Sell, 0.01), Ok(Price(1_000_045)));
        assert!(round_to_tick(0.0, Side::Buy, 0.01).is_err());
        assert!(round_to_tick(-3.0, Side::Sell, 0.01).is_err());
        assert!(round_to_tick(f64::NAN, Side::Sell, 0.01).is_err());
        assert!(round_to_tick(f64::INFINITY, Side::Buy, 0.01).is_err());
        assert_eq!(
            round_to_tick(0.004, Side::Buy, 0.01),
            Err(OrderError::NonPositiveTicks(0))
        );
        assert!(matches!(
            round_to_tick(1e300, Side::Sell, 0.01),
            Err(OrderError::PriceOverflow(_))
        ));
    }

    #[test]
    fn empty_book_rests() {
        let mut book = Book::new();
        let s = book.submit_limit(limit(A, Side::Sell, 1_000_100, 1), 1).unwrap();
        assert!(s.fills.is_empty());
        assert!(s.rested);
        assert_eq!(book.best_ask(), Some(Price(1_000_100)));
    }

    #[test]
    fn crossing_buy_trades_at_resting_price() {
        let mut book = Book::new();
        book.submit_limit(limit(A, Side::Sell, 1_000_000, 1), 1).unwrap();
        let s = book.submit_limit(limit(B, Side::Buy, 1_000_005, 1), 2).unwrap();
        assert_eq!(s.fills.len(), 1);
        assert_eq!(s.fills[0].price, Price(1_000_000));
        assert_eq!(s.fills[0].buy_agent, B);
        assert_eq!(s.fills[0].sell_agent, A);
        assert!(!s.rested);
        assert!(book.is_empty());
    }

    #[test]
    fn sweep_two_levels_then_rest() {
        let mut book = Book::new();
        book.submit_limit(limit(A, Side::Sell, 1_000_000, 1), 1).unwrap();
        book.submit_limit(limit(A, Side::Sell, 1_000_002, 1), 2).unwrap();
        let s = book.submit_limit(limit(B, Side::Buy, 1_000_002, 3), 3).unwrap();
        let prices: Vec<_> = s.fills.iter().map(|t| (t.price.0, t.qty)).collect();
        assert_eq!(prices, vec![(1_000_000, 1), (1_000_002, 1)]);
        assert!(s.rested);
        assert_eq!(book.best_bid(), Some(Price(1_000_002)));
        assert_eq!(book.depth(Side::Buy), 1);
        assert_eq!(book.best_ask(), None);
    }

    #[test]
    fn market_orders() {
        let mut book = Book::new();
        book.submit_limit(limit(A, Side::Sell, 1_000_000, 1), 1).unwrap();
        book.submit_limit(limit(A, Side::Sell, 1_000_010, 2), 2).unwrap();
        let f = book.submit_market(B, Side::Buy, 2, 3).unwrap();
        let got: Vec<_> = f.iter().map(|t| (t.price.0, t.qty)).collect();
        assert_eq!(got, vec![(1_000_000, 1), (1_000_010, 1)]);

        let mut empty = Book::new();
        assert!(empty.submit_market(B, Side::Buy, 5, 1).unwrap().is_empty());

        let mut bids = Book::new();
        bids.submit_limit(limit(A, Side::Buy, 999_990, 3), 1).unwrap();
        let f = bids.submit_market(B, Side::Sell, 5, 2).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].price.0, f[0].qty), (999_990, 3));
        assert!(bids.is_empty());
    }

    #[test]
    fn fifo_within_level() {
        let mut book = Book::new();
        book.submit_limit(limit(AgentId(10), Side::Buy, 500, 1), 1).unwrap();
        book.submit_limit(limit(AgentId(11), Side::Buy, 500, 1), 2).unwrap();
        book.submit_limit(limit(AgentId(12), Side::Buy, 499, 1), 3).unwrap();
        let f = book.submit_market(B, Side::Sell, 3, 4).unwrap();
        let makers: Vec<_> = f.iter().map(|t| t.buy_agent.0).collect();
        assert_eq!(makers, vec![10, 11, 12]);
    }

    #[test]
    fn expiry_boundaries() {
        let mut book = Book::new();
        book.submit_limit(limit(A, Side::Buy, 100, 1), 1).unwrap();
        assert_eq!(book.cancel_expired(10_000, 10_000), 0);
        assert_eq!(book.len(), 1);
        assert_eq!(book.cancel_expired(10_001, 10_000), 1);
        assert!(book.is_empty());
        assert_eq!(Book::new().cancel_expired(5, 1), 0);
    }

    #[test]
    fn expired_orders_never_fill() {
        let mut book = Book::with_order_ttl(10);
        book.submit_limit(limit(A, Side::Sell, 100, 1), 1).unwrap();
        let s = book.submit_limit(limit(B, Side::Buy, 200, 1), 11).unwrap();
        assert!(s.fills.is_empty());
        assert!(s.rested);
        assert_eq!(book.best_ask(), None);
    }

    #[test]
    fn filled_orders_skip_on_purge() {
        let mut book = Book::new();
        book.submit_limit(limit(A, Side::Sell, 100, 1), 1).unwrap();
        book.submit_limit(limit(B, Side::Buy, 100, 1), 2).unwrap();
        assert_eq!(book.cancel_expired(1_000, 1), 0);
    }

    #[test]
    fn mid_price_rules() {
        let mut book = Book::new();
        assert_eq!(book.mid_price(), None);
        book.submit_limit(limit(A, Side::Buy, 999_900, 1), 1).unwrap();
        assert_eq!(book.mid_price(), None);
        book.submit_limit(limit(A, Side::Sell, 1_000_100, 1), 2).unwrap();
        assert_eq!(book.mid_price(), Some(Price(1_000_000)));

        let mut odd = Book::new();
        odd.submit_limit(limit(A, Side::Buy, 1_000_000, 1), 1).unwrap();
        odd.submit_limit(limit(A, Side::Sell, 1_000_001, 1), 2).unwrap();
        assert_eq!(odd.mid_price(), Some(Price(1_000_000)));
    }

    #[test]
    fn rejects_malformed() {
        let mut book = Book::new();
        assert_eq!(
            book.submit_limit(limit(A, Side::Buy, 100, 0), 1),
            Err(OrderError::ZeroQuantity)
        );
        assert_eq!(
            book.submit_limit(limit(A, Side::Buy, 0, 1), 1),
            Err(OrderError::NonPositiveTicks(0))
        );
        assert_eq!(book.submit_market(A, Side::Buy, 0, 1), Err(OrderError::ZeroQuantity));
    }
}
