//! Agent-based market with a continuous double auction, heterogeneous
//! traders and a backtest-driven strategy re-optimization loop.
//!
//! The crate is organised bottom-up:
//!
//! - [`orderbook`]: price-time priority book, tick rounding, expiry.
//! - [`rng`]: keyed random draws that replay exactly across runs.
//! - [`agents`]: normal-agent order formation and technical-agent targets.
//! - [`market`]: the tick loop producing a [`market::PriceSeries`].
//! - [`backtest`]: zero-impact profit of a lookback strategy on a fixed series.
//! - [`pso`]: particle swarm search over one integer parameter.
//! - [`metaloop`]: simulate, optimize, re-simulate.
//! - [`stats`]: return moments and squared-return autocorrelation.
//! - [`config`], [`io`], [`cli`]: run configuration, CSV files and the command line.

pub mod agents;
pub mod backtest;
pub mod cli;
pub mod config;
pub mod io;
pub mod market;
pub mod metaloop;
pub mod orderbook;
pub mod params;
pub mod pso;
pub mod rng;
pub mod stats;

pub use agents::{TAState, TaKind};
pub use market::{run, Market, PriceSeries, SimResult, TaSetup};
pub use orderbook::{Book, Price, Side, Tick};
pub use params::SimParams;
