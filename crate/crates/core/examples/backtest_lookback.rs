//! Backtested profit of both strategies over a grid of lookbacks.
//!
//!     cargo run --release --example backtest_lookback -- [seed] [t_e]

use market_abm::backtest::backtest;
use market_abm::{run, SimParams, TaKind, TaSetup};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let t_e: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("t_e"));
    let sp = SimParams {
        t_e,
        ..SimParams::default()
    };
    let series = run(&sp, TaSetup::NONE, seed).expect("valid params").series;

    println!(
        "{:>8} {:>12} {:>7} {:>12}",
        "lookback", "momentum", "trades", "reversal"
    );
    for lb in [100, 300, 1_000, 3_000, 10_000, 30_000, 100_000, 300_000] {
        let m = backtest(&series, TaKind::Momentum, lb, &sp).unwrap();
        let r = backtest(&series, TaKind::Reversal, lb, &sp).unwrap();
        println!("{lb:>8} {:>12.3} {:>7} {:>12.3}", m.profit, m.trades, r.profit);
    }
}
