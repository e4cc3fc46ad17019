//! Swarm search for the most profitable lookback on one simulated series.
//!
//!     cargo run --release --example optimize_lookback -- [seed] [t_e]

use market_abm::backtest::backtest_profit;
use market_abm::metaloop::optimize_lookback;
use market_abm::pso::SwarmConfig;
use market_abm::{run, SimParams, TaKind, TaSetup};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let t_e: u64 = args.next().map_or(1_000_000, |s| s.parse().expect("t_e"));
    let sp = SimParams {
        t_e,
        ..SimParams::default()
    };
    let cfg = SwarmConfig {
        n_particles: 50,
        ..SwarmConfig::default()
    };
    let series = run(&sp, TaSetup::NONE, seed).expect("valid params").series;

    for kind in [TaKind::Momentum, TaKind::Reversal] {
        let out = optimize_lookback(&series, kind, &sp, &cfg, seed, 0).expect("valid swarm");
        println!(
            "{}: best lookback {} earns {:.3}",
            kind.name(),
            out.t_best,
            out.best_fitness
        );
        let checkpoints: Vec<String> = out.history.iter().step_by(10).map(|f| format!("{f:.3}")).collect();
        println!("  best fitness every 10 steps: {}", checkpoints.join(" "));
        // the swarm only reports lookbacks it actually evaluated
        assert_eq!(backtest_profit(&series, kind, out.t_best, &sp), Ok(out.best_fitness));
    }
}
