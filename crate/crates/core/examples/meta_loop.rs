//! Repeated simulate-then-optimize cycles, once with only the momentum
//! strategy and once with both strategies trading.
//!
//!     cargo run --release --example meta_loop -- [seed] [t_e] [iterations]

use market_abm::config::RunConfig;
use market_abm::metaloop::{detect_cycle, run_meta, MetaMode};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let mut cfg = RunConfig::desk();
    cfg.sim.t_e = args.next().map_or(1_000_000, |s| s.parse().expect("t_e"));
    cfg.n_meta = args.next().map_or(20, |s| s.parse().expect("iterations"));

    for mode in [MetaMode::MomentumOnly, MetaMode::Both] {
        let recs = run_meta(&cfg.sim, &cfg.swarm, mode, cfg.n_meta, seed).expect("valid config");
        println!("mode {mode}");
        println!(
            "{:>4} {:>8} {:>8} {:>10} {:>10}",
            "iter", "tm", "tr", "profit_m", "profit_r"
        );
        for r in &recs {
            let show = |v: Option<u64>| v.map_or("-".into(), |x| x.to_string());
            let money = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.2}"));
            println!(
                "{:>4} {:>8} {:>8} {:>10} {:>10}",
                r.iter,
                show(r.tm),
                show(r.tr),
                money(r.profit_m),
                money(r.profit_r)
            );
        }
        match detect_cycle(&recs) {
            Some((at, len)) => println!("lookbacks revisit an earlier pair at iteration {at} (period {len})\n"),
            None => println!("no repeated lookback pair\n"),
        }
    }
}
