//! One market run with and without a momentum trader.
//!
//!     cargo run --release --example simulate_market -- [seed] [t_e] [lookback]

use std::time::Instant;

use market_abm::stats::stylized_facts;
use market_abm::{Market, SimParams, TaSetup};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let t_e: u64 = args.next().map_or(2_000_000, |s| s.parse().expect("t_e"));
    let tm: u64 = args.next().map_or(10_000, |s| s.parse().expect("lookback"));
    let sp = SimParams {
        t_e,
        ..SimParams::default()
    };

    for (label, tas) in [
        ("normal agents only", TaSetup::NONE),
        ("with momentum trader", TaSetup::momentum(tm)),
    ] {
        let t0 = Instant::now();
        let r = Market::new(sp.clone(), tas, seed).expect("valid params").run();
        let dt = t0.elapsed().as_secs_f64();
        let mids = r.series.as_slice();
        let lo = mids.iter().min().unwrap().to_money(sp.delta_p);
        let hi = mids.iter().max().unwrap().to_money(sp.delta_p);
        println!("{label}: {t_e} ticks in {dt:.2}s ({:.2e} ticks/s)", t_e as f64 / dt);
        println!("  {} trades, mid range {lo:.2} .. {hi:.2}", r.trade_count);
        if let Some(p) = r.profit_m {
            println!("  momentum profit {p:.2} (in units of the fundamental)");
        }
        if let Ok(f) = stylized_facts(&r.series, 100, sp.t_c) {
            println!(
                "  kurtosis {:.2}, return stdev {:.2e}, sq-return autocorr lag1 {:.3}",
                f.kurtosis, f.return_stdev, f.sq_autocorr[0]
            );
        }
    }
}
