//! Fat tails and volatility clustering across a few seeds.
//!
//!     cargo run --release --example stylized_facts -- [t_e] [seeds...]

use market_abm::stats::stylized_facts;
use market_abm::{run, SimParams, TaSetup};

fn main() {
    let mut args = std::env::args().skip(1);
    let t_e: u64 = args.next().map_or(2_000_000, |s| s.parse().expect("t_e"));
    let mut seeds: Vec<u64> = args.map(|s| s.parse().expect("seed")).collect();
    if seeds.is_empty() {
        seeds = vec![1, 2, 3];
    }
    let sp = SimParams {
        t_e,
        ..SimParams::default()
    };

    println!(
        "{:>5} {:>8} {:>9}   squared-return autocorrelation, lags 1..5",
        "seed", "samples", "kurtosis"
    );
    for seed in seeds {
        let series = run(&sp, TaSetup::NONE, seed).expect("valid params").series;
        match stylized_facts(&series, 100, sp.t_c) {
            Ok(f) => {
                let ac: Vec<String> = f.sq_autocorr.iter().map(|a| format!("{a:.3}")).collect();
                println!("{seed:>5} {:>8} {:>9.2}   {}", f.samples, f.kurtosis, ac.join(" "));
            }
            Err(e) => println!("{seed:>5} {e}"),
        }
    }
}
