use market_abm::backtest::{backtest, profit_from};
use market_abm::{Price, PriceSeries, SimParams, TaKind};
use proptest::prelude::*;

fn walk() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-5i64..=5, 2..3000).prop_map(|steps| {
        let mut p = 1_000_000i64;
        steps
            .into_iter()
            .map(|d| {
                p = (p + d).max(1);
                p
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn reversal_mirrors_momentum(mids in walk(), n in 1u32..=10, lb in 1u64..4000, s in 1u32..300) {
        let sp = SimParams { n, s, ..SimParams::default() };
        let series = PriceSeries::new(mids.into_iter().map(Price).collect());
        let m = backtest(&series, TaKind::Momentum, lb, &sp).unwrap();
        let r = backtest(&series, TaKind::Reversal, lb, &sp).unwrap();
        prop_assert_eq!(m.cash_ticks, -r.cash_ticks);
        prop_assert_eq!(m.position, -r.position);
        prop_assert_eq!(m.trades, r.trades);
        prop_assert_eq!(m.profit, -r.profit);
        prop_assert!(m.position.abs() == i64::from(s) || m.position == 0);
    }

    #[test]
    fn flat_prices_earn_nothing(len in 2usize..2000, lb in 1u64..500, price in 1i64..10_000_000) {
        let series = PriceSeries::new(vec![Price(price); len]);
        let sp = SimParams { n: 3, ..SimParams::default() };
        let o = backtest(&series, TaKind::Momentum, lb, &sp).unwrap();
        prop_assert_eq!(o.trades, 0);
        prop_assert_eq!(o.profit, 0.0);
    }

    /// Round trips at the fundamental value cancel exactly.
    #[test]
    fn profit_zero_at_fundamental(q in -1000i64..1000) {
        let sp = SimParams::default();
        let cash = -i128::from(q) * i128::from(sp.p_f_ticks().0);
        prop_assert_eq!(profit_from(cash, q, &sp), 0.0);
    }
}
