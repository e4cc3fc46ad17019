//! Matching a handful of orders by hand.
//!
//!     cargo run --example order_book

use market_abm::orderbook::{round_to_tick, AgentId, Book, LimitOrder, Price, Side};

fn show(book: &Book) {
    let fmt = |p: Option<Price>| p.map_or("-".to_string(), |p| format!("{:.2}", p.to_money(0.01)));
    println!(
        "  bid {} / ask {}  mid {}  ({} resting)",
        fmt(book.best_bid()),
        fmt(book.best_ask()),
        fmt(book.mid_price()),
        book.len()
    );
}

fn main() {
    // orders expire 100 ticks after placement
    let mut book = Book::with_order_ttl(100);
    let ask = |agent, price, qty| LimitOrder {
        agent: AgentId(agent),
        side: Side::Sell,
        price: Price(price),
        qty,
    };

    book.submit_limit(ask(1, 1_000_500, 2), 1).unwrap();
    book.submit_limit(ask(2, 1_000_500, 1), 2).unwrap();
    book.submit_limit(ask(3, 1_001_000, 5), 3).unwrap();
    book.submit_limit(
        LimitOrder {
            agent: AgentId(4),
            side: Side::Buy,
            price: Price(999_000),
            qty: 3,
        },
        4,
    )
    .unwrap();
    println!("after four limit orders:");
    show(&book);

    // a crossing buy takes the best ask first, oldest order first
    let sub = book
        .submit_limit(
            LimitOrder {
                agent: AgentId(5),
                side: Side::Buy,
                price: round_to_tick(10_007.3, Side::Buy, 0.01).unwrap(),
                qty: 4,
            },
            5,
        )
        .unwrap();
    for t in &sub.fills {
        println!(
            "  fill: agent {} buys {} from agent {} at {:.2}",
            t.buy_agent.0,
            t.qty,
            t.sell_agent.0,
            t.price.to_money(0.01)
        );
    }
    println!("crossing buy for 4 (remainder rested: {}):", sub.rested);
    show(&book);

    let fills = book.submit_market(AgentId(6), Side::Sell, 10, 6).unwrap();
    let sold: u32 = fills.iter().map(|t| t.qty).sum();
    println!("market sell for 10 filled {sold}, the rest is dropped:");
    show(&book);

    let gone = book.cancel_expired(104, 100);
    println!("at tick 104, {gone} order(s) older than 100 ticks expired:");
    show(&book);
}
