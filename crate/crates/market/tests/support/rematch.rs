//! Independent matcher: a flat list of resting orders, scanned in full for
//! every fill. Quadratic, slow and obvious.

#![allow(dead_code)]

use lob_arena_market::exchange::OrderBook;
use lob_arena_market::{AgentId, OrderId, Side, SimTime};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Limit { side: Side, price: i64, qty: u64 },
    Market { side: Side, qty: u64 },
    /// Index into the ids issued so far.
    Cancel { nth: usize },
}

/// (resting id, incoming id, price, qty)
pub type Fill = (u64, u64, i64, u64);

#[derive(Debug, Clone)]
struct Resting {
    id: u64,
    side: Side,
    price: i64,
    qty: u64,
    entry_qty: u64,
    time: u64,
    seq: u64,
}

/// Better-priority test: price, then time, then larger entry size, then arrival.
fn ahead(a: &Resting, b: &Resting) -> bool {
    let pa = if a.side == Side::Buy { -a.price } else { a.price };
    let pb = if b.side == Side::Buy { -b.price } else { b.price };
    (pa, a.time, std::cmp::Reverse(a.entry_qty), a.seq) < (pb, b.time, std::cmp::Reverse(b.entry_qty), b.seq)
}

fn crosses(side: Side, limit: Option<i64>, resting: i64) -> bool {
    match (side, limit) {
        (_, None) => true,
        (Side::Buy, Some(l)) => resting <= l,
        (Side::Sell, Some(l)) => resting >= l,
    }
}

pub fn rematch(ops: &[(u64, Op)]) -> Vec<Fill> {
    let mut book: Vec<Resting> = Vec::new();
    let mut fills = Vec::new();
    let mut ids = Vec::new();
    let mut seq = 0;
    for (n, (time, op)) in ops.iter().enumerate() {
        let id = n as u64 + 1;
        let (side, limit, mut qty) = match op {
            Op::Limit { side, price, qty } => (*side, Some(*price), *qty),
            Op::Market { side, qty } => (*side, None, *qty),
            Op::Cancel { nth } => {
                if let Some(target) = ids.get(*nth) {
                    book.retain(|r: &Resting| r.id != *target);
                }
                continue;
            }
        };
        ids.push(id);
        if limit.is_none() && !book.iter().any(|r| r.side != side) {
            continue;
        }
        while qty > 0 {
            let mut best: Option<usize> = None;
            for (i, r) in book.iter().enumerate() {
                if r.side == side || !crosses(side, limit, r.price) {
                    continue;
                }
                if best.map_or(true, |b| ahead(r, &book[b])) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            let fill = qty.min(book[b].qty);
            fills.push((book[b].id, id, book[b].price, fill));
            qty -= fill;
            book[b].qty -= fill;
            if book[b].qty == 0 {
                book.remove(b);
            }
        }
        if let (Some(price), true) = (limit, qty > 0) {
            book.push(Resting { id, side, price, qty, entry_qty: qty, time: *time, seq });
            seq += 1;
        }
    }
    fills
}

/// Same op stream through the production book.
pub fn run_book(ops: &[(u64, Op)]) -> Vec<Fill> {
    let mut book = OrderBook::new();
    let agent = AgentId(1);
    let mut ids = Vec::new();
    let mut fills = Vec::new();
    for (n, (time, op)) in ops.iter().enumerate() {
        let id = OrderId(n as u64 + 1);
        let t = SimTime(*time);
        let exec = match op {
            Op::Limit { side, price, qty } => book.submit_limit(t, id, agent, *side, *price, *qty),
            Op::Market { side, qty } => book.submit_market(t, id, agent, *side, *qty),
            Op::Cancel { nth } => {
                if let Some(&target) = ids.get(*nth) {
                    book.cancel(agent, target);
                }
                continue;
            }
        };
        ids.push(id);
        if let Ok(e) = exec {
            fills.extend(e.trades.iter().map(|t| (t.resting_order.0, t.incoming_order.0, t.price, t.qty)));
        }
    }
    fills
}

/// Up to `max_ops` operations over `levels` adjacent ticks, with coarse
/// timestamps so equal-time ties are common.
pub fn random_ops<R: Rng>(rng: &mut R, max_ops: usize, levels: i64) -> Vec<(u64, Op)> {
    let n = rng.gen_range(1..=max_ops);
    let mut t = 0;
    let mut issued = 0usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        t += rng.gen_range(0..2u64);
        let side = if rng.gen_bool(0.5) { Side::Buy } else { Side::Sell };
        let op = match rng.gen_range(0..10) {
            0..=5 => Op::Limit { side, price: 100 + rng.gen_range(0..levels), qty: rng.gen_range(1..=10) },
            6..=7 => Op::Market { side, qty: rng.gen_range(1..=15) },
            _ if issued > 0 => Op::Cancel { nth: rng.gen_range(0..issued) },
            _ => Op::Market { side, qty: rng.gen_range(1..=15) },
        };
        if !matches!(op, Op::Cancel { .. }) {
            issued += 1;
        }
        out.push((t, op));
    }
    out
}
