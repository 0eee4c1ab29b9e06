mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::rematch::{random_ops, rematch, run_book, Op};

use lob_arena_market::Side;

#[test]
fn seeded_sequences_match_brute_force() {
    for seed in 0..2_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops = random_ops(&mut rng, 50, 5);
        assert_eq!(run_book(&ops), rematch(&ops), "seed {seed}: {ops:?}");
    }
}

#[test]
fn equal_time_larger_size_first() {
    let ops = vec![
        (0, Op::Limit { side: Side::Sell, price: 101, qty: 2 }),
        (0, Op::Limit { side: Side::Sell, price: 101, qty: 7 }),
        (1, Op::Limit { side: Side::Sell, price: 101, qty: 9 }),
        (2, Op::Market { side: Side::Buy, qty: 12 }),
    ];
    let fills = run_book(&ops);
    assert_eq!(fills, vec![(2, 4, 101, 7), (1, 4, 101, 2), (3, 4, 101, 3)]);
    assert_eq!(fills, rematch(&ops));
}

fn op() -> impl Strategy<Value = (u64, Op)> {
    let side = prop_oneof![Just(Side::Buy), Just(Side::Sell)];
    (0..2u64, side, 0..10u8, 100..105i64, 1..12u64, 0..50usize).prop_map(|(dt, side, kind, price, qty, nth)| {
        let op = match kind {
            0..=5 => Op::Limit { side, price, qty },
            6..=7 => Op::Market { side, qty },
            _ => Op::Cancel { nth },
        };
        (dt, op)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]
    #[test]
    fn book_agrees_with_rematcher(raw in proptest::collection::vec(op(), 1..50)) {
        let mut t = 0;
        let ops: Vec<(u64, Op)> = raw.into_iter().map(|(dt, op)| { t += dt; (t, op) }).collect();
        prop_assert_eq!(run_book(&ops), rematch(&ops));
    }

    #[test]
    fn fills_never_exceed_submitted(raw in proptest::collection::vec(op(), 1..50)) {
        let ops: Vec<(u64, Op)> = raw.into_iter().enumerate().map(|(i, (_, op))| (i as u64, op)).collect();
        let fills = run_book(&ops);
        for (n, (_, op)) in ops.iter().enumerate() {
            let id = n as u64 + 1;
            let given: u64 = fills.iter().filter(|f| f.0 == id || f.1 == id).map(|f| f.3).sum();
            if let Op::Limit { qty, .. } | Op::Market { qty, .. } = op {
                prop_assert!(given <= *qty);
            }
        }
    }
}
