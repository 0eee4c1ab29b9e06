use std::sync::Arc;

use lob_arena_market::agents::Archetype;
use lob_arena_market::dataset::{build_dataset, class_counts, extract_samples};
use lob_arena_market::exchange::OrderAction;
use lob_arena_market::scenario::{
    io, load_fundamentals, read_day_manifest, run_day, run_scenario, AgentCounts, Preset, ScenarioConfig,
};
use lob_arena_market::Side;

fn small(days: u32, seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset(Preset::Small);
    cfg.days = days;
    cfg.seed = seed;
    cfg
}

fn only(counts: AgentCounts) -> ScenarioConfig {
    let mut cfg = small(1, 11);
    cfg.counts = counts;
    cfg
}

fn none() -> AgentCounts {
    AgentCounts {
        noise: 0,
        value: 0,
        market_makers: 0,
        twap: 0,
        vwap: 0,
        momentum: 0,
        mean_reversion: 0,
    }
}

#[test]
fn scenario_files_are_reproducible() {
    let cfg = small(2, 7);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_scenario(&cfg, a.path()).unwrap();
    let rb = run_scenario(&cfg, b.path()).unwrap();
    assert_eq!(ra.len(), 2);
    for (x, y) in ra.iter().zip(&rb) {
        let (mx, my) = (read_day_manifest(&x.manifest).unwrap(), read_day_manifest(&y.manifest).unwrap());
        assert_eq!(mx, my);
        assert_eq!(mx.files.len(), 3);
        for f in &mx.files {
            assert_eq!(io::sha256_file(&x.dir.join(&f.path)).unwrap(), f.sha256);
        }
    }
    let c = tempfile::tempdir().unwrap();
    let other = run_scenario(&small(2, 8), c.path()).unwrap();
    assert_ne!(
        read_day_manifest(&other[0].manifest).unwrap().trace_sha256,
        read_day_manifest(&ra[0].manifest).unwrap().trace_sha256
    );
}

#[test]
fn single_noise_agent_trades_once_against_the_opening_book() {
    let cfg = only(AgentCounts { noise: 1, ..none() });
    let f = Arc::new(load_fundamentals(&cfg).unwrap().remove(0));
    let logs = run_day(&cfg, 0, f).unwrap();
    assert_eq!(logs.orders.len(), 1);
    let o = &logs.orders[0];
    assert_eq!(o.action, OrderAction::Market);
    assert_eq!(o.archetype, Archetype::Background);
    assert!((10..=100).contains(&o.qty));
    let filled: u64 = logs.trades.iter().map(|t| t.qty).sum();
    assert_eq!(filled, o.qty);
    let touch = match o.side {
        Side::Buy => logs.l2[0].best_ask(),
        Side::Sell => logs.l2[0].best_bid(),
    };
    assert_eq!(Some(logs.trades[0].price), touch);
}

#[test]
fn noise_sides_are_balanced() {
    let cfg = only(AgentCounts { noise: 2000, ..none() });
    let f = Arc::new(load_fundamentals(&cfg).unwrap().remove(0));
    let logs = run_day(&cfg, 0, f).unwrap();
    let n = logs.orders.len() as f64;
    let buys = logs.orders.iter().filter(|o| o.side == Side::Buy).count() as f64;
    // 2000 fair coins: 3 SE is about 0.034
    assert!((buys / n - 0.5).abs() < 0.034, "{}", buys / n);
}

#[test]
fn logs_stay_inside_the_session_and_join_strictly_before() {
    let cfg = small(1, 3);
    let (open, close) = cfg.session();
    let f = Arc::new(load_fundamentals(&cfg).unwrap().remove(0));
    let logs = run_day(&cfg, 0, f).unwrap();
    assert!(logs.orders.iter().all(|o| o.time >= open && o.time <= close));
    assert!(logs.trades.iter().all(|t| t.time >= open && t.time <= close));
    assert!(logs.l2.windows(2).all(|w| w[0].time <= w[1].time));
    assert!(logs.orders.windows(2).all(|w| w[0].time <= w[1].time));
    for a in Archetype::ALL {
        assert!(logs.orders.iter().any(|o| o.archetype == a), "{a:?} silent");
    }

    let (samples, stats) = extract_samples(&logs.orders, &logs.l2, 0);
    assert_eq!(stats.orders, stats.samples + stats.no_prior_snapshot + stats.no_reference_price);
    for s in &samples {
        let k = logs.l2.partition_point(|r| r.time < s.time);
        assert!(k > 0);
        let snap = &logs.l2[k - 1];
        assert!(snap.time < s.time);
        assert!(logs.l2.get(k).map_or(true, |next| next.time >= s.time));
        if snap.ask_volumes[0] > 0 {
            assert_eq!(s.features[0], snap.ask_prices[0] as f64);
        }
    }
}

#[test]
fn dataset_from_a_small_run() {
    let cfg = small(5, 7);
    let fs = load_fundamentals(&cfg).unwrap();
    let days: Vec<_> = (0..5u32)
        .map(|d| {
            let logs = run_day(&cfg, d, Arc::new(fs[d as usize].clone())).unwrap();
            (d, logs.orders, logs.l2)
        })
        .collect();
    let ds = build_dataset(&days, 3, 2, 7).unwrap();
    let m = &ds.manifest;
    assert_eq!((m.split.train_days.clone(), m.split.test_days.clone()), (vec![0, 1, 2], vec![3, 4]));
    let after = class_counts(&ds.train);
    assert!(after.iter().all(|&c| c == after[0] && c > 0));
    assert_eq!(after, m.train_counts_after);
    assert!(ds.train.iter().all(|s| s.day < 3) && ds.test.iter().all(|s| s.day >= 3));
    assert_eq!(m.zscore.input_width(), 23);
}
