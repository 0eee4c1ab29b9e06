use lob_arena_market::agents::sampling::{exp_interarrival_ns, sample_u_quadratic, u_quadratic_cdf};
use lob_arena_market::fundamental::{generate_ou, observe, FundamentalSeries, ObservationModel, OuParams};
use lob_arena_market::SimTime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One-sample KS distance against a continuous CDF.
fn ks_one_sample(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn u_quadratic_matches_cdf() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, b) = (0.0, 23_400e9);
    let mut xs: Vec<f64> = (0..100_000).map(|_| sample_u_quadratic(a, b, rng.gen()).unwrap()).collect();
    let d = ks_one_sample(&mut xs, |x| u_quadratic_cdf(a, b, x));
    assert!(d < 0.01, "KS {d}");
}

#[test]
fn u_quadratic_mass_sits_at_the_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xs: Vec<f64> = (0..20_000).map(|_| sample_u_quadratic(0.0, 1.0, rng.gen()).unwrap()).collect();
    let outer = xs.iter().filter(|&&x| !(0.25..0.75).contains(&x)).count() as f64 / xs.len() as f64;
    // analytic: 1 - 2*(0.25)^3*4 = 0.875
    assert!((outer - 0.875).abs() < 0.01, "{outer}");
}

#[test]
fn exponential_mean_within_three_se() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mean = 60e9;
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|_| exp_interarrival_ns(mean, &mut rng).unwrap() as f64).collect();
    let m = xs.iter().sum::<f64>() / n as f64;
    let se = mean / (n as f64).sqrt();
    assert!((m - mean).abs() < 3.0 * se, "mean {m}");
}

#[test]
fn observation_noise_variance() {
    let series = FundamentalSeries::new(vec![(SimTime(0), 1000)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let model = ObservationModel { sigma_n: 50.0 };
    let xs: Vec<f64> = (0..100_000)
        .map(|_| (observe(&series, SimTime(5), model, &mut rng).unwrap() - 1000) as f64)
        .collect();
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    // rounding to ticks adds 1/12
    assert!(m.abs() < 0.1, "{m}");
    assert!((v - 50.0 - 1.0 / 12.0).abs() < 1.5, "{v}");
    assert_eq!(observe(&series, SimTime(5), ObservationModel::EXACT, &mut rng).unwrap(), 1000);
}

#[test]
fn ou_reverts_to_mean_with_stationary_spread() {
    let p = OuParams {
        mean_ticks: 5_000.0,
        reversion_rate: 1e-2,
        vol: 2.0,
        dt_ns: 1_000_000_000,
        initial_ticks: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (s, _) = generate_ou(&p, SimTime(0), SimTime::from_secs(400_000), 6_000.0, &mut rng).unwrap();
    let tail: Vec<f64> = s.values()[2_000..].iter().map(|&v| v as f64).collect();
    let m = tail.iter().sum::<f64>() / tail.len() as f64;
    let v = tail.iter().map(|x| (x - m).powi(2)).sum::<f64>() / tail.len() as f64;
    let want_var = p.vol * p.vol / (2.0 * p.reversion_rate);
    assert!((m - 5_000.0).abs() < 2.0, "mean {m}");
    assert!((v / want_var - 1.0).abs() < 0.1, "var {v} vs {want_var}");
    // first step decays the gap by exp(-θ)
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let quiet = OuParams { vol: 0.0, ..p };
    let (s, _) = generate_ou(&quiet, SimTime(0), SimTime::from_secs(100), 6_000.0, &mut rng).unwrap();
    let want = 5_000.0 + 1_000.0 * (-1.0f64).exp();
    assert!((s.values()[100] as f64 - want).abs() <= 0.5);
}
