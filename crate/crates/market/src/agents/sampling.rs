use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{config_err, Result};
use crate::types::SimTime;

/// Inverse CDF of the U-quadratic law on `[a, b]`.
///
/// With `β = (a+b)/2` and `α = 12/(b−a)³` the inverse is
/// `β + cbrt(3u/α − (β−a)³)`, which simplifies to
/// `a + (b−a)(1 + cbrt(2u − 1))/2`; the second form avoids cubing large
/// nanosecond offsets.
pub fn sample_u_quadratic(a: f64, b: f64, u: f64) -> Result<f64> {
    if !(a < b) {
        return Err(config_err("u_quadratic", format!("need a < b, got [{a}, {b}]")));
    }
    let u = u.clamp(0.0, 1.0);
    Ok(a + (b - a) * (1.0 + (2.0 * u - 1.0).cbrt()) / 2.0)
}

pub fn u_quadratic_cdf(a: f64, b: f64, x: f64) -> f64 {
    let beta = (a + b) / 2.0;
    let alpha = 12.0 / (b - a).powi(3);
    let x = x.clamp(a, b);
    (alpha / 3.0) * ((x - beta).powi(3) + (beta - a).powi(3))
}

pub fn u_quadratic_time<R: Rng + ?Sized>(a: SimTime, b: SimTime, rng: &mut R) -> Result<SimTime> {
    let u: f64 = rng.gen();
    let x = sample_u_quadratic(0.0, (b.0 - a.0) as f64, u)?;
    Ok(SimTime(a.0 + (x.round() as u64).min(b.0 - a.0)))
}

/// Exponential gap with the given mean, at least one nanosecond.
pub fn exp_interarrival_ns<R: Rng + ?Sized>(mean_ns: f64, rng: &mut R) -> Result<u64> {
    if !(mean_ns > 0.0) || !mean_ns.is_finite() {
        return Err(config_err("lambda_a", "mean inter-arrival must be positive"));
    }
    let exp = Exp::new(1.0 / mean_ns).expect("positive rate");
    Ok((exp.sample(rng).round() as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn literal(a: f64, b: f64, u: f64) -> f64 {
        let beta = (a + b) / 2.0;
        let alpha = 12.0 / (b - a).powi(3);
        beta + (3.0 * u / alpha - (beta - a).powi(3)).cbrt()
    }

    #[test]
    fn endpoints_and_centre() {
        let (a, b) = (2.0, 10.0);
        assert!((sample_u_quadratic(a, b, 0.0).unwrap() - a).abs() < 1e-12);
        assert!((sample_u_quadratic(a, b, 1.0).unwrap() - b).abs() < 1e-12);
        assert!((sample_u_quadratic(a, b, 0.5).unwrap() - 6.0).abs() < 1e-12);
        for u in [0.01, 0.2, 0.49, 0.7, 0.99] {
            assert!((sample_u_quadratic(a, b, u).unwrap() - literal(a, b, u)).abs() < 1e-9);
        }
        assert!(sample_u_quadratic(3.0, 3.0, 0.5).is_err());
    }

    #[test]
    fn cdf_inverts_sampler() {
        for u in [0.0, 0.1, 0.5, 0.93, 1.0] {
            let x = sample_u_quadratic(-1.0, 4.0, u).unwrap();
            assert!((u_quadratic_cdf(-1.0, 4.0, x) - u).abs() < 1e-12);
        }
    }
}
