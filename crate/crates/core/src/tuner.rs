//! Random search over training hyperparameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::nn::Hyperparams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Learning rate bounds, sampled log-uniformly.
    pub learning_rate: (f64, f64),
    /// Dropout bounds, sampled uniformly.
    pub dropout: (f64, f64),
    pub batch_sizes: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            learning_rate: (1e-4, 1e-2),
            dropout: (0.0, 0.5),
            batch_sizes: vec![32, 64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub params: Hyperparams,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Hyperparams,
    pub best_score: f64,
    pub trials: Vec<Trial>,
}

/// Samples `budget` configurations around `base` and keeps the one with the
/// largest objective. The first trial wins ties.
pub fn random_search<F>(
    space: &SearchSpace,
    base: &Hyperparams,
    budget: usize,
    mut objective: F,
    seed: u64,
) -> Result<SearchResult>
where
    F: FnMut(&Hyperparams) -> Result<f64>,
{
    if budget == 0 {
        return Err(invalid("budget", "must be at least 1"));
    }
    let (lo, hi) = space.learning_rate;
    if !(lo > 0.0 && hi >= lo) {
        return Err(invalid("learning_rate", "need 0 < low <= high"));
    }
    let (dlo, dhi) = space.dropout;
    if !(0.0..1.0).contains(&dlo) || !(dlo..1.0).contains(&dhi) {
        return Err(invalid("dropout", "need 0 <= low <= high < 1"));
    }
    if space.batch_sizes.is_empty() || space.batch_sizes.contains(&0) {
        return Err(invalid("batch_sizes", "need at least one positive size"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials: Vec<Trial> = Vec::with_capacity(budget);
    for _ in 0..budget {
        let lr = (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp();
        let dropout = dlo + rng.gen::<f64>() * (dhi - dlo);
        let batch_size = space.batch_sizes[rng.gen_range(0..space.batch_sizes.len())];
        let params = Hyperparams {
            learning_rate: lr,
            dropout,
            batch_size,
            ..base.clone()
        };
        let score = objective(&params)?;
        log::info!("trial lr={lr:.2e} dropout={dropout:.3} batch={batch_size}: {score:.4}");
        trials.push(Trial { params, score });
    }
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.score > trials[best].score {
            best = i;
        }
    }
    Ok(SearchResult {
        best: trials[best].params.clone(),
        best_score: trials[best].score,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_one_returns_the_sample() {
        let r = random_search(&SearchSpace::default(), &Hyperparams::default(), 1, |_| Ok(0.0), 3).unwrap();
        assert_eq!(r.trials.len(), 1);
        assert_eq!(r.best, r.trials[0].params);
    }

    #[test]
    fn negative_lr_objective_picks_smallest_lr() {
        let r = random_search(
            &SearchSpace::default(),
            &Hyperparams::default(),
            12,
            |h| Ok(-h.learning_rate),
            5,
        )
        .unwrap();
        let min = r
            .trials
            .iter()
            .map(|t| t.params.learning_rate)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.best.learning_rate, min);
        for t in &r.trials {
            assert!((1e-4..=1e-2).contains(&t.params.learning_rate));
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let run = || {
            random_search(&SearchSpace::default(), &Hyperparams::default(), 6, |h| Ok(h.dropout), 9)
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(random_search(&SearchSpace::default(), &Hyperparams::default(), 0, |_| Ok(0.0), 0).is_err());
    }
}
