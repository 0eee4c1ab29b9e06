use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, AdamState, Architecture, Head, MlpModel, Mode, Targets};
use crate::error::{invalid, Error, Result};
use crate::Scalar;

/// Cloners refuse to train on fewer demonstrations than this.
pub const MIN_CLONER_SAMPLES: usize = 100;

const PREDICT_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub hidden: Vec<usize>,
    /// Per-hidden-layer activations; `None` means ReLU everywhere except a
    /// sigmoid last hidden layer.
    pub activations: Option<Vec<Activation>>,
    pub dropout: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            hidden: Architecture::HIDDEN.to_vec(),
            activations: None,
            dropout: 0.2,
            learning_rate: 1e-3,
            batch_size: 128,
            epochs: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl Hyperparams {
    pub fn architecture(&self, input: usize, output: usize, head: Head) -> Result<Architecture> {
        let mut arch =
            Architecture::relu_then_sigmoid(input, &self.hidden, output, self.dropout, head);
        if let Some(acts) = &self.activations {
            arch.activations = acts.clone();
        }
        arch.validate()?;
        Ok(arch)
    }

    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be positive"));
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate", "must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_loss: Option<f64>,
    pub valid_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

impl TrainHistory {
    pub fn first_loss(&self) -> Option<f64> {
        self.epochs.first().map(|e| e.train_loss)
    }

    pub fn last_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_loss)
    }
}

enum Supervision<'a, T> {
    Classes(&'a [usize]),
    Values(ArrayView2<'a, T>),
}

fn fit<T: Scalar>(
    model: &mut MlpModel<T>,
    x: ArrayView2<'_, T>,
    y: Supervision<'_, T>,
    valid: Option<(ArrayView2<'_, T>, &[usize])>,
    hp: &Hyperparams,
    rng: &mut ChaCha8Rng,
) -> Result<TrainHistory> {
    let mut adam = AdamState::<T>::new(hp.learning_rate)
        .with_betas(hp.beta1, hp.beta2)
        .with_epsilon(hp.epsilon);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut history = TrainHistory::default();
    for epoch in 1..=hp.epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for chunk in order.chunks(hp.batch_size) {
            let xb = x.select(Axis(0), chunk);
            let pass = model.forward(xb.view(), Mode::Train(rng))?;
            let (loss, grads) = match &y {
                Supervision::Classes(ys) => {
                    let yb: Vec<usize> = chunk.iter().map(|&i| ys[i]).collect();
                    let t = Targets::Classes(&yb);
                    (model.loss(&pass, &t)?, model.backward(&pass, &t)?)
                }
                Supervision::Values(ys) => {
                    let yb = ys.select(Axis(0), chunk);
                    let t = Targets::Values(yb.view());
                    (model.loss(&pass, &t)?, model.backward(&pass, &t)?)
                }
            };
            let loss = loss.as_f64();
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            total += loss * chunk.len() as f64;
            adam.update(&mut model.params_mut(), &grads.slices())?;
        }
        let train_loss = total / x.nrows() as f64;
        let (valid_loss, valid_accuracy) = match valid {
            Some((vx, vy)) if vx.nrows() > 0 => {
                let p = predict_proba(model, vx)?;
                let n = vy.len() as f64;
                let ce = vy
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| -p[[i, c]].as_f64().max(f64::MIN_POSITIVE).ln())
                    .sum::<f64>()
                    / n;
                let hits = argmax_rows(&p)
                    .iter()
                    .zip(vy)
                    .filter(|(a, b)| a == b)
                    .count();
                (Some(ce), Some(hits as f64 / n))
            }
            _ => (None, None),
        };
        log::debug!("epoch {epoch}: train loss {train_loss:.5}");
        history.epochs.push(EpochStats {
            epoch,
            train_loss,
            valid_loss,
            valid_accuracy,
        });
    }
    Ok(history)
}

/// Trains a softmax classifier with mini-batch Adam. Deterministic in `seed`.
pub fn train_classifier<T: Scalar>(
    x: ArrayView2<'_, T>,
    labels: &[usize],
    n_classes: usize,
    valid: Option<(ArrayView2<'_, T>, &[usize])>,
    hp: &Hyperparams,
    seed: u64,
) -> Result<(MlpModel<T>, TrainHistory)> {
    hp.validate()?;
    if x.nrows() == 0 || x.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} rows vs {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    if n_classes < 2 || labels.iter().any(|&c| c >= n_classes) {
        return Err(invalid("labels", format!("must lie in 0..{n_classes}")));
    }
    let arch = hp.architecture(x.ncols(), n_classes, Head::Softmax)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MlpModel::init(arch, &mut rng)?;
    let history = fit(
        &mut model,
        x,
        Supervision::Classes(labels),
        valid,
        hp,
        &mut rng,
    )?;
    Ok((model, history))
}

/// Trains a linear-head regressor on one archetype's demonstrations.
pub fn train_cloner<T: Scalar>(
    observations: ArrayView2<'_, T>,
    actions: ArrayView2<'_, T>,
    hp: &Hyperparams,
    seed: u64,
) -> Result<(MlpModel<T>, TrainHistory)> {
    hp.validate()?;
    if observations.nrows() < MIN_CLONER_SAMPLES {
        return Err(invalid(
            "samples",
            format!(
                "cloner needs at least {MIN_CLONER_SAMPLES} demonstrations, got {}",
                observations.nrows()
            ),
        ));
    }
    if observations.nrows() != actions.nrows() {
        return Err(Error::Shape(format!(
            "{} observations vs {} actions",
            observations.nrows(),
            actions.nrows()
        )));
    }
    let arch = hp.architecture(observations.ncols(), actions.ncols(), Head::Linear)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MlpModel::init(arch, &mut rng)?;
    let history = fit(
        &mut model,
        observations,
        Supervision::Values(actions),
        None,
        hp,
        &mut rng,
    )?;
    Ok((model, history))
}

/// Eval-mode outputs computed in fixed-size chunks.
pub fn predict_proba<T: Scalar>(model: &MlpModel<T>, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
    if x.nrows() == 0 {
        return Ok(Array2::zeros((0, model.arch.output_width())));
    }
    let parts = x
        .axis_chunks_iter(Axis(0), PREDICT_CHUNK)
        .map(|c| model.predict(c))
        .collect::<Result<Vec<_>>>()?;
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    concatenate(Axis(0), &views).map_err(|e| Error::Shape(e.to_string()))
}

pub fn predict_classes<T: Scalar>(model: &MlpModel<T>, x: ArrayView2<'_, T>) -> Result<Vec<usize>> {
    Ok(argmax_rows(&predict_proba(model, x)?))
}

/// Row-wise argmax; ties go to the smaller index.
pub(crate) fn argmax_rows<T: Scalar>(p: &Array2<T>) -> Vec<usize> {
    p.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}
