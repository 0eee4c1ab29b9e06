//! Feed-forward network with dropout, trained by backpropagation and Adam.

mod adam;
mod io;
mod train;

pub use adam::AdamState;
pub use io::{read_model, write_model, ModelHeader};
pub use train::{
    predict_classes, predict_proba, train_classifier, train_cloner, EpochStats, Hyperparams,
    TrainHistory, MIN_CLONER_SAMPLES,
};

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    /// Softmax probabilities trained with cross-entropy.
    Softmax,
    /// Identity output trained with mean squared error.
    Linear,
}

/// Layer sizes (input first, output last), per-hidden-layer activation and
/// dropout rate, and the output head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub dropout: Vec<f64>,
    pub head: Head,
}

impl Architecture {
    /// Hidden widths used by the archetype classifier and cloners.
    pub const HIDDEN: [usize; 4] = [256, 1024, 1024, 1024];

    /// ReLU on every hidden layer except the last, which is sigmoid.
    pub fn relu_then_sigmoid(
        input: usize,
        hidden: &[usize],
        output: usize,
        dropout: f64,
        head: Head,
    ) -> Self {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(hidden);
        sizes.push(output);
        let activations = (0..hidden.len())
            .map(|i| {
                if i + 1 == hidden.len() {
                    Activation::Sigmoid
                } else {
                    Activation::Relu
                }
            })
            .collect();
        Self {
            sizes,
            activations,
            dropout: vec![dropout; hidden.len()],
            head,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 {
            return Err(invalid("sizes", "need at least input and output sizes"));
        }
        if self.sizes.iter().any(|&s| s == 0) {
            return Err(invalid("sizes", "layer widths must be positive"));
        }
        let hidden = self.sizes.len() - 2;
        if self.activations.len() != hidden || self.dropout.len() != hidden {
            return Err(invalid(
                "activations",
                format!("expected {hidden} hidden activations and dropout rates"),
            ));
        }
        if let Some(p) = self.dropout.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(invalid("dropout", format!("{p} outside [0, 1)")));
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.sizes.last().expect("validated")
    }
}

/// Affine map stored as `inputs x outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T> {
    pub arch: Architecture,
    pub layers: Vec<Dense<T>>,
}

/// Gradients with the same layout as [`MlpModel::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<Dense<T>>,
}

/// Dropout is active only in `Train` mode.
pub enum Mode<'a, R: Rng> {
    Eval,
    Train(&'a mut R),
}

/// Activations retained for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass<T> {
    /// `inputs[l]` is the input to layer `l` (after dropout for hidden layers).
    inputs: Vec<Array2<T>>,
    /// Post-activation hidden outputs before dropout.
    hidden: Vec<Array2<T>>,
    /// Scaled keep masks (`0` or `1/(1-p)`) per hidden layer, when training.
    masks: Vec<Option<Array2<T>>>,
    output: Array2<T>,
}

impl<T: Scalar> ForwardPass<T> {
    pub fn output(&self) -> &Array2<T> {
        &self.output
    }

    pub fn into_output(self) -> Array2<T> {
        self.output
    }
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn softmax_rows<T: Scalar>(z: &mut Array2<T>) {
    for mut row in z.axis_iter_mut(Axis(0)) {
        let max = row.fold(T::neg_infinity(), |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

impl<T: Scalar> MlpModel<T> {
    /// Uniform fan-in initialisation: limit `sqrt(6/fan_in)` for layers that
    /// feed a ReLU, `sqrt(3/fan_in)` otherwise. Biases start at zero.
    pub fn init<R: Rng>(arch: Architecture, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let mut layers = Vec::with_capacity(arch.sizes.len() - 1);
        for l in 0..arch.sizes.len() - 1 {
            let (fan_in, fan_out) = (arch.sizes[l], arch.sizes[l + 1]);
            let gain = match arch.activations.get(l) {
                Some(Activation::Relu) => 6.0,
                _ => 3.0,
            };
            let limit = (gain / fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit);
            let weights = Array2::from_shape_simple_fn((fan_in, fan_out), || {
                T::of(dist.sample(rng))
            });
            layers.push(Dense {
                weights,
                bias: Array1::zeros(fan_out),
            });
        }
        Ok(Self { arch, layers })
    }

    /// Model with every weight and bias set to zero.
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let layers = arch
            .sizes
            .windows(2)
            .map(|w| Dense {
                weights: Array2::zeros((w[0], w[1])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        Ok(Self { arch, layers })
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|d| d.weights.len() + d.bias.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|d| d.weights.iter().chain(d.bias.iter()).all(|v| v.is_finite()))
    }

    pub fn forward<R: Rng>(
        &self,
        batch: ArrayView2<'_, T>,
        mode: Mode<'_, R>,
    ) -> Result<ForwardPass<T>> {
        if batch.ncols() != self.arch.input_width() {
            return Err(Error::Shape(format!(
                "batch has {} columns, network expects {}",
                batch.ncols(),
                self.arch.input_width()
            )));
        }
        if batch.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        let mut rng = match mode {
            Mode::Train(r) => Some(r),
            Mode::Eval => None,
        };
        let n_hidden = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut hidden = Vec::with_capacity(n_hidden);
        let mut masks = Vec::with_capacity(n_hidden);
        let mut current = batch.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weights);
            z += &layer.bias;
            inputs.push(current);
            if l == n_hidden {
                if self.arch.head == Head::Softmax {
                    softmax_rows(&mut z);
                }
                return Ok(ForwardPass {
                    inputs,
                    hidden,
                    masks,
                    output: z,
                });
            }
            match self.arch.activations[l] {
                Activation::Relu => z.mapv_inplace(|v| v.max(T::zero())),
                Activation::Sigmoid => z.mapv_inplace(sigmoid),
            }
            let p = self.arch.dropout[l];
            let mask = match rng.as_deref_mut() {
                Some(r) if p > 0.0 => {
                    let keep = T::of(1.0 / (1.0 - p));
                    Some(Array2::from_shape_simple_fn(z.raw_dim(), || {
                        if r.gen::<f64>() < p {
                            T::zero()
                        } else {
                            keep
                        }
                    }))
                }
                _ => None,
            };
            let next = match &mask {
                Some(m) => &z * m,
                None => z.clone(),
            };
            hidden.push(z);
            masks.push(mask);
            current = next;
        }
        unreachable!("loop returns at the output layer")
    }

    /// Eval-mode outputs (probabilities or regression values).
    pub fn predict(&self, batch: ArrayView2<'_, T>) -> Result<Array2<T>> {
        Ok(self
            .forward::<rand_chacha::ChaCha8Rng>(batch, Mode::Eval)?
            .into_output())
    }

    /// Mean loss of a forward pass: cross-entropy against class indices for the
    /// softmax head, mean squared error over all output elements otherwise.
    pub fn loss(&self, pass: &ForwardPass<T>, targets: &Targets<'_, T>) -> Result<T> {
        let out = pass.output();
        check_targets(out, targets, self.arch.head)?;
        let n = T::of(out.nrows() as f64);
        Ok(match targets {
            Targets::Classes(ys) => {
                let eps = T::min_positive_value();
                ys.iter()
                    .enumerate()
                    .map(|(i, &y)| {
                        let p = out[[i, y]];
                        // NaN must survive so divergence is detectable.
                        -(if p.is_nan() { p } else { p.max(eps) }).ln()
                    })
                    .sum::<T>()
                    / n
            }
            Targets::Values(y) => {
                let m = T::of(out.len() as f64);
                Zip::from(out)
                    .and(y)
                    .fold(T::zero(), |acc, &o, &t| acc + (o - t) * (o - t))
                    / m
            }
        })
    }

    /// Exact gradients of [`MlpModel::loss`] for the cached forward pass.
    pub fn backward(&self, pass: &ForwardPass<T>, targets: &Targets<'_, T>) -> Result<Gradients<T>> {
        let out = pass.output();
        check_targets(out, targets, self.arch.head)?;
        let n = T::of(out.nrows() as f64);
        let mut delta = match targets {
            Targets::Classes(ys) => {
                let mut d = out.clone();
                for (i, &y) in ys.iter().enumerate() {
                    d[[i, y]] -= T::one();
                }
                d.mapv_inplace(|v| v / n);
                d
            }
            Targets::Values(y) => {
                let scale = T::of(2.0 / out.len() as f64);
                let mut d = out - y;
                d.mapv_inplace(|v| v * scale);
                d
            }
        };
        let mut grads: Vec<Dense<T>> = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &pass.inputs[l];
            let dw = input.t().dot(&delta);
            let db = delta.sum_axis(Axis(0));
            grads.push(Dense {
                weights: dw,
                bias: db,
            });
            if l == 0 {
                break;
            }
            let mut da = delta.dot(&self.layers[l].weights.t());
            let h = l - 1;
            if let Some(mask) = &pass.masks[h] {
                da *= mask;
            }
            let act = &pass.hidden[h];
            match self.arch.activations[h] {
                Activation::Relu => Zip::from(&mut da).and(act).for_each(|d, &a| {
                    if a <= T::zero() {
                        *d = T::zero();
                    }
                }),
                Activation::Sigmoid => Zip::from(&mut da)
                    .and(act)
                    .for_each(|d, &a| *d *= a * (T::one() - a)),
            }
            delta = da;
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    pub(crate) fn params_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = Vec::with_capacity(self.layers.len() * 2);
        for d in &mut self.layers {
            v.push(d.weights.as_slice_mut().expect("standard layout"));
            v.push(d.bias.as_slice_mut().expect("standard layout"));
        }
        v
    }
}

impl<T: Scalar> Gradients<T> {
    pub fn slices(&self) -> Vec<&[T]> {
        let mut v = Vec::with_capacity(self.layers.len() * 2);
        for d in &self.layers {
            v.push(d.weights.as_slice().expect("standard layout"));
            v.push(d.bias.as_slice().expect("standard layout"));
        }
        v
    }

    pub fn max_abs(&self) -> T {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Supervision for one batch.
pub enum Targets<'a, T> {
    Classes(&'a [usize]),
    Values(ArrayView2<'a, T>),
}

fn check_targets<T: Scalar>(out: &Array2<T>, targets: &Targets<'_, T>, head: Head) -> Result<()> {
    match (targets, head) {
        (Targets::Classes(ys), Head::Softmax) => {
            if ys.len() != out.nrows() {
                return Err(Error::Shape(format!(
                    "{} labels for {} rows",
                    ys.len(),
                    out.nrows()
                )));
            }
            if let Some(&y) = ys.iter().find(|&&y| y >= out.ncols()) {
                return Err(Error::Shape(format!(
                    "label {y} out of range for {} classes",
                    out.ncols()
                )));
            }
        }
        (Targets::Values(y), Head::Linear) => {
            if y.dim() != out.dim() {
                return Err(Error::Shape(format!(
                    "targets {:?} vs outputs {:?}",
                    y.dim(),
                    out.dim()
                )));
            }
        }
        _ => {
            return Err(Error::Shape(
                "target kind does not match the network head".into(),
            ))
        }
    }
    Ok(())
}
