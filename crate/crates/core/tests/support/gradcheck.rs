// Central finite-difference oracle for network gradients. It only calls the
// forward pass and the loss, never the backward pass it checks.

use lob_arena_core::nn::{Activation, Architecture, Head, MlpModel, Mode, Targets};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct CheckOutcome {
    pub max_rel_error: f64,
    pub checked: usize,
}

pub fn random_architecture(rng: &mut ChaCha8Rng, head: Head) -> Architecture {
    let hidden = rng.gen_range(1..=3);
    let mut sizes = vec![rng.gen_range(2..=5)];
    for _ in 0..hidden {
        sizes.push(rng.gen_range(2..=6));
    }
    sizes.push(rng.gen_range(2..=4));
    let activations = (0..hidden)
        .map(|_| if rng.gen_bool(0.5) { Activation::Relu } else { Activation::Sigmoid })
        .collect();
    let dropout = (0..hidden)
        .map(|_| if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.1..0.5) })
        .collect();
    Architecture { sizes, activations, dropout, head }
}

fn loss_with_masks(model: &MlpModel<f64>, x: &Array2<f64>, t: &Targets<'_, f64>, mask_seed: u64) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(mask_seed);
    let pass = model.forward(x.view(), Mode::Train(&mut r)).unwrap();
    model.loss(&pass, t).unwrap()
}

/// Relative error `|a - n| / max(|a|, |n|, floor)`.
pub fn rel_error(a: f64, n: f64, floor: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(floor)
}

pub fn check_network(seed: u64, head: Head) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arch = random_architecture(&mut rng, head);
    let (d_in, d_out) = (arch.input_width(), arch.output_width());
    let mut model = MlpModel::<f64>::init(arch, &mut rng).unwrap();
    // Non-zero biases so sigmoid and ReLU units sit away from symmetric points.
    for layer in &mut model.layers {
        layer.bias.mapv_inplace(|_| rng.gen_range(-0.3..0.3));
    }
    let batch = 5;
    let x = Array2::from_shape_simple_fn((batch, d_in), || rng.gen_range(-1.0..1.0));
    let classes: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..d_out)).collect();
    let values = Array2::from_shape_simple_fn((batch, d_out), || rng.gen_range(-1.0..1.0));
    let targets = match head {
        Head::Softmax => Targets::Classes(&classes),
        Head::Linear => Targets::Values(values.view()),
    };
    let mask_seed = rng.gen();
    let mut r = ChaCha8Rng::seed_from_u64(mask_seed);
    let pass = model.forward(x.view(), Mode::Train(&mut r)).unwrap();
    let grads = model.backward(&pass, &targets).unwrap();

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for l in 0..model.layers.len() {
        let (rows, cols) = model.layers[l].weights.dim();
        for i in 0..rows {
            for j in 0..cols {
                let orig = model.layers[l].weights[[i, j]];
                model.layers[l].weights[[i, j]] = orig + h;
                let up = loss_with_masks(&model, &x, &targets, mask_seed);
                model.layers[l].weights[[i, j]] = orig - h;
                let down = loss_with_masks(&model, &x, &targets, mask_seed);
                model.layers[l].weights[[i, j]] = orig;
                let numeric = (up - down) / (2.0 * h);
                worst = worst.max(rel_error(grads.layers[l].weights[[i, j]], numeric, 1e-6));
                checked += 1;
            }
        }
        for j in 0..model.layers[l].bias.len() {
            let orig = model.layers[l].bias[j];
            model.layers[l].bias[j] = orig + h;
            let up = loss_with_masks(&model, &x, &targets, mask_seed);
            model.layers[l].bias[j] = orig - h;
            let down = loss_with_masks(&model, &x, &targets, mask_seed);
            model.layers[l].bias[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max(rel_error(grads.layers[l].bias[j], numeric, 1e-6));
            checked += 1;
        }
    }
    CheckOutcome { max_rel_error: worst, checked }
}
