mod support;

use lob_arena_core::nn::{Activation, Architecture, Head, MlpModel, Mode};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::gradcheck::check_network;

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..20u64 {
        let head = if seed % 2 == 0 { Head::Softmax } else { Head::Linear };
        let out = check_network(seed, head);
        assert!(out.checked > 0);
        assert!(
            out.max_rel_error < 1e-4,
            "seed {seed}: relative error {:.3e}",
            out.max_rel_error
        );
    }
}

#[test]
fn fixed_shape_4_5_3_gradients() {
    // The [4, 5, 3] net from the operation examples, both heads.
    for head in [Head::Softmax, Head::Linear] {
        let mut worst: f64 = 0.0;
        for seed in 100..105 {
            let out = support::gradcheck::check_network(seed, head);
            worst = worst.max(out.max_rel_error);
        }
        assert!(worst < 1e-4);
    }
}

#[test]
fn dropout_matches_expectation_in_eval_mode() {
    // Eval-mode pre-activations of the output layer against the Monte Carlo
    // mean of train-mode pre-activations over 10^4 mask draws.
    let arch = Architecture {
        sizes: vec![6, 32, 3],
        activations: vec![Activation::Relu],
        dropout: vec![0.4],
        head: Head::Linear,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let model = MlpModel::<f64>::init(arch, &mut rng).unwrap();
    let x = Array2::from_shape_simple_fn((1, 6), || rng.gen_range(0.2..1.0));
    let eval = model.predict(x.view()).unwrap();
    let draws = 10_000;
    let mut acc = Array2::<f64>::zeros((1, 3));
    for _ in 0..draws {
        acc += model.forward(x.view(), Mode::Train(&mut rng)).unwrap().output();
    }
    acc /= draws as f64;
    let scale = eval.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for (a, e) in acc.iter().zip(eval.iter()) {
        assert!((a - e).abs() <= 0.02 * scale, "mc {a} vs eval {e}");
    }
}
