//! Training-loop tests: gradient correctness against central finite
//! differences, determinism, convergence on a separable toy set, error
//! paths, and the checkpoint format.

use drift_core::mlp::{
    evaluate, init_model, loss_and_grad, train, train_logged, MlpModel, OptimizerKind, TrainConfig,
};
use drift_core::Error;
use ndarray::{Array2, Axis};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_batch(rows: usize, cols: usize, classes: usize, seed: u64) -> (Array2<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0));
    let y = (0..rows).map(|_| rng.random_range(0..classes) as u8).collect();
    (x, y)
}

/// Central finite differences over every parameter coordinate.
fn numerical_gradients(
    model: &MlpModel<f64>,
    batch: &Array2<f64>,
    labels: &[u8],
    h: f64,
) -> (Vec<Array2<f64>>, Vec<ndarray::Array1<f64>>) {
    let loss_at = |m: &MlpModel<f64>| loss_and_grad(m, batch, labels).unwrap().0;
    let mut grad_w = Vec::new();
    let mut grad_b = Vec::new();
    for l in 0..model.weights().len() {
        let mut gw = Array2::<f64>::zeros(model.weights()[l].dim());
        for idx in 0..gw.len() {
            let (r, c) = (idx / gw.ncols(), idx % gw.ncols());
            let mut plus = model.clone();
            plus.weights_mut()[l][[r, c]] += h;
            let mut minus = model.clone();
            minus.weights_mut()[l][[r, c]] -= h;
            gw[[r, c]] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
        }
        grad_w.push(gw);
        let mut gb = ndarray::Array1::<f64>::zeros(model.biases()[l].len());
        for i in 0..gb.len() {
            let mut plus = model.clone();
            plus.biases_mut()[l][i] += h;
            let mut minus = model.clone();
            minus.biases_mut()[l][i] -= h;
            gb[i] = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
        }
        grad_b.push(gb);
    }
    (grad_w, grad_b)
}

fn assert_grad_close(analytic: f64, numeric: f64) {
    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
    let rel = (analytic - numeric).abs() / denom;
    assert!(
        rel < 1e-4,
        "gradient mismatch: analytic {analytic} vs numeric {numeric} (rel {rel})"
    );
}

#[test]
fn backprop_matches_central_finite_differences() {
    for seed in [0u64, 1, 2] {
        let model = init_model::<f64>(&[5, 4, 3], seed).unwrap();
        let (batch, labels) = random_batch(6, 5, 3, seed + 100);
        let (_, grads) = loss_and_grad(&model, &batch, &labels).unwrap();
        let (num_w, num_b) = numerical_gradients(&model, &batch, &labels, 1e-5);
        for l in 0..grads.weights.len() {
            for (a, n) in grads.weights[l].iter().zip(num_w[l].iter()) {
                assert_grad_close(*a, *n);
            }
            for (a, n) in grads.biases[l].iter().zip(num_b[l].iter()) {
                assert_grad_close(*a, *n);
            }
        }
    }
}

#[test]
fn training_reaches_full_accuracy_on_separable_toy() {
    // Two well-separated 2-D Gaussian blobs.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 40;
    let mut x = Array2::<f64>::zeros((n, 2));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let cx = if class == 0 { -2.0 } else { 2.0 };
        x[[i, 0]] = cx + rng.random_range(-0.5..0.5);
        x[[i, 1]] = rng.random_range(-0.5..0.5);
        y.push(class as u8);
    }
    let mut model = init_model::<f64>(&[2, 8, 2], 3).unwrap();
    let config = TrainConfig {
        batch_size: 8,
        epochs: 50,
        learning_rate: 0.05,
        optimizer: OptimizerKind::Sgd,
        seed: 5,
        shuffle: true,
    };
    let metrics = train(&mut model, &x, &y, &x, &y, &config).unwrap();
    assert!(
        metrics.iter().any(|m| m.train_acc == 1.0),
        "never reached 100% train accuracy: final {}",
        metrics.last().unwrap().train_acc
    );
}

#[test]
fn zero_epochs_yields_empty_metrics() {
    let (x, y) = random_batch(8, 3, 2, 1);
    let mut model = init_model::<f64>(&[3, 2], 0).unwrap();
    let config = TrainConfig {
        epochs: 0,
        ..TrainConfig::default()
    };
    let metrics = train(&mut model, &x, &y, &x, &y, &config).unwrap();
    assert!(metrics.is_empty());
}

#[test]
fn same_seed_gives_bitwise_identical_metrics() {
    let (x, y) = random_batch(30, 6, 3, 9);
    let (tx, ty) = random_batch(12, 6, 3, 10);
    let config = TrainConfig {
        batch_size: 4,
        epochs: 5,
        ..TrainConfig::default()
    };
    let mut m1 = init_model::<f64>(&[6, 5, 3], 77).unwrap();
    let a = train(&mut m1, &x, &y, &tx, &ty, &config).unwrap();
    let mut m2 = init_model::<f64>(&[6, 5, 3], 77).unwrap();
    let b = train(&mut m2, &x, &y, &tx, &ty, &config).unwrap();
    assert_eq!(a, b);
    for (wa, wb) in m1.weights().iter().zip(m2.weights().iter()) {
        assert_eq!(wa, wb);
    }
}

#[test]
fn divergence_is_a_hard_error_naming_the_epoch() {
    let (mut x, y) = random_batch(16, 4, 2, 3);
    x.mapv_inplace(|v| v * 1e3);
    let mut model = init_model::<f64>(&[4, 4, 2], 0).unwrap();
    let config = TrainConfig {
        batch_size: 4,
        epochs: 10,
        learning_rate: 1e30,
        optimizer: OptimizerKind::Sgd,
        ..TrainConfig::default()
    };
    match train(&mut model, &x, &y, &x, &y, &config) {
        Err(Error::NonFinite { epoch, .. }) => assert!(epoch >= 1),
        other => panic!("expected NonFinite, got {other:?}"),
    }
}

#[test]
fn evaluate_matches_slow_reference_loop() {
    let model = init_model::<f64>(&[7, 6, 4], 21).unwrap();
    let (x, y) = random_batch(23, 7, 4, 22);
    let (loss, acc) = evaluate(&model, &x, &y).unwrap();

    let mut ref_loss = 0.0;
    let mut correct = 0usize;
    for i in 0..x.nrows() {
        let row = x.slice(ndarray::s![i..i + 1, ..]).to_owned();
        let (logits, _) = model.forward(&row).unwrap();
        let max = logits.row(0).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = logits.row(0).iter().map(|z| (z - max).exp()).sum();
        ref_loss += max + sum_exp.ln() - logits[[0, y[i] as usize]];
        let mut best = 0;
        for (j, &v) in logits.row(0).iter().enumerate() {
            if v > logits[[0, best]] {
                best = j;
            }
        }
        if best == y[i] as usize {
            correct += 1;
        }
    }
    ref_loss /= x.nrows() as f64;
    assert!((loss - ref_loss).abs() < 1e-12);
    assert!((acc - correct as f64 / x.nrows() as f64).abs() < 1e-15);
}

#[test]
fn zero_model_predicts_class_zero_everywhere() {
    let mut model = init_model::<f64>(&[3, 4], 0).unwrap();
    model.weights_mut()[0].fill(0.0);
    let (x, _) = random_batch(12, 3, 4, 5);
    let y = vec![0, 1, 1, 2, 0, 3, 1, 0, 2, 2, 1, 0];
    let (loss, acc) = evaluate(&model, &x, &y).unwrap();
    assert!((loss - 4.0f64.ln()).abs() < 1e-12);
    let class0 = y.iter().filter(|&&l| l == 0).count() as f64 / y.len() as f64;
    assert!((acc - class0).abs() < 1e-15);
}

#[test]
fn perfect_logits_give_full_accuracy() {
    // A linear layer that copies the (one-hot) input to the logits.
    let mut model = init_model::<f64>(&[3, 3], 0).unwrap();
    model.weights_mut()[0].assign(&(Array2::<f64>::eye(3) * 50.0));
    let x = ndarray::arr2(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    let (loss, acc) = evaluate(&model, &x, &[0, 1, 2]).unwrap();
    assert_eq!(acc, 1.0);
    assert!(loss < 1e-12);
}

#[test]
fn sgd_loss_is_non_increasing_on_memorizable_toy_after_warmup() {
    // 20 samples, generous margins, SGD lr = 0.01; at most 5% upticks after
    // epoch 5.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 20;
    let mut x = Array2::<f64>::zeros((n, 3));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 4;
        for j in 0..3 {
            x[[i, j]] = rng.random_range(-0.2..0.2);
        }
        if class < 3 {
            x[[i, class]] += 2.0;
        } else {
            x[[i, 0]] -= 2.0;
        }
        y.push(class as u8);
    }
    let mut model = init_model::<f64>(&[3, 16, 4], 2).unwrap();
    let config = TrainConfig {
        batch_size: 5,
        epochs: 60,
        learning_rate: 0.01,
        optimizer: OptimizerKind::Sgd,
        seed: 11,
        shuffle: true,
    };
    let metrics = train(&mut model, &x, &y, &x, &y, &config).unwrap();
    let tail: Vec<f64> = metrics.iter().skip(5).map(|m| m.train_loss).collect();
    let upticks = tail.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    let allowed = (tail.len() as f64 * 0.05).ceil() as usize;
    assert!(
        upticks <= allowed,
        "{upticks} upticks in {} epochs (allowed {allowed})",
        tail.len()
    );
}

#[test]
fn checkpoint_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    let model = init_model::<f64>(&[9, 5, 4], 31).unwrap();
    model.save(&path).unwrap();

    // Header: layer count plus sizes as little-endian u32, then f64 params.
    let expected_len = 4 + 3 * 4 + 8 * ((5 * 9 + 5) + (4 * 5 + 4));
    assert_eq!(std::fs::metadata(&path).unwrap().len(), expected_len as u64);

    let restored = MlpModel::<f64>::load(&path).unwrap();
    assert_eq!(restored.layer_sizes(), model.layer_sizes());
    for (a, b) in restored.weights().iter().zip(model.weights().iter()) {
        assert_eq!(a, b);
    }
    for (a, b) in restored.biases().iter().zip(model.biases().iter()) {
        assert_eq!(a, b);
    }
}

#[test]
fn train_logged_records_every_optimizer_step() {
    let (x, y) = random_batch(10, 3, 2, 40);
    let mut model = init_model::<f64>(&[3, 2], 8).unwrap();
    let config = TrainConfig {
        batch_size: 4,
        epochs: 3,
        ..TrainConfig::default()
    };
    let (metrics, batch_losses) = train_logged(&mut model, &x, &y, &x, &y, &config).unwrap();
    assert_eq!(metrics.len(), 3);
    // 10 samples at batch 4 -> 3 steps per epoch (last batch partial).
    assert_eq!(batch_losses.len(), 9);
    assert!(batch_losses.iter().all(|l| l.is_finite()));
}

#[test]
fn partial_final_batch_is_used() {
    // 5 samples, batch 4: the single leftover sample must still train.
    // With lr high enough, the parameters change after the second step.
    let (x, y) = random_batch(5, 3, 2, 50);
    let mut model = init_model::<f64>(&[3, 2], 8).unwrap();
    let config = TrainConfig {
        batch_size: 4,
        epochs: 1,
        learning_rate: 0.5,
        optimizer: OptimizerKind::Sgd,
        shuffle: false,
        ..TrainConfig::default()
    };
    let (_, batch_losses) = train_logged(&mut model, &x, &y, &x, &y, &config).unwrap();
    assert_eq!(batch_losses.len(), 2);
}
