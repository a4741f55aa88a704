//! A from-scratch feedforward classifier: forward pass, softmax
//! cross-entropy, backpropagation, SGD/Adam, and deterministic mini-batch
//! training.
//!
//! Hidden layers use the rectifier `max(0, x)`; the output layer is linear
//! (logits). Training is a single logical sequence: given a seed and a
//! thread-free build, two runs produce bit-identical metrics.

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::transform::FeatureMatrix;
use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Rows evaluated per forward chunk when computing split metrics.
const EVAL_CHUNK: usize = 512;

/// Weights and biases of a feedforward classifier.
///
/// `weights[l]` has shape `(layer_sizes[l+1], layer_sizes[l])` and
/// `biases[l]` has length `layer_sizes[l+1]`.
#[derive(Debug, Clone)]
pub struct MlpModel<T> {
    layer_sizes: Vec<usize>,
    weights: Vec<Array2<T>>,
    biases: Vec<Array1<T>>,
}

/// Parameter gradients, mirroring the model's shapes.
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    pub weights: Vec<Array2<T>>,
    pub biases: Vec<Array1<T>>,
}

/// Activations retained by the forward pass for backpropagation.
///
/// `activations[0]` is the input batch, `activations[l]` for hidden layers is
/// the post-rectifier output, and the final entry is the logits.
pub struct ForwardCache<T> {
    pub activations: Vec<Array2<T>>,
}

/// Initialize a model with fan-in-scaled Gaussian weights and zero biases.
///
/// Weights are drawn as `N(0, 2/fan_in)` from a generator seeded with `seed`,
/// so the same seed reproduces the same parameters bit for bit.
pub fn init_model<T: Scalar>(layer_sizes: &[usize], seed: u64) -> Result<MlpModel<T>> {
    if layer_sizes.len() < 2 {
        return Err(Error::invalid(
            "init_model: need at least input and output sizes",
        ));
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(Error::invalid("init_model: layer sizes must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
    let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
    for w in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let scale = (2.0 / fan_in as f64).sqrt();
        let weight = Array2::from_shape_fn((fan_out, fan_in), |_| {
            cast::<T>(rng.sample::<f64, _>(rand_distr::StandardNormal) * scale)
        });
        weights.push(weight);
        biases.push(Array1::zeros(fan_out));
    }
    Ok(MlpModel {
        layer_sizes: layer_sizes.to_vec(),
        weights,
        biases,
    })
}

impl<T: Scalar> MlpModel<T> {
    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn weights(&self) -> &[Array2<T>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<T>] {
        &self.biases
    }

    /// Mutable access to the weights; shapes must be preserved.
    pub fn weights_mut(&mut self) -> &mut [Array2<T>] {
        &mut self.weights
    }

    /// Mutable access to the biases; lengths must be preserved.
    pub fn biases_mut(&mut self) -> &mut [Array1<T>] {
        &mut self.biases
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Forward pass over a batch, returning logits and cached activations.
    pub fn forward(&self, batch: &FeatureMatrix<T>) -> Result<(Array2<T>, ForwardCache<T>)> {
        if batch.ncols() != self.input_dim() {
            return Err(Error::invalid(format!(
                "forward: batch has {} columns, model expects {}",
                batch.ncols(),
                self.input_dim()
            )));
        }
        let layers = self.weights.len();
        let mut activations = Vec::with_capacity(layers + 1);
        activations.push(batch.clone());
        for l in 0..layers {
            let z = activations[l].dot(&self.weights[l].t()) + &self.biases[l];
            let a = if l + 1 < layers {
                z.mapv(|x| x.max(T::zero()))
            } else {
                z
            };
            activations.push(a);
        }
        let logits = activations.last().unwrap().clone();
        Ok((logits, ForwardCache { activations }))
    }

    /// Class predictions: argmax of the logits, lowest index on ties.
    pub fn predict(&self, batch: &FeatureMatrix<T>) -> Result<Vec<usize>> {
        let (logits, _) = self.forward(batch)?;
        Ok(logits.outer_iter().map(|row| argmax(row.iter())).collect())
    }

    /// Write the checkpoint format: little-endian u32 layer count and sizes,
    /// then per layer the weights (row-major) followed by the bias, all as
    /// little-endian f64.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        w.write_all(&(self.layer_sizes.len() as u32).to_le_bytes())
            .map_err(io)?;
        for &s in &self.layer_sizes {
            w.write_all(&(s as u32).to_le_bytes()).map_err(io)?;
        }
        for l in 0..self.weights.len() {
            for &x in self.weights[l].iter() {
                w.write_all(&x.to_f64().unwrap().to_le_bytes()).map_err(io)?;
            }
            for &x in self.biases[l].iter() {
                w.write_all(&x.to_f64().unwrap().to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    /// Read a checkpoint written by [`save`](Self::save).
    pub fn load(path: &Path) -> Result<MlpModel<T>> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let io = |e| Error::io(path, e);
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf).map_err(io)?;
        let count = u32::from_le_bytes(u32buf) as usize;
        if count < 2 {
            return Err(Error::invalid(format!(
                "checkpoint {} declares {count} layer sizes",
                path.display()
            )));
        }
        let mut layer_sizes = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut u32buf).map_err(io)?;
            layer_sizes.push(u32::from_le_bytes(u32buf) as usize);
        }
        let mut f64buf = [0u8; 8];
        let mut read_t = |r: &mut BufReader<File>| -> Result<T> {
            r.read_exact(&mut f64buf).map_err(|e| Error::io(path, e))?;
            Ok(cast::<T>(f64::from_le_bytes(f64buf)))
        };
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for lw in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (lw[0], lw[1]);
            let mut wdata = Vec::with_capacity(fan_out * fan_in);
            for _ in 0..fan_out * fan_in {
                wdata.push(read_t(&mut r)?);
            }
            weights.push(Array2::from_shape_vec((fan_out, fan_in), wdata).unwrap());
            let mut bdata = Vec::with_capacity(fan_out);
            for _ in 0..fan_out {
                bdata.push(read_t(&mut r)?);
            }
            biases.push(Array1::from_vec(bdata));
        }
        Ok(MlpModel {
            layer_sizes,
            weights,
            biases,
        })
    }

    fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|x| x.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }
}

fn argmax<'a, T: Scalar>(iter: impl Iterator<Item = &'a T>) -> usize {
    let mut best = T::neg_infinity();
    let mut arg = 0;
    for (i, &v) in iter.enumerate() {
        if v > best {
            best = v;
            arg = i;
        }
    }
    arg
}

/// Row-wise softmax with max subtraction. Rows sum to one.
pub(crate) fn softmax_rows<T: Scalar>(logits: &Array2<T>) -> Array2<T> {
    let mut probs = logits.clone();
    for mut row in probs.rows_mut() {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|x| x / sum);
    }
    probs
}

/// Mean softmax cross-entropy of a batch and its parameter gradients by
/// backpropagation. Gradient shapes mirror the model's.
pub fn loss_and_grad<T: Scalar>(
    model: &MlpModel<T>,
    batch: &FeatureMatrix<T>,
    labels: &[u8],
) -> Result<(T, Gradients<T>)> {
    if batch.nrows() != labels.len() {
        return Err(Error::invalid(format!(
            "loss_and_grad: {} rows but {} labels",
            batch.nrows(),
            labels.len()
        )));
    }
    let classes = model.output_dim();
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
        return Err(Error::invalid(format!(
            "loss_and_grad: label {bad} is outside 0..{classes}"
        )));
    }
    let (logits, cache) = model.forward(batch)?;
    let b = batch.nrows();
    let inv_b = T::one() / cast::<T>(b as f64);

    // Stable per-row loss: lse(z) - z_y with the max subtracted inside.
    let mut loss = T::zero();
    for (row, &y) in logits.outer_iter().zip(labels.iter()) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let sum_exp = row.iter().map(|&z| (z - max).exp()).sum::<T>();
        loss += max + sum_exp.ln() - row[y as usize];
    }
    loss *= inv_b;

    // delta at the output: (softmax - onehot) / B
    let mut delta = softmax_rows(&logits);
    for (i, &y) in labels.iter().enumerate() {
        delta[[i, y as usize]] -= T::one();
    }
    delta.mapv_inplace(|x| x * inv_b);

    let layers = model.weights.len();
    let mut grad_w = vec![Array2::<T>::zeros((0, 0)); layers];
    let mut grad_b = vec![Array1::<T>::zeros(0); layers];
    for l in (0..layers).rev() {
        grad_w[l] = delta.t().dot(&cache.activations[l]);
        grad_b[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut prev = delta.dot(&model.weights[l]);
            // Rectifier gate: the cached activation is positive iff the
            // pre-activation was.
            prev.zip_mut_with(&cache.activations[l], |d, &a| {
                if a <= T::zero() {
                    *d = T::zero();
                }
            });
            delta = prev;
        }
    }
    Ok((
        loss,
        Gradients {
            weights: grad_w,
            biases: grad_b,
        },
    ))
}

/// Optimizer selection. Adam carries its standard constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates carried across [`optimizer_step`] calls.
#[derive(Debug, Clone)]
pub struct OptimizerState<T> {
    step: u64,
    m_w: Vec<Array2<T>>,
    v_w: Vec<Array2<T>>,
    m_b: Vec<Array1<T>>,
    v_b: Vec<Array1<T>>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(model: &MlpModel<T>) -> Self {
        OptimizerState {
            step: 0,
            m_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_w: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_b: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// Apply one optimizer update in place.
///
/// SGD: `theta <- theta - lr * g`. Adam: bias-corrected first/second moments
/// with the configured constants.
pub fn optimizer_step<T: Scalar>(
    model: &mut MlpModel<T>,
    grads: &Gradients<T>,
    state: &mut OptimizerState<T>,
    config: &TrainConfig,
) -> Result<()> {
    if grads.weights.len() != model.weights.len() || grads.biases.len() != model.biases.len() {
        return Err(Error::invalid("optimizer_step: gradient/model layer mismatch"));
    }
    for l in 0..model.weights.len() {
        if grads.weights[l].dim() != model.weights[l].dim()
            || grads.biases[l].len() != model.biases[l].len()
        {
            return Err(Error::invalid(format!(
                "optimizer_step: gradient shape mismatch at layer {l}"
            )));
        }
    }
    let lr = cast::<T>(config.learning_rate);
    match config.optimizer {
        OptimizerKind::Sgd => {
            for l in 0..model.weights.len() {
                model.weights[l].scaled_add(-lr, &grads.weights[l]);
                model.biases[l].scaled_add(-lr, &grads.biases[l]);
            }
        }
        OptimizerKind::Adam {
            beta1,
            beta2,
            epsilon,
        } => {
            state.step += 1;
            let t = state.step as i32;
            let b1 = cast::<T>(beta1);
            let b2 = cast::<T>(beta2);
            let eps = cast::<T>(epsilon);
            let c1 = T::one() - cast::<T>(beta1.powi(t));
            let c2 = T::one() - cast::<T>(beta2.powi(t));
            let one = T::one();
            let update = |param: &mut T, g: T, m: &mut T, v: &mut T| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *param = *param - lr * m_hat / (v_hat.sqrt() + eps);
            };
            for l in 0..model.weights.len() {
                let (w, g) = (&mut model.weights[l], &grads.weights[l]);
                let (m, v) = (&mut state.m_w[l], &mut state.v_w[l]);
                for ((param, &grad), (m, v)) in
                    w.iter_mut().zip(g.iter()).zip(m.iter_mut().zip(v.iter_mut()))
                {
                    update(param, grad, m, v);
                }
                let (b, gb) = (&mut model.biases[l], &grads.biases[l]);
                let (mb, vb) = (&mut state.m_b[l], &mut state.v_b[l]);
                for ((param, &grad), (m, v)) in
                    b.iter_mut().zip(gb.iter()).zip(mb.iter_mut().zip(vb.iter_mut()))
                {
                    update(param, grad, m, v);
                }
            }
        }
    }
    Ok(())
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            epochs: 30,
            // Large enough that a 256-batch epoch budget still converges on
            // desk-scale feature sets; Adam keeps the small-batch end stable.
            learning_rate: 5e-3,
            optimizer: OptimizerKind::adam(),
            seed: 42,
            shuffle: true,
        }
    }
}

/// Per-epoch train/test loss and accuracy, the unit of all experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    /// 1-based epoch number.
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_loss: f64,
    pub test_acc: f64,
}

/// Mean loss and accuracy of a model over a labeled split.
///
/// Accuracy is the fraction of samples whose argmax logit (lowest class index
/// on ties) equals the label.
pub fn evaluate<T: Scalar>(
    model: &MlpModel<T>,
    feats: &FeatureMatrix<T>,
    labels: &[u8],
) -> Result<(f64, f64)> {
    if feats.nrows() != labels.len() {
        return Err(Error::invalid(format!(
            "evaluate: {} rows but {} labels",
            feats.nrows(),
            labels.len()
        )));
    }
    if feats.nrows() == 0 {
        return Err(Error::invalid("evaluate: empty split"));
    }
    let n = feats.nrows();
    let mut loss_sum = 0.0f64;
    let mut correct = 0usize;
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let chunk = feats.slice(ndarray::s![start..end, ..]).to_owned();
        let (logits, _) = model.forward(&chunk)?;
        for (row, &y) in logits.outer_iter().zip(&labels[start..end]) {
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let sum_exp = row.iter().map(|&z| (z - max).exp()).sum::<T>();
            let sample_loss = max + sum_exp.ln() - row[y as usize];
            loss_sum += sample_loss.to_f64().unwrap();
            if argmax(row.iter()) == y as usize {
                correct += 1;
            }
        }
        start = end;
    }
    Ok((loss_sum / n as f64, correct as f64 / n as f64))
}

/// Mini-batch training loop. See [`train_logged`] for the variant that also
/// returns per-batch losses.
pub fn train<T: Scalar>(
    model: &mut MlpModel<T>,
    train_feats: &FeatureMatrix<T>,
    train_labels: &[u8],
    test_feats: &FeatureMatrix<T>,
    test_labels: &[u8],
    config: &TrainConfig,
) -> Result<Vec<EpochMetrics>> {
    Ok(train_logged(model, train_feats, train_labels, test_feats, test_labels, config)?.0)
}

/// Mini-batch training loop, also recording the running loss of every
/// optimizer step.
///
/// Per epoch: shuffle with the seeded generator (when enabled), sweep
/// mini-batches including the final partial one, then compute full-split
/// train and test metrics in evaluation mode. A non-finite batch loss aborts
/// with an error naming the epoch and step.
pub fn train_logged<T: Scalar>(
    model: &mut MlpModel<T>,
    train_feats: &FeatureMatrix<T>,
    train_labels: &[u8],
    test_feats: &FeatureMatrix<T>,
    test_labels: &[u8],
    config: &TrainConfig,
) -> Result<(Vec<EpochMetrics>, Vec<f64>)> {
    if config.batch_size == 0 {
        return Err(Error::invalid("train: batch_size must be at least 1"));
    }
    if config.learning_rate <= 0.0 {
        return Err(Error::invalid("train: learning_rate must be positive"));
    }
    if train_feats.nrows() != train_labels.len() {
        return Err(Error::invalid(format!(
            "train: {} rows but {} labels",
            train_feats.nrows(),
            train_labels.len()
        )));
    }
    if train_feats.nrows() == 0 {
        return Err(Error::invalid("train: empty training split"));
    }

    let n = train_feats.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = OptimizerState::new(model);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut metrics = Vec::with_capacity(config.epochs);
    let mut batch_losses = Vec::new();

    for epoch in 1..=config.epochs {
        if config.shuffle {
            indices.shuffle(&mut rng);
        }
        for (step, chunk) in indices.chunks(config.batch_size).enumerate() {
            let batch = train_feats.select(Axis(0), chunk);
            let labels: Vec<u8> = chunk.iter().map(|&i| train_labels[i]).collect();
            let (loss, grads) = loss_and_grad(model, &batch, &labels)?;
            let loss64 = loss.to_f64().unwrap();
            if !loss64.is_finite() {
                return Err(Error::NonFinite { epoch, step });
            }
            batch_losses.push(loss64);
            optimizer_step(model, &grads, &mut state, config)?;
        }
        if !model.all_finite() {
            return Err(Error::NonFinite {
                epoch,
                step: indices.chunks(config.batch_size).count(),
            });
        }
        let (train_loss, train_acc) = evaluate(model, train_feats, train_labels)?;
        let (test_loss, test_acc) = evaluate(model, test_feats, test_labels)?;
        metrics.push(EpochMetrics {
            epoch,
            train_loss,
            train_acc,
            test_loss,
            test_acc,
        });
    }
    Ok((metrics, batch_losses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn softmax_rows_sum_to_one_and_shift_invariant() {
        let logits = arr2(&[[1.0f64, 2.0, 3.0], [-5.0, 0.0, 5.0], [100.0, 100.0, 100.0]]);
        let p = softmax_rows(&logits);
        for row in p.outer_iter() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
        let shifted = logits.mapv(|x| x + 123.0);
        let q = softmax_rows(&shifted);
        for (a, b) in p.iter().zip(q.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_ties_take_lowest_index() {
        let v = [1.0f64, 3.0, 3.0, 2.0];
        assert_eq!(argmax(v.iter()), 1);
        let all_equal = [0.0f64; 4];
        assert_eq!(argmax(all_equal.iter()), 0);
    }

    #[test]
    fn forward_single_linear_layer_is_affine() {
        let mut model = init_model::<f64>(&[2, 2], 3).unwrap();
        model.weights[0] = arr2(&[[1.0, -1.0], [0.5, 2.0]]);
        model.biases[0] = ndarray::arr1(&[0.25, -0.5]);
        let x = arr2(&[[3.0, 4.0]]);
        let (logits, _) = model.forward(&x).unwrap();
        assert!((logits[[0, 0]] - (3.0 - 4.0 + 0.25)).abs() < 1e-15);
        assert!((logits[[0, 1]] - (1.5 + 8.0 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn forward_two_layer_toy_matches_hand_computation() {
        // x = [1, -2]; W1 = [[0.5,-0.25],[0.1,0.3]], b1 = [0.1,-0.1]
        // z1 = [1.1, -0.6] -> relu [1.1, 0]
        // W2 = [[1,-1],[0.2,0.4]], b2 = [0.05,-0.05] -> logits [1.15, 0.17]
        let mut model = init_model::<f64>(&[2, 2, 2], 0).unwrap();
        model.weights[0] = arr2(&[[0.5, -0.25], [0.1, 0.3]]);
        model.biases[0] = ndarray::arr1(&[0.1, -0.1]);
        model.weights[1] = arr2(&[[1.0, -1.0], [0.2, 0.4]]);
        model.biases[1] = ndarray::arr1(&[0.05, -0.05]);
        let (logits, cache) = model.forward(&arr2(&[[1.0, -2.0]])).unwrap();
        assert!((cache.activations[1][[0, 0]] - 1.1).abs() < 1e-15);
        assert_eq!(cache.activations[1][[0, 1]], 0.0);
        assert!((logits[[0, 0]] - 1.15).abs() < 1e-15);
        assert!((logits[[0, 1]] - 0.17).abs() < 1e-15);
    }

    #[test]
    fn zero_model_gives_uniform_softmax_and_ln_k_loss() {
        let mut model = init_model::<f64>(&[3, 4], 9).unwrap();
        model.weights[0].fill(0.0);
        let x = arr2(&[[0.3, -0.4, 0.9], [1.0, 0.0, 0.0]]);
        let (logits, _) = model.forward(&x).unwrap();
        assert!(logits.iter().all(|&z| z == 0.0));
        let (loss, _) = loss_and_grad(&model, &x, &[1, 3]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn large_margin_loss_tends_to_zero() {
        let mut model = init_model::<f64>(&[1, 2], 1).unwrap();
        model.weights[0] = arr2(&[[50.0], [-50.0]]);
        model.biases[0].fill(0.0);
        let (loss, _) = loss_and_grad(&model, &arr2(&[[1.0]]), &[0]).unwrap();
        assert!(loss < 1e-12, "loss = {loss}");
    }

    #[test]
    fn sgd_with_unit_lr_and_grad_equal_to_params_zeroes_them() {
        let mut model = init_model::<f64>(&[3, 2], 7).unwrap();
        let grads = Gradients {
            weights: model.weights.clone(),
            biases: model.biases.clone(),
        };
        let mut state = OptimizerState::new(&model);
        let config = TrainConfig {
            learning_rate: 1.0,
            optimizer: OptimizerKind::Sgd,
            ..TrainConfig::default()
        };
        optimizer_step(&mut model, &grads, &mut state, &config).unwrap();
        assert!(model.weights[0].iter().all(|&x| x == 0.0));
        assert!(model.biases[0].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn adam_first_step_magnitude_is_learning_rate() {
        let mut model = init_model::<f64>(&[2, 2], 5).unwrap();
        let before = model.weights[0].clone();
        let grads = Gradients {
            weights: vec![arr2(&[[0.3, -0.7], [2.0, -0.1]])],
            biases: vec![ndarray::arr1(&[1.5, -4.0])],
        };
        let mut state = OptimizerState::new(&model);
        let config = TrainConfig {
            learning_rate: 1e-3,
            optimizer: OptimizerKind::adam(),
            ..TrainConfig::default()
        };
        optimizer_step(&mut model, &grads, &mut state, &config).unwrap();
        for (after, (before, &g)) in model.weights[0]
            .iter()
            .zip(before.iter().zip(grads.weights[0].iter()))
        {
            let step = before - after;
            // First Adam step is lr * g / (|g| + eps) = lr * sign(g), up to eps.
            assert!((step.abs() - 1e-3).abs() < 1e-7, "step = {step} for g = {g}");
            assert_eq!(step.signum(), g.signum());
        }
    }

    #[test]
    fn adam_descends_a_quadratic_bowl_monotonically_after_warmup() {
        // Minimize 0.5 * ||theta||^2; the gradient is theta itself.
        let mut model = init_model::<f64>(&[4, 3], 11).unwrap();
        let mut state = OptimizerState::new(&model);
        let config = TrainConfig {
            learning_rate: 1e-2,
            optimizer: OptimizerKind::adam(),
            ..TrainConfig::default()
        };
        let objective = |m: &MlpModel<f64>| -> f64 {
            m.weights[0].iter().map(|x| 0.5 * x * x).sum::<f64>()
        };
        let mut history = Vec::new();
        for _ in 0..100 {
            let grads = Gradients {
                weights: vec![model.weights[0].clone()],
                biases: vec![Array1::zeros(3)],
            };
            optimizer_step(&mut model, &grads, &mut state, &config).unwrap();
            history.push(objective(&model));
        }
        for w in history[10..].windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "not monotone: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn init_is_seed_deterministic_with_documented_shapes() {
        let a = init_model::<f64>(&[4, 3, 2], 123).unwrap();
        let b = init_model::<f64>(&[4, 3, 2], 123).unwrap();
        assert_eq!(a.weights[0], b.weights[0]);
        assert_eq!(a.weights[1], b.weights[1]);
        assert_eq!(a.weights[0].dim(), (3, 4));
        assert_eq!(a.weights[1].dim(), (2, 3));
        assert_eq!(a.biases[0].len(), 3);
        assert_eq!(a.biases[1].len(), 2);
        assert!(a.biases[0].iter().all(|&x| x == 0.0));
        let c = init_model::<f64>(&[4, 3, 2], 124).unwrap();
        assert_ne!(a.weights[0], c.weights[0]);
    }

    #[test]
    fn init_std_matches_fan_in_scaling() {
        let m = init_model::<f64>(&[1000, 1000], 77).unwrap();
        let w = &m.weights[0];
        let mean = w.sum() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / w.len() as f64;
        let want = (2.0 / 1000.0f64).sqrt();
        let got = var.sqrt();
        assert!(
            (got - want).abs() / want < 0.05,
            "std {got} vs expected {want}"
        );
    }

    #[test]
    fn invalid_layer_sizes_are_rejected() {
        assert!(init_model::<f64>(&[5], 0).is_err());
        assert!(init_model::<f64>(&[5, 0, 2], 0).is_err());
    }
}
