//! Adam training and stratified k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::data::Dataset;
use super::metrics::{mcc, mean_ci, Metrics};
use super::net::{backward, layer_forward, Activation, Gradients, LayerSpec, Network};
use crate::{Error, Result};

/// Output-head pairing: sigmoid + binary cross-entropy for two classes,
/// raw logits + softmax cross-entropy for three or more.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    BinaryCrossEntropy,
    SoftmaxCrossEntropy,
}

impl Loss {
    pub fn for_class_count(classes: usize) -> Self {
        if classes <= 2 {
            Loss::BinaryCrossEntropy
        } else {
            Loss::SoftmaxCrossEntropy
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub epochs: usize,
    pub batch: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            epochs: 200,
            batch: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: Network,
    /// Mean loss per epoch.
    pub loss_history: Vec<f64>,
}

fn validate_head(net: &Network, loss: Loss, classes: usize) -> Result<()> {
    let last = net.layers.last().expect("non-empty network");
    match loss {
        Loss::BinaryCrossEntropy => {
            if net.output_len() != 1 || last.spec.activation != Activation::Sigmoid {
                return Err(Error::Shape(
                    "binary cross-entropy needs a single sigmoid output".into(),
                ));
            }
        }
        Loss::SoftmaxCrossEntropy => {
            if net.output_len() != classes || last.spec.activation != Activation::None {
                return Err(Error::Shape(format!(
                    "softmax cross-entropy needs {classes} linear outputs"
                )));
            }
        }
    }
    Ok(())
}

/// Per-sample loss and pre-activation delta of the output layer.
fn loss_and_delta(loss: Loss, out: &[f64], label: usize) -> (f64, Vec<f64>) {
    match loss {
        Loss::BinaryCrossEntropy => {
            let p = out[0].clamp(1e-12, 1.0 - 1e-12);
            let y = label as f64;
            let value = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
            (value, vec![out[0] - y])
        }
        Loss::SoftmaxCrossEntropy => {
            let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exp: Vec<f64> = out.iter().map(|&v| (v - max).exp()).collect();
            let total: f64 = exp.iter().sum();
            let value = total.ln() + max - out[label];
            let delta = exp
                .iter()
                .enumerate()
                .map(|(k, &e)| e / total - f64::from(k == label))
                .collect();
            (value, delta)
        }
    }
}

/// Class prediction under the given head.
pub fn predict(net: &Network, input: &[f64], loss: Loss) -> Result<usize> {
    let out = net.forward(input)?;
    Ok(match loss {
        Loss::BinaryCrossEntropy => usize::from(out[0] >= 0.5),
        Loss::SoftmaxCrossEntropy => {
            let mut best = 0;
            for (k, &v) in out.iter().enumerate() {
                if v > out[best] {
                    best = k;
                }
            }
            best
        }
    })
}

/// Mean loss and gradients over a batch of dataset rows. Dropout masks
/// derive deterministically from `mask_seed` and the in-batch position,
/// so calling twice with the same seed replays identical masks (which is
/// what the finite-difference gradient checks rely on).
pub fn batch_loss_and_grads(
    net: &Network,
    data: &Dataset,
    indices: &[usize],
    loss: Loss,
    mask_seed: u64,
) -> Result<(f64, Gradients)> {
    let per_sample: Vec<(f64, Gradients)> = indices
        .par_iter()
        .enumerate()
        .map(|(pos, &idx)| {
            let input = &data.inputs[idx];
            let mut rng = dropout_rng(mask_seed, pos);
            let mut traces = Vec::with_capacity(net.layers.len());
            let mut x = input.clone();
            for layer in &net.layers {
                let trace = layer_forward(layer, &x, Some(&mut rng));
                x = trace.output.clone();
                traces.push(trace);
            }
            let (value, delta) = loss_and_delta(loss, &x, data.labels[idx]);
            let mut grads = Gradients::zeros_like(net);
            backward(net, input, &traces, delta, &mut grads);
            (value, grads)
        })
        .collect();

    let mut total = Gradients::zeros_like(net);
    let mut loss_sum = 0.0;
    let scale = 1.0 / indices.len() as f64;
    for (value, grads) in &per_sample {
        loss_sum += value;
        total.add_scaled(grads, scale);
    }
    Ok((loss_sum * scale, total))
}

/// Mean loss only, with the same mask discipline as
/// [`batch_loss_and_grads`].
pub fn batch_loss(
    net: &Network,
    data: &Dataset,
    indices: &[usize],
    loss: Loss,
    mask_seed: u64,
) -> Result<f64> {
    let mut acc = 0.0;
    for (pos, &idx) in indices.iter().enumerate() {
        let mut rng = dropout_rng(mask_seed, pos);
        let mut x = data.inputs[idx].clone();
        for layer in &net.layers {
            x = layer_forward(layer, &x, Some(&mut rng)).output;
        }
        acc += loss_and_delta(loss, &x, data.labels[idx]).0;
    }
    Ok(acc / indices.len() as f64)
}

fn dropout_rng(mask_seed: u64, pos: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
    rng.set_stream(pos as u64);
    rng
}

struct Adam {
    m: Gradients,
    v: Gradients,
    t: u64,
}

impl Adam {
    fn new(net: &Network) -> Self {
        Self {
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, grads: &Gradients, hp: &Hyperparams) {
        self.t += 1;
        let bc1 = 1.0 - hp.beta1.powi(self.t as i32);
        let bc2 = 1.0 - hp.beta2.powi(self.t as i32);
        for li in 0..net.layers.len() {
            update_slice(
                &mut net.layers[li].weights,
                &mut self.m.weights[li],
                &mut self.v.weights[li],
                &grads.weights[li],
                hp,
                bc1,
                bc2,
            );
            update_slice(
                &mut net.layers[li].bias,
                &mut self.m.bias[li],
                &mut self.v.bias[li],
                &grads.bias[li],
                hp,
                bc1,
                bc2,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update_slice(
    params: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    g: &[f64],
    hp: &Hyperparams,
    bc1: f64,
    bc2: f64,
) {
    for k in 0..params.len() {
        m[k] = hp.beta1 * m[k] + (1.0 - hp.beta1) * g[k];
        v[k] = hp.beta2 * v[k] + (1.0 - hp.beta2) * g[k] * g[k];
        let mhat = m[k] / bc1;
        let vhat = v[k] / bc2;
        params[k] -= hp.lr * mhat / (vhat.sqrt() + hp.eps);
    }
}

/// Trains a fresh network on the dataset. The loss pairs with the class
/// count; epochs shuffle with a seeded stream, so results are a pure
/// function of `(specs, data, hp, seed)`.
pub fn train(
    specs: &[LayerSpec],
    data: &Dataset,
    hp: &Hyperparams,
    seed: u64,
) -> Result<TrainOutcome> {
    let loss = Loss::for_class_count(data.class_count());
    let mut net = Network::init(specs, data.input_shape, seed)?;
    validate_head(&net, loss, data.class_count())?;
    if data.len() == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    let mut adam = Adam::new(&net);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5371_c0de);
    let mut history = Vec::with_capacity(hp.epochs);
    let mut step: u64 = 0;
    for _ in 0..hp.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0.0;
        for batch in order.chunks(hp.batch.max(1)) {
            let (value, grads) = batch_loss_and_grads(&net, data, batch, loss, seed ^ step)?;
            if !value.is_finite() {
                return Err(Error::TrainDiverged { step: step as usize });
            }
            adam.step(&mut net, &grads, hp);
            epoch_loss += value;
            batches += 1.0;
            step += 1;
        }
        history.push(epoch_loss / batches);
    }
    debug_assert!(net
        .layers
        .iter()
        .all(|l| l.weights.iter().chain(&l.bias).all(|p| p.is_finite())));
    Ok(TrainOutcome {
        net,
        loss_history: history,
    })
}

/// Evaluates a trained network on a slice of dataset rows, returning
/// `(accuracy, confusion)` with confusion indexed `[actual][predicted]`.
pub fn evaluate(
    net: &Network,
    data: &Dataset,
    indices: &[usize],
    loss: Loss,
) -> Result<(f64, Vec<Vec<u64>>)> {
    let classes = data.class_count().max(2);
    let mut confusion = vec![vec![0u64; classes]; classes];
    let mut hits = 0usize;
    for &idx in indices {
        let pred = predict(net, &data.inputs[idx], loss)?;
        let actual = data.labels[idx];
        confusion[actual][pred.min(classes - 1)] += 1;
        if pred == actual {
            hits += 1;
        }
    }
    Ok((hits as f64 / indices.len() as f64, confusion))
}

/// Stratified fold assignment: indices of each class are shuffled and
/// dealt round-robin, keeping per-class counts within one across folds.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidInput("k-fold needs k >= 2".into()));
    }
    let classes = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (idx, &label) in labels.iter().enumerate() {
        per_class[label].push(idx);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf01d);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for class_indices in per_class.iter_mut() {
        if !class_indices.is_empty() && class_indices.len() < k {
            return Err(Error::InvalidInput(format!(
                "class with {} samples cannot stratify into {k} folds",
                class_indices.len()
            )));
        }
        class_indices.shuffle(&mut rng);
        for (pos, &idx) in class_indices.iter().enumerate() {
            folds[pos % k].push(idx);
        }
    }
    Ok(folds)
}

/// k-fold cross-validation: trains one fresh network per fold (seeds
/// derived from the master seed) and aggregates accuracy and MCC with a
/// 95% interval (`mean +- 1.96 * stderr` over folds). Folds whose MCC is
/// undefined are excluded from the MCC mean and counted.
pub fn kfold_cv(
    specs: &[LayerSpec],
    data: &Dataset,
    k: usize,
    hp: &Hyperparams,
    seed: u64,
) -> Result<Metrics> {
    if data.len() < k {
        return Err(Error::InvalidInput("fewer samples than folds".into()));
    }
    let loss = Loss::for_class_count(data.class_count());
    let folds = stratified_folds(&data.labels, k, seed)?;

    let fold_results: Result<Vec<(f64, Vec<Vec<u64>>)>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let test = &folds[fold];
            let train_idx: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(f, _)| f != fold)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            let subset = data.subset(&train_idx);
            let outcome = train(specs, &subset, hp, seed.wrapping_add(1 + fold as u64))?;
            evaluate(&outcome.net, data, test, loss)
        })
        .collect();
    let fold_results = fold_results?;

    let fold_accuracies: Vec<f64> = fold_results.iter().map(|&(a, _)| a).collect();
    let binary = data.class_count() == 2;
    let fold_mccs: Vec<Option<f64>> = fold_results
        .iter()
        .map(|(_, confusion)| {
            if binary {
                mcc([
                    [confusion[0][0], confusion[0][1]],
                    [confusion[1][0], confusion[1][1]],
                ])
            } else {
                None
            }
        })
        .collect();

    let classes = data.class_count().max(2);
    let mut confusion = vec![vec![0u64; classes]; classes];
    for (_, fold_conf) in &fold_results {
        for (row, fold_row) in confusion.iter_mut().zip(fold_conf) {
            for (cell, v) in row.iter_mut().zip(fold_row) {
                *cell += v;
            }
        }
    }

    let defined: Vec<f64> = fold_mccs.iter().filter_map(|&m| m).collect();
    Ok(Metrics {
        accuracy: mean_ci(&fold_accuracies),
        mcc: if defined.is_empty() {
            None
        } else {
            Some(mean_ci(&defined))
        },
        mcc_excluded_folds: fold_mccs.iter().filter(|m| m.is_none()).count(),
        fold_accuracies,
        fold_mccs,
        confusion,
        estimator_note: "mean +- 1.96 * stderr over folds (stderr from the n-1 sample std)",
    })
}
