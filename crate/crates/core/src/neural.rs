//! TRA-DL: a small fully connected network that imitates the greedy
//! selector.
//!
//! Input is the prior direction and SNR, `[u, snr_db / 30]`. Hidden layers
//! use ReLU, the output layer a sigmoid giving one score per antenna; the
//! top-`M` scores form the selection. Training minimises the mean squared
//! error against aligned greedy labels with Adam.

use std::fs;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::beam::{anchor_set, ANCHOR_LIMIT};
use crate::error::{Error, Result};
use crate::layout::{align_layout, SelectionVector};
use crate::selector::{CountMethod, multiplication_count, SelectionQuery, Selector};
use crate::signal::db_to_linear;

/// Hidden layer widths used in the reference setup.
pub const DEFAULT_HIDDEN: [usize; 5] = [16, 32, 64, 32, 16];
pub const INPUT_DIM: usize = 2;
pub const SNR_DB_SCALE: f64 = 1.0 / 30.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub u_range: (f64, f64),
    pub snr_db_range: (f64, f64),
    pub dataset_size: usize,
    pub n_antennas: usize,
    pub m_target: usize,
    pub spacing: f64,
    pub iterations: usize,
}

/// Multilayer perceptron with all parameters in one flat buffer.
///
/// Layer `h` occupies `W_h` (`g_{h-1} x g_h`, row-major) followed by `b_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_dims: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
    pub input_scale: [f64; 2],
    pub metadata: TrainingMetadata,
}

fn layer_offsets(dims: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0];
    for w in dims.windows(2) {
        let last = *offsets.last().unwrap();
        offsets.push(last + w[0] * w[1] + w[1]);
    }
    offsets
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::Model("need at least input and output layers".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Model("layer with zero units".into()));
    }
    if dims[0] != INPUT_DIM {
        return Err(Error::Model(format!("input dimension must be {INPUT_DIM}, got {}", dims[0])));
    }
    Ok(())
}

impl MlpModel {
    /// All-zero parameters.
    pub fn zeros(layer_dims: Vec<usize>) -> Result<Self> {
        check_dims(&layer_dims)?;
        let offsets = layer_offsets(&layer_dims);
        let params = vec![0.0; *offsets.last().unwrap()];
        Ok(Self { layer_dims, params, offsets, input_scale: [1.0, SNR_DB_SCALE], metadata: Default::default() })
    }

    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init<R: Rng + ?Sized>(layer_dims: Vec<usize>, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(layer_dims)?;
        for h in 0..model.layers() {
            let (fan_in, fan_out) = (model.layer_dims[h], model.layer_dims[h + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let start = model.offsets[h];
            for w in &mut model.params[start..start + fan_in * fan_out] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(model)
    }

    /// `[2, hidden..., n_antennas]`.
    pub fn dims_for(hidden: &[usize], n_antennas: usize) -> Vec<usize> {
        let mut dims = vec![INPUT_DIM];
        dims.extend_from_slice(hidden);
        dims.push(n_antennas);
        dims
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn weight_multiplications(&self) -> u64 {
        multiplication_count(&CountMethod::TraDl { layer_dims: self.layer_dims.clone() })
    }

    fn weights(&self, h: usize) -> &[f64] {
        let start = self.offsets[h];
        &self.params[start..start + self.layer_dims[h] * self.layer_dims[h + 1]]
    }

    fn biases(&self, h: usize) -> &[f64] {
        let start = self.offsets[h] + self.layer_dims[h] * self.layer_dims[h + 1];
        &self.params[start..self.offsets[h + 1]]
    }

    fn normalise(&self, u: f64, snr_db: f64) -> [f64; 2] {
        [u * self.input_scale[0], snr_db * self.input_scale[1]]
    }

    /// Pre-activations `x W + b` of every layer.
    pub fn pre_activations(&self, u: f64, snr_db: f64) -> Vec<Vec<f64>> {
        self.layer_inputs(&self.normalise(u, snr_db), &mut 0)
    }

    fn layer_inputs(&self, input: &[f64], count: &mut u64) -> Vec<Vec<f64>> {
        let mut pre = Vec::with_capacity(self.layers());
        let mut x = input.to_vec();
        for h in 0..self.layers() {
            let z = affine(&x, self.weights(h), self.biases(h), count);
            x = if h + 1 < self.layers() { z.iter().map(|v| v.max(0.0)).collect() } else { Vec::new() };
            pre.push(z);
        }
        pre
    }

    /// Antenna scores in `(0, 1)` for prior direction `u` and SNR in dB.
    pub fn forward(&self, u: f64, snr_db: f64) -> Vec<f64> {
        self.forward_counting(u, snr_db).0
    }

    /// Forward pass that also reports how many weight multiplications it
    /// performed.
    pub fn forward_counting(&self, u: f64, snr_db: f64) -> (Vec<f64>, u64) {
        let mut count = 0;
        let pre = self.layer_inputs(&self.normalise(u, snr_db), &mut count);
        (pre.last().unwrap().iter().map(|&z| sigmoid(z)).collect(), count)
    }

    /// Forward pass for many inputs at once, layer by layer.
    pub fn forward_batch(&self, inputs: &[(f64, f64)]) -> Vec<Vec<f64>> {
        let mut xs: Vec<Vec<f64>> = inputs.iter().map(|&(u, s)| self.normalise(u, s).to_vec()).collect();
        for h in 0..self.layers() {
            let last = h + 1 == self.layers();
            let (w, b) = (self.weights(h), self.biases(h));
            xs = xs
                .iter()
                .map(|x| {
                    affine(x, w, b, &mut 0)
                        .into_iter()
                        .map(|z| if last { sigmoid(z) } else { z.max(0.0) })
                        .collect()
                })
                .collect();
        }
        xs
    }

    /// Loss and exact gradient (same layout as [`MlpModel::params`]) for one sample.
    pub fn gradients(&self, sample: &TrainingSample) -> Result<(f64, Vec<f64>)> {
        let n = self.output_dim();
        if sample.label.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: sample.label.len() });
        }
        let input = self.normalise(sample.u, sample.snr_db);
        let pre = self.layer_inputs(&input, &mut 0);
        let out: Vec<f64> = pre.last().unwrap().iter().map(|&z| sigmoid(z)).collect();
        let target: Vec<f64> = sample.label.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let loss = loss_values(&out, &target);

        let mut grad = vec![0.0; self.params.len()];
        // dL/dz at the output
        let mut delta: Vec<f64> =
            out.iter().zip(&target).map(|(o, t)| 2.0 / n as f64 * (o - t) * o * (1.0 - o)).collect();
        for h in (0..self.layers()).rev() {
            let (fan_in, fan_out) = (self.layer_dims[h], self.layer_dims[h + 1]);
            let x_prev: Vec<f64> =
                if h == 0 { input.to_vec() } else { pre[h - 1].iter().map(|v| v.max(0.0)).collect() };
            let start = self.offsets[h];
            for i in 0..fan_in {
                for j in 0..fan_out {
                    grad[start + i * fan_out + j] = x_prev[i] * delta[j];
                }
            }
            let bstart = start + fan_in * fan_out;
            grad[bstart..bstart + fan_out].copy_from_slice(&delta);
            if h > 0 {
                let w = self.weights(h);
                delta = (0..fan_in)
                    .map(|i| {
                        if pre[h - 1][i] > 0.0 {
                            (0..fan_out).map(|j| w[i * fan_out + j] * delta[j]).sum()
                        } else {
                            0.0
                        }
                    })
                    .collect();
            }
        }
        Ok((loss, grad))
    }
}

// `x W + b`; adds the number of weight multiplications to `count`.
fn affine(x: &[f64], w: &[f64], b: &[f64], count: &mut u64) -> Vec<f64> {
    let fan_out = b.len();
    let mut z = b.to_vec();
    for (i, xi) in x.iter().enumerate() {
        let row = &w[i * fan_out..(i + 1) * fan_out];
        for (zj, wij) in z.iter_mut().zip(row) {
            *zj += xi * wij;
        }
    }
    *count += (x.len() * fan_out) as u64;
    z
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn loss_values(predicted: &[f64], target: &[f64]) -> f64 {
    predicted.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / predicted.len() as f64
}

/// Mean squared error between scores and a 0/1 label.
pub fn loss(predicted: &[f64], label: &SelectionVector) -> Result<f64> {
    if predicted.len() != label.len() {
        return Err(Error::LengthMismatch { expected: label.len(), found: predicted.len() });
    }
    let target: Vec<f64> = label.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Ok(loss_values(predicted, &target))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub batch_fraction: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-7, iterations: 200, batch_fraction: 0.1 }
    }
}

impl AdamConfig {
    fn validate(&self) -> Result<()> {
        let unit = |b: f64| b > 0.0 && b < 1.0;
        if !(self.learning_rate > 0.0) || !unit(self.beta1) || !unit(self.beta2) || !(self.epsilon > 0.0) {
            return Err(Error::invalid("Adam needs lr > 0, betas in (0, 1) and epsilon > 0"));
        }
        if !(self.batch_fraction > 0.0 && self.batch_fraction <= 1.0) {
            return Err(Error::invalid("batch fraction must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    first: Vec<f64>,
    second: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(parameter_count: usize) -> Self {
        Self { first: vec![0.0; parameter_count], second: vec![0.0; parameter_count], step: 0 }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(model: &mut MlpModel, grad: &[f64], state: &mut AdamState, config: &AdamConfig) -> Result<()> {
    if grad.len() != model.params.len() || state.first.len() != grad.len() {
        return Err(Error::LengthMismatch { expected: model.params.len(), found: grad.len() });
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    for (((p, g), m), v) in model.params.iter_mut().zip(grad).zip(&mut state.first).zip(&mut state.second) {
        *m = config.beta1 * *m + (1.0 - config.beta1) * g;
        *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSample {
    pub u: f64,
    pub snr_db: f64,
    pub label: SelectionVector,
}

/// Labels greedy selections for random `(u, snr_db)` draws.
///
/// Each sample uses a single anchor at its `u`; labels are stored in
/// aligned form so equivalent layouts share one target.
pub fn generate_dataset<R: Rng + ?Sized>(
    n_samples: usize,
    u_range: (f64, f64),
    snr_db_range: (f64, f64),
    template: &SelectionQuery,
    selector: &Selector,
    rng: &mut R,
) -> Result<Vec<TrainingSample>> {
    if !(u_range.0 <= u_range.1 && u_range.0 > -1.0 && u_range.1 < 1.0) {
        return Err(Error::invalid("direction range must lie inside (-1, 1)"));
    }
    if !(snr_db_range.0 <= snr_db_range.1) {
        return Err(Error::invalid("empty SNR range"));
    }
    let draws: Vec<(f64, f64)> = (0..n_samples)
        .map(|_| {
            let u = uniform(rng, u_range);
            let s = uniform(rng, snr_db_range);
            (u, s)
        })
        .collect();
    use rayon::prelude::*;
    draws
        .par_iter()
        .map(|&(u, snr_db)| {
            let anchors = anchor_set(u.clamp(-ANCHOR_LIMIT, ANCHOR_LIMIT), 0.0, 1)?;
            let q = SelectionQuery { anchors, snr: db_to_linear(snr_db), ..template.clone() };
            let r = selector.greedy_tra(&q)?;
            Ok(TrainingSample { u, snr_db, label: align_layout(&r.chosen) })
        })
        .collect()
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Mean loss per iteration, measured on the batch before its update.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub loss_history: Vec<f64>,
}

pub fn train<R: Rng + ?Sized>(
    model: &mut MlpModel,
    dataset: &[TrainingSample],
    config: &AdamConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    let batch = ((config.batch_fraction * dataset.len() as f64).ceil() as usize).clamp(1, dataset.len());
    let mut state = AdamState::new(model.parameter_count());
    let mut history = Vec::with_capacity(config.iterations);
    let mut grad = vec![0.0; model.parameter_count()];
    for _ in 0..config.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for i in sample_indices(rng, dataset.len(), batch) {
            let (l, g) = model.gradients(&dataset[i])?;
            total += l;
            for (acc, gi) in grad.iter_mut().zip(&g) {
                *acc += gi;
            }
        }
        let scale = 1.0 / batch as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        history.push(total * scale);
        adam_step(model, &grad, &mut state, config)?;
    }
    model.metadata.iterations += config.iterations;
    Ok(TrainReport { loss_history: history })
}

/// Ones at the `m` highest scores, ties to the lower index.
pub fn select_top_m(scores: &[f64], m: usize) -> Result<SelectionVector> {
    if m == 0 || m > scores.len() {
        return Err(Error::invalid(format!("cannot pick {m} of {} scores", scores.len())));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    SelectionVector::from_indices(scores.len(), &order[..m])
}

/// Network selection for a prior direction and SNR (dB).
pub fn select_tra_dl(model: &MlpModel, u_hat: f64, snr_db: f64, m: usize) -> Result<SelectionVector> {
    select_top_m(&model.forward(u_hat, snr_db), m)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    layer_dims: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    input_scale: [f64; 2],
    metadata: TrainingMetadata,
}

/// JSON text; floats are written in shortest round-trip form, so every
/// parameter survives a save/load bit for bit.
pub fn model_to_string(model: &MlpModel) -> String {
    let file = ModelFile {
        layer_dims: model.layer_dims.clone(),
        weights: (0..model.layers()).map(|h| model.weights(h).to_vec()).collect(),
        biases: (0..model.layers()).map(|h| model.biases(h).to_vec()).collect(),
        input_scale: model.input_scale,
        metadata: model.metadata.clone(),
    };
    serde_json::to_string_pretty(&file).expect("model serialises")
}

pub fn model_from_str(text: &str) -> Result<MlpModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
    let mut model = MlpModel::zeros(file.layer_dims)?;
    let layers = model.layers();
    if file.weights.len() != layers || file.biases.len() != layers {
        return Err(Error::Model(format!("expected {layers} weight and bias arrays")));
    }
    for h in 0..layers {
        let (fan_in, fan_out) = (model.layer_dims[h], model.layer_dims[h + 1]);
        if file.weights[h].len() != fan_in * fan_out || file.biases[h].len() != fan_out {
            return Err(Error::Model(format!("layer {h} arrays do not match dims {fan_in}x{fan_out}")));
        }
        let start = model.offsets[h];
        model.params[start..start + fan_in * fan_out].copy_from_slice(&file.weights[h]);
        model.params[start + fan_in * fan_out..model.offsets[h + 1]].copy_from_slice(&file.biases[h]);
    }
    model.input_scale = file.input_scale;
    model.metadata = file.metadata;
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    model_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reference_dims() -> Vec<usize> {
        MlpModel::dims_for(&DEFAULT_HIDDEN, 21)
    }

    fn label(s: &str) -> SelectionVector {
        SelectionVector::parse(s).unwrap()
    }

    #[test]
    fn zero_model_outputs_half() {
        let m = MlpModel::zeros(reference_dims()).unwrap();
        assert!(m.forward(0.3, 10.0).iter().all(|&v| v == 0.5));
    }

    #[test]
    fn reference_network_sizes() {
        let m = MlpModel::zeros(reference_dims()).unwrap();
        assert_eq!(m.weight_multiplications(), 5488);
        assert_eq!(m.forward_counting(0.1, 3.0).1, 5488);
        assert_eq!(m.parameter_count(), 5488 + 181);
    }

    #[test]
    fn batched_forward_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = MlpModel::init(reference_dims(), &mut rng).unwrap();
        let inputs: Vec<(f64, f64)> = (0..20).map(|i| (-0.9 + 0.09 * i as f64, -10.0 + 1.5 * i as f64)).collect();
        let batch = m.forward_batch(&inputs);
        for (x, out) in inputs.iter().zip(&batch) {
            let single = m.forward(x.0, x.1);
            for (a, b) in single.iter().zip(out) {
                assert!((a - b).abs() < 1e-12);
                assert!(*a > 0.0 && *a < 1.0);
            }
        }
    }

    #[test]
    fn loss_examples() {
        let l = label("1101000");
        let exact: Vec<f64> = l.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        assert_eq!(loss(&exact, &l).unwrap(), 0.0);
        assert_eq!(loss(&[0.5; 7], &l).unwrap(), 0.25);
        assert!(loss(&[0.5; 6], &l).is_err());
    }

    #[test]
    fn zero_model_output_bias_gradient() {
        let m = MlpModel::zeros(vec![2, 3, 4]).unwrap();
        let sample = TrainingSample { u: 0.2, snr_db: 5.0, label: label("1001") };
        let (_, g) = m.gradients(&sample).unwrap();
        let bias_start = 2 * 3 + 3 + 3 * 4;
        for (j, bit) in sample.label.bits().iter().enumerate() {
            let t = if *bit { 1.0 } else { 0.0 };
            let expected = 2.0 / 4.0 * (0.5 - t) * 0.25;
            assert!((g[bias_start + j] - expected).abs() < 1e-15);
        }
        // hidden pre-activations are all zero, so everything upstream is dead
        assert!(g[..2 * 3 + 3].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut m = MlpModel::init(vec![2, 5, 4, 6], &mut rng).unwrap();
        // nonzero biases keep ReLU units away from their kink
        for p in m.params_mut().iter_mut().filter(|p| **p == 0.0) {
            *p = 0.05;
        }
        let sample = TrainingSample { u: 0.37, snr_db: 12.0, label: label("100110") };
        let (l0, g) = m.gradients(&sample).unwrap();
        let out = m.forward(sample.u, sample.snr_db);
        assert!((l0 - loss(&out, &sample.label).unwrap()).abs() < 1e-15);
        let h = 1e-6;
        for (i, gi) in g.iter().enumerate() {
            let mut plus = m.clone();
            plus.params_mut()[i] += h;
            let mut minus = m.clone();
            minus.params_mut()[i] -= h;
            let lp = plus.gradients(&sample).unwrap().0;
            let lm = minus.gradients(&sample).unwrap().0;
            let fd = (lp - lm) / (2.0 * h);
            assert!((fd - gi).abs() <= 1e-6 * gi.abs().max(1e-3), "param {i}: {fd} vs {gi}");
        }
    }

    #[test]
    fn adam_first_step_is_signed_learning_rate() {
        let mut m = MlpModel::zeros(vec![2, 2]).unwrap();
        let grad = vec![0.3, -2.0, 1e-3, 0.0, 5.0, -0.01];
        let cfg = AdamConfig::default();
        let mut state = AdamState::new(6);
        adam_step(&mut m, &grad, &mut state, &cfg).unwrap();
        for (p, g) in m.params().iter().zip(&grad) {
            let expected = -cfg.learning_rate * g / (g.abs() + cfg.epsilon);
            assert!((p - expected).abs() < 1e-12, "{p} vs {expected}");
        }
        assert_eq!(m.params()[3], 0.0);
    }

    #[test]
    fn training_decreases_loss_on_toy_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut model = MlpModel::init(MlpModel::dims_for(&[8, 8], 6), &mut rng).unwrap();
        let labels = ["110100", "101100", "100011", "110001"];
        let data: Vec<TrainingSample> = (0..100)
            .map(|i| {
                let u = -0.9 + 1.8 * i as f64 / 99.0;
                TrainingSample { u, snr_db: 5.0, label: label(labels[(i * 4 / 100) % 4]) }
            })
            .collect();
        let cfg = AdamConfig { batch_fraction: 1.0, learning_rate: 1e-2, ..Default::default() };
        let report = train(&mut model, &data, &cfg, &mut rng).unwrap();
        assert_eq!(report.loss_history.len(), 200);
        let drops = report.loss_history.windows(2).filter(|w| w[1] < w[0]).count();
        assert!(drops as f64 >= 0.9 * 199.0, "{drops} decreasing steps");
    }

    #[test]
    fn zero_iterations_leave_model_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut model = MlpModel::init(vec![2, 4, 3], &mut rng).unwrap();
        let before = model.clone();
        let data = [TrainingSample { u: 0.1, snr_db: 0.0, label: label("101") }];
        let cfg = AdamConfig { iterations: 0, ..Default::default() };
        let report = train(&mut model, &data, &cfg, &mut rng).unwrap();
        assert!(report.loss_history.is_empty());
        assert_eq!(model.params(), before.params());
        assert!(train(&mut model, &[], &cfg, &mut rng).is_err());
    }

    #[test]
    fn top_m_examples() {
        assert_eq!(select_top_m(&[0.9, 0.1, 0.8, 0.7], 2).unwrap(), label("1010"));
        assert_eq!(select_top_m(&[0.5; 4], 2).unwrap(), label("1100"));
        assert!(select_top_m(&[0.5; 4], 5).is_err());
    }

    #[test]
    fn model_round_trip_and_rejections() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = MlpModel::init(reference_dims(), &mut rng).unwrap();
        let text = model_to_string(&m);
        let back = model_from_str(&text).unwrap();
        assert_eq!(back.params(), m.params());
        for i in 0..100 {
            let (u, s) = (-0.99 + 0.0198 * i as f64, -20.0 + 0.5 * i as f64);
            assert_eq!(back.forward(u, s), m.forward(u, s));
        }
        assert!(matches!(model_from_str(&text[..text.len() / 2]), Err(Error::Parse(_))));
        assert!(MlpModel::zeros(vec![2]).is_err());
        assert!(MlpModel::zeros(vec![2, 0, 4]).is_err());
        let bad = text.replacen("\"layer_dims\": [\n    2,\n    16", "\"layer_dims\": [\n    2,\n    15", 1);
        assert!(model_from_str(&bad).is_err());
    }
}
