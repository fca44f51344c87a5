//! One-hidden-layer perceptron: sigmoid hidden units, softmax output over
//! the four classes, summed cross-entropy loss, full-batch gradient descent.
//!
//! The step size is halved whenever a step would increase the loss; such a
//! step is discarded, so the recorded loss never increases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, Standardizer};
use crate::class::SoundClass;
use crate::error::{Error, Result};

const N_OUT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self { hidden_units: 32, learning_rate: 0.01, epochs: 300, seed: 0 }
    }
}

/// Raw network parameters, laid out flat as `[w1 | b1 | w2 | b2]` with
/// `w1` row-major `hidden x inputs` and `w2` row-major `4 x hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub inputs: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Network {
    /// Uniform(-0.5, 0.5) initialization of every weight and bias.
    pub fn init(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = hidden * inputs + hidden + N_OUT * hidden + N_OUT;
        let params = (0..count).map(|_| rng.random_range(-0.5..0.5)).collect();
        Self { inputs, hidden, params }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let (w1, rest) = self.params.split_at(self.hidden * self.inputs);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, b2) = rest.split_at(N_OUT * self.hidden);
        (w1, b1, w2, b2)
    }

    fn forward(&self, x: &[f64], hidden: &mut [f64], probs: &mut [f64; N_OUT]) {
        let (w1, b1, w2, b2) = self.split();
        for (j, h) in hidden.iter_mut().enumerate() {
            let row = &w1[j * self.inputs..(j + 1) * self.inputs];
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b1[j];
            *h = sigmoid(z);
        }
        for (k, p) in probs.iter_mut().enumerate() {
            let row = &w2[k * self.hidden..(k + 1) * self.hidden];
            *p = row.iter().zip(hidden.iter()).map(|(w, h)| w * h).sum::<f64>() + b2[k];
        }
        let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for p in probs.iter_mut() {
            *p = (*p - max).exp();
            total += *p;
        }
        probs.iter_mut().for_each(|p| *p /= total);
    }

    pub fn probabilities(&self, x: &[f64]) -> [f64; N_OUT] {
        let mut hidden = vec![0.0; self.hidden];
        let mut probs = [0.0; N_OUT];
        self.forward(x, &mut hidden, &mut probs);
        probs
    }

    /// Summed cross-entropy over `(x, class index)` pairs.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
        let mut hidden = vec![0.0; self.hidden];
        let mut probs = [0.0; N_OUT];
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| {
                self.forward(x, &mut hidden, &mut probs);
                -probs[y].max(f64::MIN_POSITIVE).ln()
            })
            .sum()
    }

    /// Analytic gradient of [`Network::loss`] by backpropagation.
    pub fn gradient(&self, xs: &[Vec<f64>], ys: &[usize]) -> Vec<f64> {
        let (_, _, w2, _) = self.split();
        let mut grad = vec![0.0; self.params.len()];
        let (g_w1, rest) = grad.split_at_mut(self.hidden * self.inputs);
        let (g_b1, rest) = rest.split_at_mut(self.hidden);
        let (g_w2, g_b2) = rest.split_at_mut(N_OUT * self.hidden);

        let mut hidden = vec![0.0; self.hidden];
        let mut delta_h = vec![0.0; self.hidden];
        let mut probs = [0.0; N_OUT];
        for (x, &y) in xs.iter().zip(ys) {
            self.forward(x, &mut hidden, &mut probs);
            let mut delta_o = probs;
            delta_o[y] -= 1.0;
            delta_h.iter_mut().for_each(|d| *d = 0.0);
            for k in 0..N_OUT {
                let d = delta_o[k];
                g_b2[k] += d;
                let row = &mut g_w2[k * self.hidden..(k + 1) * self.hidden];
                let w_row = &w2[k * self.hidden..(k + 1) * self.hidden];
                for j in 0..self.hidden {
                    row[j] += d * hidden[j];
                    delta_h[j] += d * w_row[j];
                }
            }
            for j in 0..self.hidden {
                let d = delta_h[j] * hidden[j] * (1.0 - hidden[j]);
                g_b1[j] += d;
                let row = &mut g_w1[j * self.inputs..(j + 1) * self.inputs];
                for (g, v) in row.iter_mut().zip(x) {
                    *g += d * v;
                }
            }
        }
        grad
    }
}

/// Trained perceptron with its input standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub scaler: Standardizer,
    pub network: Network,
    /// Loss after initialization and after every epoch.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

pub fn train_mlp(data: &LabeledDataset, config: &MlpConfig) -> Result<MlpModel> {
    if config.hidden_units == 0 || config.epochs == 0 {
        return Err(Error::InvalidConfig("MLP needs at least one hidden unit and one epoch".into()));
    }
    if data.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::InsufficientData("MLP training needs at least two classes".into()));
    }
    data.check_finite()?;

    let scaler = Standardizer::fit(&data.vectors);
    let xs = scaler.apply_all(&data.vectors);
    let ys: Vec<usize> = data.labels.iter().map(|l| l.index()).collect();

    let mut network = Network::init(data.dim(), config.hidden_units, config.seed);
    let mut lr = config.learning_rate;
    let mut loss = network.loss(&xs, &ys);
    let mut loss_history = vec![loss];
    for _ in 0..config.epochs {
        if lr > 0.0 {
            let grad = network.gradient(&xs, &ys);
            let mut candidate = network.clone();
            for (p, g) in candidate.params.iter_mut().zip(&grad) {
                *p -= lr * g;
            }
            let next = candidate.loss(&xs, &ys);
            if next.is_finite() && next <= loss {
                network = candidate;
                loss = next;
            } else {
                lr *= 0.5;
            }
        }
        loss_history.push(loss);
    }
    Ok(MlpModel { scaler, network, loss_history })
}

impl MlpModel {
    pub fn probabilities(&self, vector: &[f64]) -> [f64; N_OUT] {
        self.network.probabilities(&self.scaler.apply(vector))
    }

    pub fn predict(&self, vector: &[f64]) -> SoundClass {
        let probs = self.probabilities(vector);
        SoundClass::ALL
            .into_iter()
            .max_by(|a, b| probs[a.index()].total_cmp(&probs[b.index()]).then_with(|| a.danger().cmp(&b.danger())))
            .expect("four classes")
    }
}
