use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetView};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Epoch `e` (from 0) uses `learning_rate / (1 + lr_decay · e)`.
    pub lr_decay: f64,
    /// Standard deviation of the Gaussian weight initialisation.
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            epochs: 20,
            batch_size: 64,
            learning_rate: 0.5,
            lr_decay: 0.5,
            init_scale: 0.01,
            seed: 0,
        }
    }
}

impl SurrogateConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        SurrogateConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Parameter("surrogate epochs and batch size must be ≥ 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Parameter("surrogate learning rate must be > 0".into()));
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return Err(Error::Parameter("surrogate learning-rate decay must be ≥ 0".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Parameter("surrogate init scale must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// Multinomial logistic regression, `scores = W·x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub classes: usize,
    pub dim: usize,
    /// `classes × dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub config: SurrogateConfig,
}

impl SurrogateModel {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        scores(&self.weights, &self.bias, self.dim, x)
    }

    /// Highest-scoring class, ties to the lowest class id.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.scores(x))
    }
}

fn scores(weights: &[f64], bias: &[f64], dim: usize, x: &[f64]) -> Vec<f64> {
    bias.iter()
        .enumerate()
        .map(|(c, b)| {
            let w = &weights[c * dim..(c + 1) * dim];
            b + w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()
        })
        .collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    v.iter_mut().for_each(|x| *x /= sum);
}

/// Mean softmax cross-entropy over a batch and its gradient with respect
/// to the weights and bias.
pub fn loss_and_gradient(
    weights: &[f64],
    bias: &[f64],
    dim: usize,
    rows: &[&[f64]],
    labels: &[usize],
) -> (f64, Vec<f64>, Vec<f64>) {
    let classes = bias.len();
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = vec![0.0; classes];
    let mut loss = 0.0;
    let inv = 1.0 / rows.len() as f64;
    for (x, &y) in rows.iter().zip(labels) {
        let mut p = scores(weights, bias, dim, x);
        softmax_in_place(&mut p);
        loss -= p[y].max(f64::MIN_POSITIVE).ln() * inv;
        for (c, pc) in p.iter().enumerate() {
            let residual = (pc - if c == y { 1.0 } else { 0.0 }) * inv;
            if residual == 0.0 {
                continue;
            }
            grad_b[c] += residual;
            let gw = &mut grad_w[c * dim..(c + 1) * dim];
            for (g, xv) in gw.iter_mut().zip(x.iter()) {
                *g += residual * xv;
            }
        }
    }
    (loss, grad_w, grad_b)
}

/// Seeded mini-batch gradient descent on softmax cross-entropy. The seed
/// drives both the weight initialisation and the per-epoch shuffles.
pub fn train_surrogate(train: &DatasetView<'_>, config: &SurrogateConfig) -> Result<SurrogateModel> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let present = train.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::Training(format!(
            "training data covers {present} class(es); at least two are needed"
        )));
    }
    let (classes, dim) = (train.num_classes(), train.dim());
    let mut rng = rng::stream(config.seed, rng::STREAM_SURROGATE);
    let mut weights: Vec<f64> = if config.init_scale > 0.0 {
        let normal = Normal::new(0.0, config.init_scale).expect("validated scale");
        (0..classes * dim).map(|_| normal.sample(&mut rng)).collect()
    } else {
        vec![0.0; classes * dim]
    };
    let mut bias = vec![0.0; classes];

    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..config.epochs {
        let lr = config.learning_rate / (1.0 + config.lr_decay * epoch as f64);
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let rows: Vec<&[f64]> = batch.iter().map(|&p| train.row(p)).collect();
            let labels: Vec<usize> = batch.iter().map(|&p| train.label(p)).collect();
            let (_, gw, gb) = loss_and_gradient(&weights, &bias, dim, &rows, &labels);
            for (w, g) in weights.iter_mut().zip(&gw) {
                *w -= lr * g;
            }
            for (b, g) in bias.iter_mut().zip(&gb) {
                *b -= lr * g;
            }
        }
    }
    if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
        return Err(Error::Training("weights diverged".into()));
    }
    Ok(SurrogateModel {
        classes,
        dim,
        weights,
        bias,
        config: config.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
}

/// Accuracy over every sample of the test set.
pub fn evaluate(model: &SurrogateModel, test: &Dataset) -> Result<Evaluation> {
    if test.dim() != model.dim {
        return Err(Error::Parameter(format!(
            "test samples have dimension {}, model expects {}",
            test.dim(),
            model.dim
        )));
    }
    if test.is_empty() {
        return Err(Error::Parameter("empty test set".into()));
    }
    let correct = (0..test.len())
        .filter(|&i| model.predict(test.row(i)) == test.labels()[i])
        .count();
    Ok(Evaluation {
        accuracy: correct as f64 / test.len() as f64,
        correct,
        total: test.len(),
    })
}
