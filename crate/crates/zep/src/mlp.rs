//! Single-hidden-layer perceptron with plain stochastic gradient descent.
//!
//! Two heads cover the two discrimination schemes: a `Regression` head
//! (identity output) trained on closeness-to-center targets in [0, 1],
//! and a `Binary` head (tanh output) trained on +/-1 eye / non-eye labels.
//! Hidden units use tanh; the loss is squared error. Training, inference
//! and serialization are fully deterministic.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MODEL_MAGIC: &str = "ZEPMLP v1";

/// Output head of the discriminator.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Head {
    /// Identity output trained on scalar closeness targets in [0, 1].
    Regression,
    /// Tanh output trained on +/-1 labels; outputs stay in (-1, 1).
    Binary,
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Head::Regression => "regression",
            Head::Binary => "binary",
        })
    }
}

impl FromStr for Head {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(Head::Regression),
            "binary" => Ok(Head::Binary),
            other => Err(Error::InvalidInput(format!("unknown head {other:?}"))),
        }
    }
}

/// Fully connected 2-layer perceptron with a scalar output.
#[derive(Clone, PartialEq, Debug)]
pub struct Mlp {
    n_in: usize,
    n_hidden: usize,
    head: Head,
    // Row-major (n_hidden x n_in).
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl Mlp {
    /// Fresh network with weights drawn uniformly from
    /// [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer and zero biases,
    /// deterministically from `seed`.
    pub fn new(n_in: usize, n_hidden: usize, head: Head, seed: u64) -> Result<Self> {
        if n_in == 0 || n_hidden == 0 {
            return Err(Error::InvalidInput(
                "layer widths must be positive".to_string(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound1 = 1.0 / (n_in as f64).sqrt();
        let w1 = (0..n_hidden * n_in)
            .map(|_| rng.gen_range(-bound1..=bound1))
            .collect();
        let bound2 = 1.0 / (n_hidden as f64).sqrt();
        let w2 = (0..n_hidden).map(|_| rng.gen_range(-bound2..=bound2)).collect();
        Ok(Self {
            n_in,
            n_hidden,
            head,
            w1,
            b1: vec![0.0; n_hidden],
            w2,
            b2: 0.0,
        })
    }

    /// The default sizing rule: hidden layer half the feature width.
    pub fn with_default_sizing(n_in: usize, head: Head, seed: u64) -> Result<Self> {
        Self::new(n_in, (n_in / 2).max(1), head, seed)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn head(&self) -> Head {
        self.head
    }

    /// Scalar inference.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_in {
            return Err(Error::DimensionMismatch(format!(
                "input length {} does not match {} network inputs",
                x.len(),
                self.n_in
            )));
        }
        let mut hidden = vec![0.0; self.n_hidden];
        self.hidden_layer(x, &mut hidden);
        Ok(self.output_from_hidden(&hidden))
    }

    fn hidden_layer(&self, x: &[f64], hidden: &mut [f64]) {
        for (j, h) in hidden.iter_mut().enumerate() {
            let row = &self.w1[j * self.n_in..(j + 1) * self.n_in];
            let mut acc = self.b1[j];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            *h = acc.tanh();
        }
    }

    fn output_from_hidden(&self, hidden: &[f64]) -> f64 {
        let mut acc = self.b2;
        for (w, h) in self.w2.iter().zip(hidden) {
            acc += w * h;
        }
        match self.head {
            Head::Regression => acc,
            Head::Binary => acc.tanh(),
        }
    }

    /// Squared-error SGD over shuffled per-sample updates.
    ///
    /// Returns the mean pre-update loss of each epoch. Reports divergence
    /// (non-finite loss) with the epoch it occurred in.
    pub fn train(&mut self, data: &TrainingSet, opts: &TrainOptions) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::InvalidInput("training set is empty".to_string()));
        }
        if data.head != self.head {
            return Err(Error::HeadMismatch {
                expected: self.head.to_string(),
                found: data.head.to_string(),
            });
        }
        if data.n_features != self.n_in {
            return Err(Error::DimensionMismatch(format!(
                "feature length {} does not match {} network inputs",
                data.n_features, self.n_in
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut hidden = vec![0.0; self.n_hidden];
        let mut grads = Gradients::zeros(self.n_in, self.n_hidden);
        let mut trace = Vec::with_capacity(opts.epochs);
        // Per-sample losses are summed in index order so the trace does not
        // depend on the visit order of an epoch.
        let mut losses = vec![0.0; data.len()];

        for epoch in 0..opts.epochs {
            order.shuffle(&mut rng);
            for &idx in &order {
                let x = data.feature(idx);
                let target = data.targets[idx];
                self.hidden_layer(x, &mut hidden);
                let y = self.output_from_hidden(&hidden);
                let err = y - target;
                losses[idx] = 0.5 * err * err;

                self.backward(x, &hidden, y, target, &mut grads);
                self.apply(&grads, opts.learning_rate);
            }
            let mean = losses.iter().sum::<f64>() / data.len() as f64;
            if !mean.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            trace.push(mean);
        }
        Ok(trace)
    }

    fn backward(&self, x: &[f64], hidden: &[f64], y: f64, target: f64, grads: &mut Gradients) {
        let err = y - target;
        let delta_out = match self.head {
            Head::Regression => err,
            Head::Binary => err * (1.0 - y * y),
        };
        grads.b2 = delta_out;
        for (g, h) in grads.w2.iter_mut().zip(hidden) {
            *g = delta_out * h;
        }
        for (j, (&h, &w2)) in hidden.iter().zip(&self.w2).enumerate() {
            let delta_h = delta_out * w2 * (1.0 - h * h);
            grads.b1[j] = delta_h;
            let row = &mut grads.w1[j * self.n_in..(j + 1) * self.n_in];
            for (g, v) in row.iter_mut().zip(x) {
                *g = delta_h * v;
            }
        }
    }

    fn apply(&mut self, grads: &Gradients, lr: f64) {
        for (w, g) in self.w1.iter_mut().zip(&grads.w1) {
            *w -= lr * g;
        }
        for (b, g) in self.b1.iter_mut().zip(&grads.b1) {
            *b -= lr * g;
        }
        for (w, g) in self.w2.iter_mut().zip(&grads.w2) {
            *w -= lr * g;
        }
        self.b2 -= lr * grads.b2;
    }

    /// Compares analytic gradients of the squared-error loss against
    /// central finite differences over every parameter and returns the
    /// worst relative error (0 when both gradients vanish).
    pub fn gradient_check(&self, x: &[f64], target: f64) -> Result<f64> {
        if x.len() != self.n_in {
            return Err(Error::DimensionMismatch(format!(
                "input length {} does not match {} network inputs",
                x.len(),
                self.n_in
            )));
        }
        let mut hidden = vec![0.0; self.n_hidden];
        self.hidden_layer(x, &mut hidden);
        let y = self.output_from_hidden(&hidden);
        let mut grads = Gradients::zeros(self.n_in, self.n_hidden);
        self.backward(x, &hidden, y, target, &mut grads);
        let analytic: Vec<f64> = grads
            .w1
            .iter()
            .chain(&grads.b1)
            .chain(&grads.w2)
            .chain(std::iter::once(&grads.b2))
            .copied()
            .collect();

        const STEP: f64 = 1e-4;
        let mut worst = 0.0f64;
        for (p, &grad) in analytic.iter().enumerate() {
            let mut plus = self.clone();
            let mut minus = self.clone();
            *plus.param_mut(p) += STEP;
            *minus.param_mut(p) -= STEP;
            let numeric =
                (plus.sample_loss(x, target)? - minus.sample_loss(x, target)?) / (2.0 * STEP);
            let denom = grad.abs().max(numeric.abs());
            if denom > 0.0 {
                worst = worst.max((grad - numeric).abs() / denom);
            }
        }
        Ok(worst)
    }

    fn sample_loss(&self, x: &[f64], target: f64) -> Result<f64> {
        let err = self.forward(x)? - target;
        Ok(0.5 * err * err)
    }

    fn param_mut(&mut self, index: usize) -> &mut f64 {
        let nw1 = self.w1.len();
        let nb1 = self.b1.len();
        let nw2 = self.w2.len();
        if index < nw1 {
            &mut self.w1[index]
        } else if index < nw1 + nb1 {
            &mut self.b1[index - nw1]
        } else if index < nw1 + nb1 + nw2 {
            &mut self.w2[index - nw1 - nb1]
        } else {
            &mut self.b2
        }
    }

    /// Serializes the model to the versioned text format:
    ///
    /// ```text
    /// ZEPMLP v1
    /// <head>
    /// <n_in> <n_hidden> 1
    /// <hidden weight rows, one per line>
    /// <hidden biases>
    /// <output weights>
    /// <output bias>
    /// ```
    ///
    /// Floats are written in shortest round-trip decimal form, so a loaded
    /// model reproduces forward outputs bit-identically.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        out.push_str(MODEL_MAGIC);
        out.push('\n');
        out.push_str(&self.head.to_string());
        out.push('\n');
        out.push_str(&format!("{} {} 1\n", self.n_in, self.n_hidden));
        for j in 0..self.n_hidden {
            push_floats(&mut out, &self.w1[j * self.n_in..(j + 1) * self.n_in]);
        }
        push_floats(&mut out, &self.b1);
        push_floats(&mut out, &self.w2);
        push_floats(&mut out, &[self.b2]);
        Ok(fs::write(path, out)?)
    }

    /// Loads a model saved by [`Mlp::save`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();

        let magic = lines
            .next()
            .ok_or_else(|| Error::MalformedModel("empty file".to_string()))?;
        if magic != MODEL_MAGIC {
            return Err(Error::ModelVersion(magic.to_string()));
        }
        let head: Head = lines
            .next()
            .ok_or_else(|| Error::MalformedModel("missing head line".to_string()))?
            .parse()
            .map_err(|_| Error::MalformedModel("bad head tag".to_string()))?;

        let dims = lines
            .next()
            .ok_or_else(|| Error::MalformedModel("missing widths line".to_string()))?;
        let widths = parse_floats(dims)?;
        if widths.len() != 3 || widths[2] != 1.0 {
            return Err(Error::MalformedModel(format!("bad widths line {dims:?}")));
        }
        let n_in = widths[0] as usize;
        let n_hidden = widths[1] as usize;
        if n_in == 0 || n_hidden == 0 {
            return Err(Error::MalformedModel("zero layer width".to_string()));
        }

        let mut expect_row = |len: usize| -> Result<Vec<f64>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::MalformedModel("file ends early".to_string()))?;
            let row = parse_floats(line)?;
            if row.len() != len {
                return Err(Error::MalformedModel(format!(
                    "expected {len} values per row, found {}",
                    row.len()
                )));
            }
            Ok(row)
        };

        let mut w1 = Vec::with_capacity(n_hidden * n_in);
        for _ in 0..n_hidden {
            w1.extend(expect_row(n_in)?);
        }
        let b1 = expect_row(n_hidden)?;
        let w2 = expect_row(n_hidden)?;
        let b2 = expect_row(1)?[0];

        Ok(Self {
            n_in,
            n_hidden,
            head,
            w1,
            b1,
            w2,
            b2,
        })
    }
}

fn push_floats(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{v}"));
    }
    out.push('\n');
}

fn parse_floats(line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::MalformedModel(format!("bad number {t:?}")))
        })
        .collect()
}

struct Gradients {
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl Gradients {
    fn zeros(n_in: usize, n_hidden: usize) -> Self {
        Self {
            w1: vec![0.0; n_hidden * n_in],
            b1: vec![0.0; n_hidden],
            w2: vec![0.0; n_hidden],
            b2: 0.0,
        }
    }
}

/// Feature/target pairs with a head tag; targets are validated against the
/// head's range on construction.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    features: Vec<f64>,
    n_features: usize,
    targets: Vec<f64>,
    head: Head,
}

impl TrainingSet {
    pub fn new(features: Vec<Vec<f64>>, targets: Vec<f64>, head: Head) -> Result<Self> {
        if features.len() != targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} features vs {} targets",
                features.len(),
                targets.len()
            )));
        }
        let n_features = features.first().map_or(0, Vec::len);
        if features.iter().any(|f| f.len() != n_features) {
            return Err(Error::DimensionMismatch(
                "feature vectors have inconsistent lengths".to_string(),
            ));
        }
        for &t in &targets {
            let ok = match head {
                Head::Binary => t == 1.0 || t == -1.0,
                Head::Regression => (0.0..=1.0).contains(&t),
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "target {t} outside the {head} head range"
                )));
            }
        }
        let mut flat = Vec::with_capacity(features.len() * n_features);
        for f in &features {
            flat.extend_from_slice(f);
        }
        Ok(Self {
            features: flat,
            n_features,
            targets,
            head,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature(&self, idx: usize) -> &[f64] {
        &self.features[idx * self.n_features..(idx + 1) * self.n_features]
    }

    pub fn target(&self, idx: usize) -> f64 {
        self.targets[idx]
    }
}

/// SGD hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 50,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

/// Fraction of samples a binary model classifies correctly by output sign.
pub fn binary_accuracy(model: &Mlp, data: &TrainingSet) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidInput("validation set is empty".to_string()));
    }
    let mut correct = 0usize;
    for i in 0..data.len() {
        let y = model.forward(data.feature(i))?;
        if (y > 0.0) == (data.target(i) > 0.0) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Mean squared error of a model over a data set.
pub fn mean_squared_error(model: &Mlp, data: &TrainingSet) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidInput("validation set is empty".to_string()));
    }
    let mut sum = 0.0;
    for i in 0..data.len() {
        let err = model.forward(data.feature(i))? - data.target(i);
        sum += err * err;
    }
    Ok(sum / data.len() as f64)
}
