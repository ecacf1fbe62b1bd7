use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledSample;
use crate::error::{Error, Result};
use crate::knowledge::{normalize_percept, FeatureVector};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Rprop⁻ hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RpropConfig {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
}

impl Default for RpropConfig {
    fn default() -> Self {
        Self {
            eta_plus: 1.2,
            eta_minus: 0.5,
            step_init: 0.1,
            step_min: 1e-6,
            step_max: 50.0,
        }
    }
}

/// Per-connection step sizes and the sign of the previous gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RpropState {
    pub steps: Vec<Vec<f64>>,
    pub previous_signs: Vec<Vec<i8>>,
}

/// Input, hidden and output layer with logistic units. Each layer's weights are a
/// row-major `(to) × (from + 1)` matrix; the last column is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: [usize; 3],
    weights: Vec<Vec<f64>>,
    rprop: RpropState,
    config: RpropConfig,
    seed: u64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Activations of one forward pass.
struct Pass {
    hidden: Vec<f64>,
    output: Vec<f64>,
}

impl Mlp {
    /// A network with weights drawn uniformly from `[-0.5, 0.5]`.
    pub fn new(input: usize, hidden: usize, output: usize, seed: u64) -> Result<Self> {
        Self::with_config(input, hidden, output, seed, RpropConfig::default())
    }

    pub fn with_config(input: usize, hidden: usize, output: usize, seed: u64, config: RpropConfig) -> Result<Self> {
        if input == 0 || hidden == 0 || output == 0 {
            return Err(Error::InvalidValue("layer sizes must be positive".into()));
        }
        if !(config.step_min > 0.0 && config.step_min <= config.step_init && config.step_init <= config.step_max) {
            return Err(Error::InvalidValue(
                "step bounds must satisfy 0 < min <= init <= max".into(),
            ));
        }
        let layer_sizes = [input, hidden, output];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<Vec<f64>> = layer_sizes
            .windows(2)
            .map(|w| (0..w[1] * (w[0] + 1)).map(|_| rng.gen_range(-0.5..=0.5)).collect())
            .collect();
        let rprop = RpropState {
            steps: weights.iter().map(|l| vec![config.step_init; l.len()]).collect(),
            previous_signs: weights.iter().map(|l| vec![0; l.len()]).collect(),
        };
        Ok(Self {
            layer_sizes,
            weights,
            rprop,
            config,
            seed,
        })
    }

    pub fn layer_sizes(&self) -> [usize; 3] {
        self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        self.layer_sizes[2]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: Vec<Vec<f64>>) -> Result<()> {
        let shapes_match = weights.len() == 2 && weights.iter().zip(&self.weights).all(|(a, b)| a.len() == b.len());
        if !shapes_match {
            return Err(Error::InvalidValue(
                "weight matrices do not match the layer sizes".into(),
            ));
        }
        self.weights = weights;
        Ok(())
    }

    pub fn rprop_state(&self) -> &RpropState {
        &self.rprop
    }

    pub fn rprop_config(&self) -> RpropConfig {
        self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                actual: input.len(),
            });
        }
        Ok(())
    }

    fn layer(weights: &[f64], from: usize, input: &[f64]) -> Vec<f64> {
        weights
            .chunks(from + 1)
            .map(|row| sigmoid(row[..from].iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + row[from]))
            .collect()
    }

    fn pass(&self, input: &[f64]) -> Pass {
        let [n_in, n_hidden, _] = self.layer_sizes;
        let hidden = Self::layer(&self.weights[0], n_in, input);
        let output = Self::layer(&self.weights[1], n_hidden, &hidden);
        Pass { hidden, output }
    }

    /// Raw output activations.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        Ok(self.pass(input).output)
    }

    /// Output activations converted to class percentages.
    pub fn classify(&self, input: &[f64]) -> Result<Vec<f64>> {
        let output = self.forward(input)?;
        normalize_percept(&output, output.len())
    }

    /// Class percentages as a named feature vector.
    pub fn classify_feature(&self, feature: &str, input: &[f64]) -> Result<FeatureVector> {
        FeatureVector::new(feature, &self.forward(input)?, self.output_size())
    }

    /// Index of the strongest output; ties go to the lowest index.
    pub fn predict(&self, input: &[f64]) -> Result<usize> {
        let output = self.forward(input)?;
        Ok(output
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            )
            .0)
    }

    fn target(&self, label: usize) -> Result<Vec<f64>> {
        if label >= self.output_size() {
            return Err(Error::InvalidValue(format!(
                "label {label} out of range for {} classes",
                self.output_size()
            )));
        }
        Ok((0..self.output_size())
            .map(|i| if i == label { 1.0 } else { 0.0 })
            .collect())
    }

    /// Sum over samples of ½‖output − one-hot target‖².
    pub fn loss(&self, data: &[LabeledSample]) -> Result<f64> {
        let mut total = 0.0;
        for sample in data {
            self.check_input(&sample.features)?;
            let target = self.target(sample.label)?;
            let out = self.pass(&sample.features).output;
            total += 0.5 * out.iter().zip(&target).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
        }
        Ok(total)
    }

    /// Batch loss and its gradient with respect to every weight (backpropagation).
    pub fn gradient(&self, data: &[LabeledSample]) -> Result<(f64, Vec<Vec<f64>>)> {
        let [n_in, n_hidden, n_out] = self.layer_sizes;
        let mut grads: Vec<Vec<f64>> = self.weights.iter().map(|l| vec![0.0; l.len()]).collect();
        let mut total = 0.0;
        for sample in data {
            self.check_input(&sample.features)?;
            let target = self.target(sample.label)?;
            let Pass { hidden, output } = self.pass(&sample.features);

            let delta_out: Vec<f64> = output
                .iter()
                .zip(&target)
                .map(|(&y, &t)| {
                    total += 0.5 * (y - t) * (y - t);
                    (y - t) * y * (1.0 - y)
                })
                .collect();
            let delta_hidden: Vec<f64> = (0..n_hidden)
                .map(|h| {
                    let back: f64 = (0..n_out)
                        .map(|o| self.weights[1][o * (n_hidden + 1) + h] * delta_out[o])
                        .sum();
                    back * hidden[h] * (1.0 - hidden[h])
                })
                .collect();

            for (o, d) in delta_out.iter().enumerate() {
                let row = &mut grads[1][o * (n_hidden + 1)..(o + 1) * (n_hidden + 1)];
                for (g, h) in row.iter_mut().zip(hidden.iter().chain(std::iter::once(&1.0))) {
                    *g += d * h;
                }
            }
            for (h, d) in delta_hidden.iter().enumerate() {
                let row = &mut grads[0][h * (n_in + 1)..(h + 1) * (n_in + 1)];
                for (g, x) in row.iter_mut().zip(sample.features.iter().chain(std::iter::once(&1.0))) {
                    *g += d * x;
                }
            }
        }
        Ok((total, grads))
    }

    /// Full-batch Rprop⁻ for `epochs` epochs. Returns the loss measured at the start of each epoch.
    pub fn train(&mut self, data: &[LabeledSample], epochs: usize) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::DegenerateInput("training set is empty".into()));
        }
        let mut trace = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let (loss, grads) = self.gradient(data)?;
            trace.push(loss);
            self.rprop_step(&grads);
        }
        Ok(trace)
    }

    fn rprop_step(&mut self, grads: &[Vec<f64>]) {
        let c = self.config;
        for (l, layer_grads) in grads.iter().enumerate() {
            for (i, &g) in layer_grads.iter().enumerate() {
                let s = sign(g);
                let agreement = self.rprop.previous_signs[l][i] * s;
                let step = &mut self.rprop.steps[l][i];
                if agreement > 0 {
                    *step = (*step * c.eta_plus).min(c.step_max);
                } else if agreement < 0 {
                    *step = (*step * c.eta_minus).max(c.step_min);
                }
                self.weights[l][i] -= f64::from(s) * *step;
                self.rprop.previous_signs[l][i] = s;
            }
        }
    }

    /// Fraction of samples whose predicted class equals the label.
    pub fn accuracy(&self, data: &[LabeledSample]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::DegenerateInput("data set is empty".into()));
        }
        let mut hits = 0usize;
        for s in data {
            if self.predict(&s.features)? == s.label {
                hits += 1;
            }
        }
        Ok(hits as f64 / data.len() as f64)
    }

    pub fn confusion_stats(&self, data: &[LabeledSample]) -> Result<ConfusionStats> {
        let pairs = data
            .iter()
            .map(|s| Ok((s.label, self.predict(&s.features)?)))
            .collect::<Result<Vec<_>>>()?;
        ConfusionStats::from_pairs(self.output_size(), &pairs)
    }

    pub fn to_checkpoint(&self) -> MlpCheckpoint {
        MlpCheckpoint {
            version: CHECKPOINT_VERSION,
            layer_sizes: self.layer_sizes.to_vec(),
            weights: self.weights.clone(),
            rprop_state: self.rprop.clone(),
            rprop_config: self.config,
            seed: self.seed,
        }
    }

    pub fn from_checkpoint(cp: MlpCheckpoint) -> Result<Self> {
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Document {
                location: "version".into(),
                message: format!("unsupported checkpoint version {}", cp.version),
            });
        }
        let sizes: [usize; 3] = cp.layer_sizes.as_slice().try_into().map_err(|_| Error::Document {
            location: "layerSizes".into(),
            message: "expected exactly three layers".into(),
        })?;
        let mut mlp = Mlp::with_config(sizes[0], sizes[1], sizes[2], cp.seed, cp.rprop_config)?;
        let lengths: Vec<usize> = mlp.weights.iter().map(Vec::len).collect();
        let matches = |m: &[Vec<f64>]| m.len() == 2 && m.iter().zip(&lengths).all(|(l, &n)| l.len() == n);
        let sign_matches = cp.rprop_state.previous_signs.len() == 2
            && cp
                .rprop_state
                .previous_signs
                .iter()
                .zip(&lengths)
                .all(|(l, &n)| l.len() == n);
        if !matches(&cp.weights) || !matches(&cp.rprop_state.steps) || !sign_matches {
            return Err(Error::Document {
                location: "weights".into(),
                message: "matrix shapes do not match the layer sizes".into(),
            });
        }
        mlp.weights = cp.weights;
        mlp.rprop = cp.rprop_state;
        Ok(mlp)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_checkpoint()).map_err(|e| Error::InvalidValue(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cp: MlpCheckpoint = serde_json::from_str(text).map_err(|e| Error::Document {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_checkpoint(cp)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Serialized network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MlpCheckpoint {
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub rprop_state: RpropState,
    #[serde(default)]
    pub rprop_config: RpropConfig,
    pub seed: u64,
}

/// Confusion counts with the two per-class conditional frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfusionStats {
    /// `counts[actual][predicted]`.
    pub counts: Vec<Vec<usize>>,
    /// P(predicted = a | actual = a); `None` when class `a` never occurs.
    pub recall: Vec<Option<f64>>,
    /// P(actual = a | predicted = a); `None` when class `a` is never predicted.
    pub precision: Vec<Option<f64>>,
}

impl ConfusionStats {
    pub fn from_pairs(classes: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut counts = vec![vec![0usize; classes]; classes];
        for &(actual, predicted) in pairs {
            if actual >= classes || predicted >= classes {
                return Err(Error::InvalidValue(format!(
                    "class index out of range for {classes} classes"
                )));
            }
            counts[actual][predicted] += 1;
        }
        let ratio = |hit: usize, total: usize| (total > 0).then(|| hit as f64 / total as f64);
        let recall = (0..classes)
            .map(|a| ratio(counts[a][a], counts[a].iter().sum()))
            .collect();
        let precision = (0..classes)
            .map(|a| ratio(counts[a][a], (0..classes).map(|x| counts[x][a]).sum()))
            .collect();
        Ok(Self {
            counts,
            recall,
            precision,
        })
    }
}
