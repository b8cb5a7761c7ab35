//! Feed-forward multilayer perceptron trained online by backpropagation
//! with momentum.
//!
//! Each non-input layer owns a `(fan_in + 1) x fan_out` weight matrix whose
//! last row holds the node offsets, fed by a constant input of 1. Weights
//! move by
//!
//! ```text
//! w(t+1) = w(t) + eta * delta_j * x_i + alpha * (w(t) - w(t-1))
//! ```
//!
//! where output sensitivities are `f'(net) (d - y)` and hidden ones are
//! `f'(net) * sum_k delta_k w_jk`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    /// Logistic sigmoid, range (0, 1).
    Logsig,
    /// Hyperbolic tangent, range (-1, 1).
    Tansig,
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Logsig => "logsig",
            Activation::Tansig => "tansig",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logsig" => Ok(Activation::Logsig),
            "tansig" => Ok(Activation::Tansig),
            other => Err(Error::format(format!("unknown activation {other:?}"))),
        }
    }
}

pub fn activate(net: f64, kind: Activation) -> f64 {
    match kind {
        Activation::Logsig => {
            if net >= 0.0 {
                1.0 / (1.0 + (-net).exp())
            } else {
                let e = net.exp();
                e / (1.0 + e)
            }
        }
        Activation::Tansig => net.tanh(),
    }
}

/// Derivative of the activation written in terms of its output `y`.
pub fn activate_derivative(y: f64, kind: Activation) -> f64 {
    match kind {
        Activation::Logsig => y * (1.0 - y),
        Activation::Tansig => 1.0 - y * y,
    }
}

/// Sensitivity of an output node.
pub fn output_delta(desired: f64, actual: f64, kind: Activation) -> f64 {
    activate_derivative(actual, kind) * (desired - actual)
}

/// Sensitivity of a hidden node with output `y` from the sensitivities of
/// the layer above and the weights leaving this node (offset excluded).
pub fn hidden_delta(
    y: f64,
    downstream_deltas: &[f64],
    downstream_weights: &[f64],
    kind: Activation,
) -> Result<f64> {
    if downstream_deltas.len() != downstream_weights.len() {
        return Err(Error::Dimension(format!(
            "{} downstream deltas but {} weights",
            downstream_deltas.len(),
            downstream_weights.len()
        )));
    }
    let back: f64 = downstream_deltas
        .iter()
        .zip(downstream_weights)
        .map(|(d, w)| d * w)
        .sum();
    Ok(activate_derivative(y, kind) * back)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub size: usize,
    /// Unused for the input layer.
    pub activation: Activation,
}

/// Desired output for class `index`: zeros with a single 1.
pub fn one_hot(index: usize, n_classes: usize) -> Result<Vec<f64>> {
    if index >= n_classes {
        return Err(Error::Dimension(format!(
            "class {index} out of range for {n_classes} classes"
        )));
    }
    let mut v = vec![0.0; n_classes];
    v[index] = 1.0;
    Ok(v)
}

/// Mean over every pattern and output node of `(d - y)^2`.
pub fn mse<O: AsRef<[f64]>, T: AsRef<[f64]>>(outputs: &[O], targets: &[T]) -> Result<f64> {
    if outputs.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} outputs but {} targets",
            outputs.len(),
            targets.len()
        )));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (o, t) in outputs.iter().zip(targets) {
        let (o, t) = (o.as_ref(), t.as_ref());
        if o.len() != t.len() {
            return Err(Error::Dimension(format!(
                "output width {} vs target {}",
                o.len(),
                t.len()
            )));
        }
        sum += o.iter().zip(t).map(|(y, d)| (d - y) * (d - y)).sum::<f64>();
        count += o.len();
    }
    if count == 0 {
        return Err(Error::EmptyDataset("mse of no outputs".into()));
    }
    Ok(sum / count as f64)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// One input/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub alpha: f64,
    /// Training stops once the epoch MSE is at or below this.
    pub target_error: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Reshuffle presentation order every epoch.
    pub shuffle: bool,
}

/// Step size used when none is given. With momentum 0.9 this matches a
/// momentum rule of the form `step = a * prev + (1 - a) * 0.5 * gradient`;
/// online training on a few hundred patterns saturates the output layer
/// with an unscaled rate of 0.5.
pub const DEFAULT_ETA: f64 = 0.05;
pub const DEFAULT_ALPHA: f64 = 0.9;

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            alpha: DEFAULT_ALPHA,
            target_error: 0.01,
            max_epochs: 1000,
            seed: 0,
            shuffle: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_mse: f64,
    pub converged: bool,
}

/// A layered perceptron together with its momentum state.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<LayerSpec>,
    weights: Vec<Matrix>,
    prev_delta: Vec<Matrix>,
    pub eta: f64,
    pub alpha: f64,
}

/// Default activation layout: logsig on hidden layers, tansig on the output.
pub fn default_activations(n_layers: usize) -> Vec<Activation> {
    (0..n_layers)
        .map(|i| {
            if i + 1 == n_layers {
                Activation::Tansig
            } else {
                Activation::Logsig
            }
        })
        .collect()
}

impl Network {
    /// Fresh network with weights drawn uniformly from [-0.5, 0.5] by a
    /// ChaCha8 generator seeded with `seed`.
    pub fn new(
        input_size: usize,
        hidden_sizes: &[usize],
        output_size: usize,
        eta: f64,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut sizes = vec![input_size];
        sizes.extend_from_slice(hidden_sizes);
        sizes.push(output_size);
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Dimension(format!("layer {i} has zero neurons")));
        }
        let acts = default_activations(sizes.len() - 1);
        let mut layers = vec![LayerSpec {
            size: input_size,
            activation: Activation::Logsig,
        }];
        layers.extend(
            sizes[1..]
                .iter()
                .zip(acts)
                .map(|(&size, activation)| LayerSpec { size, activation }),
        );

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<Matrix> = sizes
            .windows(2)
            .map(|w| {
                let mut m = Matrix::zeros(w[0] + 1, w[1]);
                for x in m.as_mut_slice() {
                    *x = rng.gen_range(-0.5..=0.5);
                }
                m
            })
            .collect();
        Self::from_weights(layers, weights, eta, alpha)
    }

    /// Assembles a network from explicit weights, with zero momentum state.
    pub fn from_weights(
        layers: Vec<LayerSpec>,
        weights: Vec<Matrix>,
        eta: f64,
        alpha: f64,
    ) -> Result<Self> {
        if layers.len() < 2 || weights.len() != layers.len() - 1 {
            return Err(Error::Dimension(format!(
                "{} layers need {} weight matrices, got {}",
                layers.len(),
                layers.len().saturating_sub(1),
                weights.len()
            )));
        }
        for (l, w) in weights.iter().enumerate() {
            let (fan_in, fan_out) = (layers[l].size, layers[l + 1].size);
            if fan_in == 0 || fan_out == 0 {
                return Err(Error::Dimension(format!("layer {} has zero neurons", l)));
            }
            if w.rows() != fan_in + 1 || w.cols() != fan_out {
                return Err(Error::Dimension(format!(
                    "weights {} are {}x{}, expected {}x{}",
                    l + 1,
                    w.rows(),
                    w.cols(),
                    fan_in + 1,
                    fan_out
                )));
            }
            if w.as_slice().iter().any(|v| !v.is_finite()) {
                return Err(Error::Dimension(format!(
                    "weights {} hold non-finite values",
                    l + 1
                )));
            }
        }
        if !(eta > 0.0 && eta.is_finite()) || !(0.0..1.0).contains(&alpha) {
            return Err(Error::Dimension(format!(
                "need eta > 0 and 0 <= alpha < 1, got eta {eta}, alpha {alpha}"
            )));
        }
        let prev_delta = weights
            .iter()
            .map(|w| Matrix::zeros(w.rows(), w.cols()))
            .collect();
        Ok(Self {
            layers,
            weights,
            prev_delta,
            eta,
            alpha,
        })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.size).collect()
    }

    /// Weight matrix feeding layer `l + 1`.
    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn prev_delta(&self) -> &[Matrix] {
        &self.prev_delta
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].size
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].size
    }

    /// Activations of every layer, the input first and the output last.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.input_size() {
            return Err(Error::Dimension(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.input_size()
            )));
        }
        let mut acts = Vec::with_capacity(self.layers.len());
        acts.push(x.to_vec());
        for (l, w) in self.weights.iter().enumerate() {
            let input = &acts[l];
            let kind = self.layers[l + 1].activation;
            let mut net = w.row(input.len()).to_vec();
            for (i, &xi) in input.iter().enumerate() {
                for (n, wij) in net.iter_mut().zip(w.row(i)) {
                    *n += wij * xi;
                }
            }
            acts.push(net.into_iter().map(|n| activate(n, kind)).collect());
        }
        Ok(acts)
    }

    /// Output-layer activations.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.pop().expect("at least two layers"))
    }

    pub fn classify(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict(x)?))
    }

    /// Sensitivities of every non-input layer for one forward pass.
    pub fn deltas(&self, activations: &[Vec<f64>], target: &[f64]) -> Result<Vec<Vec<f64>>> {
        let n = self.layers.len();
        if activations.len() != n {
            return Err(Error::Dimension(
                "activation list does not match layers".into(),
            ));
        }
        let out = &activations[n - 1];
        if target.len() != out.len() {
            return Err(Error::Dimension(format!(
                "target has {} values, output layer has {}",
                target.len(),
                out.len()
            )));
        }
        let mut deltas = vec![Vec::new(); n - 1];
        let kind = self.layers[n - 1].activation;
        deltas[n - 2] = out
            .iter()
            .zip(target)
            .map(|(&y, &d)| output_delta(d, y, kind))
            .collect();
        for l in (1..n - 1).rev() {
            let kind = self.layers[l].activation;
            let w = &self.weights[l];
            let above = &deltas[l];
            let here = activations[l]
                .iter()
                .enumerate()
                .map(|(j, &y)| hidden_delta(y, above, w.row(j), kind))
                .collect::<Result<Vec<f64>>>()?;
            deltas[l - 1] = here;
        }
        Ok(deltas)
    }

    /// Gradient of `0.5 * sum (d - y)^2` for one pattern, shaped like the
    /// weights.
    pub fn gradient(&self, x: &[f64], target: &[f64]) -> Result<Vec<Matrix>> {
        let acts = self.forward(x)?;
        let deltas = self.deltas(&acts, target)?;
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(l, w)| {
                let mut g = Matrix::zeros(w.rows(), w.cols());
                let input = &acts[l];
                for i in 0..w.rows() {
                    let xi = input.get(i).copied().unwrap_or(1.0);
                    for (j, d) in deltas[l].iter().enumerate() {
                        g[(i, j)] = -d * xi;
                    }
                }
                g
            })
            .collect())
    }

    /// Applies one momentum step for the given sensitivities and the
    /// activations that produced them.
    pub fn update_weights(&mut self, deltas: &[Vec<f64>], activations: &[Vec<f64>]) -> Result<()> {
        if deltas.len() != self.weights.len() || activations.len() < self.weights.len() {
            return Err(Error::Dimension(
                "deltas/activations do not match network".into(),
            ));
        }
        let (eta, alpha) = (self.eta, self.alpha);
        for (l, (w, prev)) in self
            .weights
            .iter_mut()
            .zip(self.prev_delta.iter_mut())
            .enumerate()
        {
            let input = &activations[l];
            let d = &deltas[l];
            if input.len() + 1 != w.rows() || d.len() != w.cols() {
                return Err(Error::Dimension(format!(
                    "layer {} shapes do not match",
                    l + 1
                )));
            }
            for i in 0..w.rows() {
                let xi = input.get(i).copied().unwrap_or(1.0);
                for (j, &dj) in d.iter().enumerate() {
                    let step = eta * dj * xi + alpha * prev[(i, j)];
                    w[(i, j)] += step;
                    prev[(i, j)] = step;
                }
            }
        }
        Ok(())
    }

    /// One online step on a single pattern: forward, sensitivities, update.
    pub fn train_pattern(&mut self, pattern: &Pattern) -> Result<()> {
        let acts = self.forward(&pattern.input)?;
        let deltas = self.deltas(&acts, &pattern.target)?;
        self.update_weights(&deltas, &acts)
    }

    /// MSE of the network over a set of patterns.
    pub fn dataset_mse(&self, patterns: &[Pattern]) -> Result<f64> {
        let outputs = patterns
            .iter()
            .map(|p| self.predict(&p.input))
            .collect::<Result<Vec<_>>>()?;
        let targets: Vec<&[f64]> = patterns.iter().map(|p| p.target.as_slice()).collect();
        mse(&outputs, &targets)
    }

    /// Online backpropagation until the epoch MSE reaches
    /// `config.target_error` or `config.max_epochs` epochs have run.
    ///
    /// `eta` and `alpha` from `config` replace the network's own.
    pub fn train(&mut self, patterns: &[Pattern], config: &TrainConfig) -> Result<TrainReport> {
        if patterns.is_empty() {
            return Err(Error::EmptyDataset("no training patterns".into()));
        }
        if config.target_error.is_nan() || config.target_error <= 0.0 || config.max_epochs == 0 {
            return Err(Error::Dimension(format!(
                "need target_error > 0 and max_epochs >= 1, got {} and {}",
                config.target_error, config.max_epochs
            )));
        }
        if !(config.eta > 0.0 && config.eta.is_finite()) || !(0.0..1.0).contains(&config.alpha) {
            return Err(Error::Dimension(format!(
                "need eta > 0 and 0 <= alpha < 1, got eta {}, alpha {}",
                config.eta, config.alpha
            )));
        }
        for p in patterns {
            if p.input.len() != self.input_size() || p.target.len() != self.output_size() {
                return Err(Error::Dimension(format!(
                    "pattern is {}->{}, network is {}->{}",
                    p.input.len(),
                    p.target.len(),
                    self.input_size(),
                    self.output_size()
                )));
            }
        }
        self.eta = config.eta;
        self.alpha = config.alpha;

        let mut order: Vec<usize> = (0..patterns.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut report = TrainReport {
            epochs_run: 0,
            final_mse: f64::INFINITY,
            converged: false,
        };
        for epoch in 1..=config.max_epochs {
            if config.shuffle {
                order.shuffle(&mut rng);
            }
            for &i in &order {
                self.train_pattern(&patterns[i])?;
            }
            let err = self.dataset_mse(patterns)?;
            if !err.is_finite()
                || self
                    .weights
                    .iter()
                    .any(|w| w.as_slice().iter().any(|v| !v.is_finite()))
            {
                return Err(Error::Divergence { epoch });
            }
            report.epochs_run = epoch;
            report.final_mse = err;
            if err <= config.target_error {
                report.converged = true;
                break;
            }
        }
        Ok(report)
    }
}
