//! Fully-connected layers, batched forward/backward passes and the SGD update.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};
use crate::tensor::SeededRng;

/// Work threshold (multiply-adds) below which layer kernels stay on one thread.
const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    #[inline]
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Dense layer `y = act(W x + b)` with `W` stored `outputs x inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
            activation,
        }
    }

    /// Uniform `±sqrt(6 / (fan_in + fan_out))` weights, zero biases.
    pub fn glorot(inputs: usize, outputs: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let bound = (6.0 / (inputs + outputs) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            biases: vec![0.0; outputs],
            activation,
        }
    }

    /// Pre-activations for a `batch x inputs` block.
    fn linear(&self, input: &[f64], batch: usize) -> Vec<f64> {
        let mut out = vec![0.0; batch * self.outputs];
        let kernel = |(x, o): (&[f64], &mut [f64])| {
            for (k, ok) in o.iter_mut().enumerate() {
                let w = &self.weights[k * self.inputs..(k + 1) * self.inputs];
                *ok = self.biases[k] + dot(w, x);
            }
        };
        if batch * self.inputs * self.outputs >= PAR_THRESHOLD {
            input
                .par_chunks_exact(self.inputs)
                .zip(out.par_chunks_exact_mut(self.outputs))
                .for_each(kernel);
        } else {
            input
                .chunks_exact(self.inputs)
                .zip(out.chunks_exact_mut(self.outputs))
                .for_each(kernel);
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-layer weight and bias gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Cached activations from a forward pass, needed for backpropagation.
pub struct ForwardTrace {
    batch: usize,
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace holds the input at least")
    }
}

/// A stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(SscError::InvalidArgument("network needs at least one layer".into()));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs != pair[1].inputs {
                return Err(SscError::DimensionMismatch(format!(
                    "layer {l} emits {} values but layer {} expects {}",
                    pair[0].outputs,
                    l + 1,
                    pair[1].inputs
                )));
            }
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.weights.len() != layer.inputs * layer.outputs || layer.biases.len() != layer.outputs {
                return Err(SscError::DimensionMismatch(format!("layer {l} parameter shapes")));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialized network with the given widths and per-layer activations.
    pub fn init(widths: &[usize], activations: &[Activation], seed: SeededRng) -> Result<Self> {
        if widths.len() < 2 || activations.len() != widths.len() - 1 {
            return Err(SscError::InvalidArgument(
                "need one activation per layer and at least two widths".into(),
            ));
        }
        let mut rng = seed.generator();
        let layers = widths
            .windows(2)
            .zip(activations)
            .map(|(w, &a)| DenseLayer::glorot(w[0], w[1], a, &mut rng))
            .collect();
        Self::new(layers)
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::parameter_count).sum()
    }

    /// Plain forward pass over a `batch x input_width` block.
    pub fn predict(&self, input: &[f64], batch: usize) -> Vec<f64> {
        let mut a = input.to_vec();
        for layer in &self.layers {
            let mut z = layer.linear(&a, batch);
            z.iter_mut().for_each(|v| *v = layer.activation.apply(*v));
            a = z;
        }
        a
    }

    pub fn forward(&self, input: &[f64], batch: usize) -> ForwardTrace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        activations.push(input.to_vec());
        for layer in &self.layers {
            let z = layer.linear(activations.last().unwrap(), batch);
            let a = z.iter().map(|&v| layer.activation.apply(v)).collect();
            pre_activations.push(z);
            activations.push(a);
        }
        ForwardTrace { batch, activations, pre_activations }
    }

    /// Gradients of a loss whose derivative with respect to the network output
    /// is `output_grad` (`batch x output_width`).
    pub fn backward(&self, trace: &ForwardTrace, output_grad: &[f64]) -> Vec<LayerGradient> {
        let batch = trace.batch;
        let mut grads = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        let mut delta: Vec<f64> = output_grad
            .iter()
            .zip(&trace.pre_activations[last])
            .map(|(g, &z)| g * self.layers[last].activation.derivative(z))
            .collect();

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.activations[l];
            let (n_in, n_out) = (layer.inputs, layer.outputs);

            let mut dw = vec![0.0; n_in * n_out];
            let row_kernel = |(k, row): (usize, &mut [f64])| {
                for b in 0..batch {
                    let d = delta[b * n_out + k];
                    if d != 0.0 {
                        let x = &input[b * n_in..(b + 1) * n_in];
                        for (w, xi) in row.iter_mut().zip(x) {
                            *w += d * xi;
                        }
                    }
                }
            };
            if batch * n_in * n_out >= PAR_THRESHOLD {
                dw.par_chunks_exact_mut(n_in).enumerate().for_each(row_kernel);
            } else {
                dw.chunks_exact_mut(n_in).enumerate().for_each(row_kernel);
            }
            let mut db = vec![0.0; n_out];
            for b in 0..batch {
                for (k, g) in db.iter_mut().enumerate() {
                    *g += delta[b * n_out + k];
                }
            }

            if l > 0 {
                let prev = &self.layers[l - 1];
                let z_prev = &trace.pre_activations[l - 1];
                let mut next = vec![0.0; batch * n_in];
                let kernel = |(b, out): (usize, &mut [f64])| {
                    let d = &delta[b * n_out..(b + 1) * n_out];
                    for (k, &dk) in d.iter().enumerate() {
                        if dk != 0.0 {
                            let w = &layer.weights[k * n_in..(k + 1) * n_in];
                            for (o, wk) in out.iter_mut().zip(w) {
                                *o += dk * wk;
                            }
                        }
                    }
                    for (o, &z) in out.iter_mut().zip(&z_prev[b * n_in..(b + 1) * n_in]) {
                        *o *= prev.activation.derivative(z);
                    }
                };
                if batch * n_in * n_out >= PAR_THRESHOLD {
                    next.par_chunks_exact_mut(n_in).enumerate().for_each(kernel);
                } else {
                    next.chunks_exact_mut(n_in).enumerate().for_each(kernel);
                }
                delta = next;
            }
            grads.push(LayerGradient { weights: dw, biases: db });
        }
        grads.reverse();
        grads
    }
}

/// Mean squared error over all `batch x width` entries and its gradient.
pub fn mse_with_gradient(output: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    let count = output.len() as f64;
    let mut loss = 0.0;
    let grad = output
        .iter()
        .zip(target)
        .map(|(o, t)| {
            let r = o - t;
            loss += r * r;
            2.0 * r / count
        })
        .collect();
    (loss / count, grad)
}

/// One SGD update with classical momentum:
/// `v <- momentum * v + g`, then `w <- w - lr * v`.
///
/// With `momentum = 0` this is the plain `w <- w - lr * g` step.
pub fn sgd_step(
    weights: &mut [f64],
    gradients: &[f64],
    velocity: &mut [f64],
    lr: f64,
    momentum: f64,
) -> Result<()> {
    if weights.len() != gradients.len() || weights.len() != velocity.len() {
        return Err(SscError::DimensionMismatch(format!(
            "{} weights, {} gradients, {} velocity entries",
            weights.len(),
            gradients.len(),
            velocity.len()
        )));
    }
    if let Some(g) = gradients.iter().find(|g| !g.is_finite()) {
        return Err(SscError::NonFinite(format!("gradient entry {g}")));
    }
    for ((w, &g), v) in weights.iter_mut().zip(gradients).zip(velocity.iter_mut()) {
        *v = momentum * *v + g;
        *w -= lr * *v;
    }
    Ok(())
}

/// Momentum SGD state for a whole [`Mlp`].
#[derive(Debug, Clone)]
pub struct Sgd {
    momentum: f64,
    velocity: Vec<LayerGradient>,
}

impl Sgd {
    pub fn new(net: &Mlp, momentum: f64) -> Self {
        let velocity = net
            .layers
            .iter()
            .map(|l| LayerGradient {
                weights: vec![0.0; l.weights.len()],
                biases: vec![0.0; l.biases.len()],
            })
            .collect();
        Self { momentum, velocity }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &[LayerGradient], lr: f64) -> Result<()> {
        if grads.len() != net.layers.len() {
            return Err(SscError::DimensionMismatch("gradient layer count".into()));
        }
        for ((layer, g), v) in net.layers.iter_mut().zip(grads).zip(&mut self.velocity) {
            sgd_step(&mut layer.weights, &g.weights, &mut v.weights, lr, self.momentum)?;
            sgd_step(&mut layer.biases, &g.biases, &mut v.biases, lr, self.momentum)?;
        }
        Ok(())
    }
}
