//! Fully connected Q-network with ReLU hidden layers and a linear output,
//! trained by hand-written backpropagation.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `[out * inputs + in]`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Layer>,
}

/// Parameter-shaped buffer holding a gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &QNetwork) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| Layer::zeros(l.inputs, l.outputs))
                .collect(),
        }
    }

    pub fn clear(&mut self) {
        for l in &mut self.layers {
            l.weights.fill(0.0);
            l.biases.fill(0.0);
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|w| *w *= factor);
            l.biases.iter_mut().for_each(|b| *b *= factor);
        }
    }
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(&l.weights);
        out.extend_from_slice(&l.biases);
    }
    out
}

/// Per-layer activations kept for a backward pass.
#[derive(Debug, Clone, Default)]
pub struct Activations {
    /// `values[0]` is the input; `values[i + 1]` the output of layer `i`
    /// (post-ReLU for hidden layers).
    pub values: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl QNetwork {
    /// All-zero network with the given layer sizes (input first, output last).
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidConfig(format!(
                "layer sizes {sizes:?} need at least input and output, all non-zero"
            )));
        }
        Ok(Self {
            layers: sizes
                .windows(2)
                .map(|w| Layer::zeros(w[0], w[1]))
                .collect(),
        })
    }

    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        for l in &mut net.layers {
            let bound = 1.0 / (l.inputs as f64).sqrt();
            for w in &mut l.weights {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(Error::DimensionMismatch {
                    expected: w[0].outputs,
                    got: w[1].inputs,
                });
            }
        }
        for l in &layers {
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(Error::DimensionMismatch {
                    expected: l.inputs * l.outputs,
                    got: l.weights.len(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").outputs
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                got: params.len(),
            });
        }
        let mut i = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[i..i + nw]);
            i += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[i..i + nb]);
            i += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    fn check_input(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: state.len(),
            });
        }
        Ok(())
    }

    /// Q-values for every action.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>> {
        let mut acts = Activations::default();
        self.forward_cached(state, &mut acts)?;
        Ok(acts.values.pop().unwrap_or_default())
    }

    /// Forward pass keeping every layer's output in `acts` (buffers are reused).
    pub fn forward_cached(&self, state: &[f64], acts: &mut Activations) -> Result<()> {
        self.check_input(state)?;
        let n = self.layers.len();
        acts.values.resize_with(n + 1, Vec::new);
        acts.values[0].clear();
        acts.values[0].extend_from_slice(state);
        for (i, layer) in self.layers.iter().enumerate() {
            let (head, tail) = acts.values.split_at_mut(i + 1);
            let input = &head[i];
            let out = &mut tail[0];
            out.clear();
            out.reserve(layer.outputs);
            let hidden = i + 1 < n;
            for o in 0..layer.outputs {
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                let z = dot(row, input) + layer.biases[o];
                out.push(if hidden { z.max(0.0) } else { z });
            }
        }
        Ok(())
    }

    /// Adds `d output / d params · out_grad` for one cached forward pass into `grads`.
    /// `scratch` holds the running delta vectors.
    pub fn backward(
        &self,
        acts: &Activations,
        out_grad: &[f64],
        grads: &mut Gradients,
        scratch: &mut (Vec<f64>, Vec<f64>),
    ) {
        let (delta, prev) = scratch;
        delta.clear();
        delta.extend_from_slice(out_grad);
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let input = &acts.values[i];
            let g = &mut grads.layers[i];
            prev.clear();
            prev.resize(layer.inputs, 0.0);
            for o in 0..layer.outputs {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                g.biases[o] += d;
                axpy(
                    d,
                    input,
                    &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs],
                );
                if i > 0 {
                    axpy(
                        d,
                        &layer.weights[o * layer.inputs..(o + 1) * layer.inputs],
                        prev,
                    );
                }
            }
            if i > 0 {
                // ReLU derivative of the layer below, read from its output.
                for (p, &a) in prev.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                std::mem::swap(delta, prev);
            }
        }
    }

    /// `θ ← θ − β·∇`.
    pub fn sgd_step(&mut self, grads: &Gradients, beta: f64) -> Result<()> {
        if grads.layers.len() != self.layers.len() {
            return Err(Error::ArchitectureMismatch(
                self.layer_sizes(),
                grads.layers.iter().map(|l| l.outputs).collect(),
            ));
        }
        if beta == 0.0 {
            return Ok(());
        }
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            if l.weights.len() != g.weights.len() || l.biases.len() != g.biases.len() {
                return Err(Error::DimensionMismatch {
                    expected: l.weights.len(),
                    got: g.weights.len(),
                });
            }
            axpy(-beta, &g.weights, &mut l.weights);
            axpy(-beta, &g.biases, &mut l.biases);
        }
        Ok(())
    }
}
