//! Dense feed-forward networks with hand-written backpropagation, and a
//! seeded mini-batch trainer.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation value.
    fn slope(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// A stack of affine layers with a shared hidden activation and a linear
/// output layer. Parameters live in one flat vector, layer by layer, each
/// layer as its row-major weight matrix followed by its bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    activation: Activation,
    pub params: Vec<f64>,
}

impl Mlp {
    /// `sizes` lists input width, hidden widths and output width.
    pub fn new(sizes: &[usize], activation: Activation, seed: u64, stream: u64) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid(format!("bad layer sizes {sizes:?}")));
        }
        let mut rng = rng::stream(seed, stream);
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let scale = match activation {
                Activation::Relu => (2.0 / fan_in as f64).sqrt(),
                Activation::Tanh => (1.0 / fan_in as f64).sqrt(),
            };
            let normal = Normal::new(0.0, scale).expect("positive scale");
            params.extend((0..fan_in * fan_out).map(|_| normal.sample(&mut rng)));
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Ok(Mlp { sizes: sizes.to_vec(), activation, params })
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn layer_offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut off = 0;
        self.sizes.windows(2).map(move |w| {
            let start = off;
            off += w[0] * w[1] + w[1];
            (start, w[0], w[1])
        })
    }

    /// Sets the output-layer bias of unit `k`, and scales that unit's
    /// incoming weights by `weight_scale`.
    pub fn set_output_unit(&mut self, k: usize, bias: f64, weight_scale: f64) {
        let (start, fan_in, fan_out) = self.layer_offsets().last().unwrap();
        for i in 0..fan_in {
            self.params[start + k * fan_in + i] *= weight_scale;
        }
        self.params[start + fan_in * fan_out + k] = bias;
    }

    /// Activations of every layer, input first and (linear) output last.
    pub fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        debug_assert_eq!(x.len(), self.input_dim());
        let n_layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(n_layers + 1);
        acts.push(x.to_vec());
        for (l, (start, fan_in, fan_out)) in self.layer_offsets().enumerate() {
            let prev = &acts[l];
            let w = &self.params[start..start + fan_in * fan_out];
            let b = &self.params[start + fan_in * fan_out..start + fan_in * fan_out + fan_out];
            let last = l + 1 == n_layers;
            let out: Vec<f64> = (0..fan_out)
                .map(|j| {
                    let row = &w[j * fan_in..(j + 1) * fan_in];
                    let z = b[j] + row.iter().zip(prev).map(|(a, c)| a * c).sum::<f64>();
                    if last {
                        z
                    } else {
                        self.activation.apply(z)
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.trace(x).pop().unwrap()
    }

    /// Accumulates `∂loss/∂params` into `grad` given `∂loss/∂output`, and
    /// returns `∂loss/∂input`.
    pub fn backward(&self, trace: &[Vec<f64>], grad_out: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let layers: Vec<(usize, usize, usize)> = self.layer_offsets().collect();
        let mut delta = grad_out.to_vec();
        for (l, &(start, fan_in, fan_out)) in layers.iter().enumerate().rev() {
            let prev = &trace[l];
            let wlen = fan_in * fan_out;
            for j in 0..fan_out {
                let d = delta[j];
                if d == 0.0 {
                    continue;
                }
                let g = &mut grad[start + j * fan_in..start + (j + 1) * fan_in];
                for (gi, p) in g.iter_mut().zip(prev) {
                    *gi += d * p;
                }
                grad[start + wlen + j] += d;
            }
            let w = &self.params[start..start + wlen];
            let mut back = vec![0.0; fan_in];
            for j in 0..fan_out {
                let d = delta[j];
                if d == 0.0 {
                    continue;
                }
                for (bi, wi) in back.iter_mut().zip(&w[j * fan_in..(j + 1) * fan_in]) {
                    *bi += d * wi;
                }
            }
            if l > 0 {
                for (bi, a) in back.iter_mut().zip(prev) {
                    *bi *= self.activation.slope(*a);
                }
            }
            delta = back;
        }
        delta
    }
}

// ─── optimization ────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Momentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Momentum { momentum: 0.9 }
    }
}

/// Settings shared by every trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: Optimizer,
    /// Global gradient-norm clip.
    pub clip: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { seed: 0, learning_rate: 0.01, epochs: 100, batch_size: 32, optimizer: Optimizer::default(), clip: 10.0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.batch_size == 0 || !(self.clip > 0.0) {
            return Err(Error::invalid("training needs learning_rate > 0, batch_size >= 1 and clip > 0"));
        }
        Ok(())
    }
}

struct OptState {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    t: i32,
}

/// Mini-batch training of a set of networks over `n` samples. `batch_loss`
/// returns the mean batch loss and accumulates its gradient (one buffer per
/// network). Returns the mean loss of every epoch.
pub fn fit<F>(nets: &mut [Mlp], n: usize, cfg: &TrainConfig, mut batch_loss: F) -> Result<Vec<f64>>
where
    F: FnMut(&[Mlp], &[usize], &mut [Vec<f64>]) -> f64,
{
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Empty("no training samples".into()));
    }
    let mut rng = rng::stream(cfg.seed, streams::BATCHES);
    let zeros = |nets: &[Mlp]| nets.iter().map(|m| vec![0.0; m.n_params()]).collect::<Vec<_>>();
    let mut state = OptState { first: zeros(nets), second: zeros(nets), t: 0 };
    let mut grads = zeros(nets);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.iter_mut().for_each(|g| g.fill(0.0));
            let loss = batch_loss(nets, batch, &mut grads);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            total += loss * batch.len() as f64;
            step(nets, &mut grads, &mut state, cfg);
        }
        history.push(total / n as f64);
    }
    Ok(history)
}

fn step(nets: &mut [Mlp], grads: &mut [Vec<f64>], state: &mut OptState, cfg: &TrainConfig) {
    let norm: f64 = grads.iter().flatten().map(|g| g * g).sum::<f64>().sqrt();
    let scale = if norm > cfg.clip { cfg.clip / norm } else { 1.0 };
    state.t += 1;
    let lr = cfg.learning_rate;
    for (k, net) in nets.iter_mut().enumerate() {
        let g = &grads[k];
        match cfg.optimizer {
            Optimizer::Momentum { momentum } => {
                for ((p, v), gi) in net.params.iter_mut().zip(state.first[k].iter_mut()).zip(g) {
                    *v = momentum * *v + scale * gi;
                    *p -= lr * *v;
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(state.t);
                let c2 = 1.0 - beta2.powi(state.t);
                for (((p, m), v), gi) in net
                    .params
                    .iter_mut()
                    .zip(state.first[k].iter_mut())
                    .zip(state.second[k].iter_mut())
                    .zip(g)
                {
                    let gs = scale * gi;
                    *m = beta1 * *m + (1.0 - beta1) * gs;
                    *v = beta2 * *v + (1.0 - beta2) * gs * gs;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                }
            }
        }
    }
}
