//! Softmax classifiers, optionally invariant under the z-swap `z -> 1 - z`.

use serde::{Deserialize, Serialize};

use super::mlp::{fit, Activation, Mlp, TrainConfig};
use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::metrics::{accuracy, ece_binned, BinRow, ClassifierOutput};
use crate::rng::streams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantMode {
    /// No symmetry constraint.
    None,
    /// Ignore the last coordinate, which makes the model exactly z-swap invariant.
    DropZ,
    /// Average logits over the input and its z-swapped copy.
    OrbitAverage,
}

impl std::str::FromStr for InvariantMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(InvariantMode::None),
            "drop-z" => Ok(InvariantMode::DropZ),
            "orbit-average" => Ok(InvariantMode::OrbitAverage),
            _ => Err(Error::invalid(format!("unknown invariant mode `{s}` (none|drop-z|orbit-average)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub invariant_mode: InvariantMode,
    pub train: TrainConfig,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![64, 64],
            activation: Activation::Relu,
            invariant_mode: InvariantMode::None,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub net: Mlp,
    pub mode: InvariantMode,
    pub n_classes: usize,
}

fn z_swapped(x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    if let Some(z) = y.last_mut() {
        *z = 1.0 - *z;
    }
    y
}

/// Network inputs for one sample: one view, or two for orbit averaging.
fn views(x: &[f64], mode: InvariantMode) -> Vec<Vec<f64>> {
    match mode {
        InvariantMode::None => vec![x.to_vec()],
        InvariantMode::DropZ => vec![x[..x.len() - 1].to_vec()],
        InvariantMode::OrbitAverage => vec![x.to_vec(), z_swapped(x)],
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl Classifier {
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let vs = views(x, self.mode);
        let k = vs.len() as f64;
        let mut out = vec![0.0; self.n_classes];
        for v in &vs {
            for (o, l) in out.iter_mut().zip(self.net.forward(v)) {
                *o += l / k;
            }
        }
        out
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    /// Arg-max label (lowest index on ties) and its softmax probability.
    pub fn predict(&self, x: &[f64]) -> ClassifierOutput {
        let p = self.probabilities(x);
        let (label, confidence) = p
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        ClassifierOutput { label, confidence: confidence.clamp(0.0, 1.0) }
    }
}

/// Trains a softmax classifier by weighted cross-entropy on all of `ds`.
pub fn train_classifier(ds: &WeightedDataset, cfg: &MlpConfig) -> Result<Classifier> {
    let labels = ds.labels()?;
    let n_classes = ds.num_classes().max(2);
    let dim = ds.points.first().map_or(0, Vec::len);
    let in_dim = match cfg.invariant_mode {
        InvariantMode::DropZ => dim.checked_sub(1).filter(|d| *d > 0).ok_or_else(|| Error::invalid("drop-z needs at least two coordinates"))?,
        _ => dim,
    };
    let mut sizes = vec![in_dim];
    sizes.extend(&cfg.hidden);
    sizes.push(n_classes);
    let net = Mlp::new(&sizes, cfg.activation, cfg.train.seed, streams::INIT)?;
    let mode = cfg.invariant_mode;
    let inputs: Vec<Vec<Vec<f64>>> = ds.points.iter().map(|x| views(x, mode)).collect();
    let mut nets = vec![net];
    fit(&mut nets, ds.len(), &cfg.train, |nets, batch, grads| {
        let net = &nets[0];
        let mass: f64 = batch.iter().map(|&i| ds.weights[i]).sum();
        let mut loss = 0.0;
        for &i in batch {
            let w = ds.weights[i] / mass;
            let vs = &inputs[i];
            let k = vs.len() as f64;
            let traces: Vec<Vec<Vec<f64>>> = vs.iter().map(|v| net.trace(v)).collect();
            let mut logits = vec![0.0; n_classes];
            for t in &traces {
                for (o, l) in logits.iter_mut().zip(t.last().unwrap()) {
                    *o += l / k;
                }
            }
            let p = softmax(&logits);
            loss -= w * p[labels[i]].max(1e-300).ln();
            let mut g: Vec<f64> = p.iter().map(|v| w * v / k).collect();
            g[labels[i]] -= w / k;
            for t in &traces {
                net.backward(t, &g, &mut grads[0]);
            }
        }
        loss
    })?;
    Ok(Classifier { net: nets.pop().unwrap(), mode, n_classes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierEval {
    pub accuracy: f64,
    pub ece: f64,
    pub bins: Vec<BinRow>,
}

/// Weighted accuracy and binned ECE of `model` on `ds`.
pub fn evaluate_classifier(model: &Classifier, ds: &WeightedDataset, n_bins: usize) -> Result<ClassifierEval> {
    let labels = ds.labels()?;
    let outputs: Vec<ClassifierOutput> = ds.points.iter().map(|x| model.predict(x)).collect();
    let rep = ece_binned(&outputs, labels, &ds.weights, n_bins)?;
    Ok(ClassifierEval { accuracy: accuracy(&outputs, labels, &ds.weights), ece: rep.ece, bins: rep.bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{uniform_weights, PointKind};
    use crate::models::mlp::Optimizer;

    #[test]
    fn xor_is_learned() {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for &(a, b) in &[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            for _ in 0..4 {
                pts.push(vec![a, b]);
                labels.push(usize::from(a != b));
            }
        }
        let ds = WeightedDataset::new(PointKind::Vector { dim: 2 }, pts, Some(labels), None, uniform_weights(16)).unwrap();
        let cfg = MlpConfig {
            hidden: vec![8, 8],
            activation: Activation::Tanh,
            invariant_mode: InvariantMode::None,
            train: TrainConfig { seed: 1, learning_rate: 0.01, epochs: 400, batch_size: 4, optimizer: Optimizer::adam(), clip: 10.0 },
        };
        let m = train_classifier(&ds, &cfg).unwrap();
        let e = evaluate_classifier(&m, &ds, 10).unwrap();
        assert_eq!(e.accuracy, 1.0);
        assert!(e.ece < 0.05);
    }

    #[test]
    fn invariant_modes_are_exactly_invariant() {
        let ds = crate::generators::swiss_rolls(0.5, 10, 2).unwrap();
        for mode in [InvariantMode::DropZ, InvariantMode::OrbitAverage] {
            let cfg = MlpConfig {
                hidden: vec![6],
                invariant_mode: mode,
                train: TrainConfig { epochs: 2, ..Default::default() },
                ..Default::default()
            };
            let m = train_classifier(&ds, &cfg).unwrap();
            for x in &ds.points {
                let a = m.predict(x);
                let b = m.predict(&z_swapped(x));
                assert_eq!(a.label, b.label);
                assert_eq!(a.confidence.to_bits(), b.confidence.to_bits());
            }
        }
    }
}
