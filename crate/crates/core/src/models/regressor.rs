//! Gaussian regressors for planar vector fields: an unconstrained pair of
//! networks, and a radial model that is exactly O(2)-equivariant.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mlp::{fit, Activation, Mlp, TrainConfig};
use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::evidential::{beta_nll, sigmoid, softplus};
use crate::metrics::{aleatoric_bleed, gence, regression_error, FiberMode, FiberPartition, RegressorOutput};
use crate::rng::streams;

/// Predicted variances are kept at or above this value.
pub const MIN_VARIANCE: f64 = 1e-10;

/// Angular sectors of the per-angle loss table.
pub const ANGLE_SECTORS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorModelKind {
    Unconstrained,
    RadialEquivariant,
}

impl FromStr for VectorModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unconstrained" => Ok(VectorModelKind::Unconstrained),
            "radial" | "radial_equivariant" | "radial-equivariant" => Ok(VectorModelKind::RadialEquivariant),
            _ => Err(Error::invalid(format!("unknown regressor `{s}` (unconstrained|radial)"))),
        }
    }
}

impl std::fmt::Display for VectorModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VectorModelKind::Unconstrained => "unconstrained",
            VectorModelKind::RadialEquivariant => "radial",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorModelConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    /// Exponent of the β-NLL weighting factor.
    pub beta_exp: f64,
    /// Variance predicted everywhere before training.
    pub var_init: f64,
    pub train: TrainConfig,
}

impl Default for VectorModelConfig {
    fn default() -> Self {
        VectorModelConfig {
            hidden: vec![32, 32],
            activation: Activation::Tanh,
            beta_exp: 1.0,
            var_init: 0.1,
            train: TrainConfig::default(),
        }
    }
}

/// Mean and variance networks. The unconstrained model maps `xy` to both
/// heads; the radial model predicts `g(‖x‖)·x` and an isotropic variance
/// `softplus(v(‖x‖))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRegressor {
    pub kind: VectorModelKind,
    pub mean_net: Mlp,
    pub var_net: Mlp,
}

fn planar(x: &[f64]) -> [f64; 2] {
    [x[0], x[1]]
}

fn inverse_softplus(v: f64) -> f64 {
    if v > 30.0 {
        v
    } else {
        v.exp_m1().ln()
    }
}

impl VectorRegressor {
    pub fn new(kind: VectorModelKind, cfg: &VectorModelConfig) -> Result<Self> {
        if !(cfg.var_init > 0.0) {
            return Err(Error::invalid("var_init must be positive"));
        }
        let (input, out) = match kind {
            VectorModelKind::Unconstrained => (2, 2),
            VectorModelKind::RadialEquivariant => (1, 1),
        };
        let sizes = |o: usize| {
            let mut s = vec![input];
            s.extend(&cfg.hidden);
            s.push(o);
            s
        };
        let mean_net = Mlp::new(&sizes(out), cfg.activation, cfg.train.seed, streams::INIT)?;
        let mut var_net = Mlp::new(&sizes(out), cfg.activation, cfg.train.seed, streams::INIT + 100)?;
        for k in 0..out {
            var_net.set_output_unit(k, inverse_softplus(cfg.var_init), 0.01);
        }
        Ok(VectorRegressor { kind, mean_net, var_net })
    }

    fn net_input(&self, xy: &[f64; 2]) -> Vec<f64> {
        match self.kind {
            VectorModelKind::Unconstrained => xy.to_vec(),
            VectorModelKind::RadialEquivariant => vec![xy[0].hypot(xy[1])],
        }
    }

    /// Planar Gaussian prediction at `x` (only the first two coordinates are read).
    pub fn predict(&self, x: &[f64]) -> RegressorOutput {
        let xy = planar(x);
        let input = self.net_input(&xy);
        let m = self.mean_net.forward(&input);
        let v = self.var_net.forward(&input);
        match self.kind {
            VectorModelKind::Unconstrained => RegressorOutput {
                mean: m,
                variance: v.iter().map(|r| softplus(*r).max(MIN_VARIANCE)).collect(),
            },
            VectorModelKind::RadialEquivariant => {
                let s = softplus(v[0]).max(MIN_VARIANCE);
                RegressorOutput { mean: vec![m[0] * xy[0], m[0] * xy[1]], variance: vec![s, s] }
            }
        }
    }
}

/// Per-sample loss `½·MSE + ½·β-NLL`, both averaged over the two output
/// coordinates, with gradients in the means and the variances.
fn sample_loss(out: &RegressorOutput, y: &[f64; 2], beta_exp: f64) -> Result<(f64, [f64; 2], [f64; 2])> {
    let mut loss = 0.0;
    let mut gm = [0.0; 2];
    let mut gs = [0.0; 2];
    for d in 0..2 {
        let r = out.mean[d] - y[d];
        let (b, db_m, db_s) = beta_nll(y[d], out.mean[d], out.variance[d], beta_exp)?;
        loss += 0.25 * r * r + 0.25 * b;
        gm[d] = 0.5 * r + 0.25 * db_m;
        gs[d] = 0.25 * db_s;
    }
    Ok((loss, gm, gs))
}

/// Precomputed training inputs for one dataset.
struct TrainData {
    xy: Vec<[f64; 2]>,
    ys: Vec<[f64; 2]>,
    inputs: Vec<Vec<f64>>,
}

impl TrainData {
    fn new(ds: &WeightedDataset, kind: VectorModelKind) -> Result<Self> {
        let xy: Vec<[f64; 2]> = ds.points.iter().map(|p| planar(p)).collect();
        let ys = ds.targets()?.iter().map(|t| planar(t)).collect();
        let inputs = xy
            .iter()
            .map(|p| match kind {
                VectorModelKind::Unconstrained => p.to_vec(),
                VectorModelKind::RadialEquivariant => vec![p[0].hypot(p[1])],
            })
            .collect();
        Ok(TrainData { xy, ys, inputs })
    }
}

/// Weighted batch loss; gradients in the mean and variance network
/// parameters are accumulated into `grads[0]` and `grads[1]`.
fn batch_loss(
    kind: VectorModelKind,
    nets: &[Mlp],
    data: &TrainData,
    weights: &[f64],
    batch: &[usize],
    beta_exp: f64,
    grads: &mut [Vec<f64>],
) -> Result<f64> {
    let mass: f64 = batch.iter().map(|&i| weights[i]).sum();
    let mut total = 0.0;
    for &i in batch {
        let w = weights[i] / mass;
        let xy = data.xy[i];
        let tm = nets[0].trace(&data.inputs[i]);
        let tv = nets[1].trace(&data.inputs[i]);
        let m = tm.last().unwrap();
        let v = tv.last().unwrap();
        let out = match kind {
            VectorModelKind::Unconstrained => {
                RegressorOutput { mean: m.clone(), variance: v.iter().map(|r| softplus(*r).max(MIN_VARIANCE)).collect() }
            }
            VectorModelKind::RadialEquivariant => {
                let s = softplus(v[0]).max(MIN_VARIANCE);
                RegressorOutput { mean: vec![m[0] * xy[0], m[0] * xy[1]], variance: vec![s, s] }
            }
        };
        let (loss, gm, gs) = sample_loss(&out, &data.ys[i], beta_exp)?;
        total += w * loss;
        match kind {
            VectorModelKind::Unconstrained => {
                nets[0].backward(&tm, &[w * gm[0], w * gm[1]], &mut grads[0]);
                let dv: Vec<f64> = (0..2).map(|d| w * gs[d] * sigmoid(v[d])).collect();
                nets[1].backward(&tv, &dv, &mut grads[1]);
            }
            VectorModelKind::RadialEquivariant => {
                let dg = w * (gm[0] * xy[0] + gm[1] * xy[1]);
                nets[0].backward(&tm, &[dg], &mut grads[0]);
                let dv = w * (gs[0] + gs[1]) * sigmoid(v[0]);
                nets[1].backward(&tv, &[dv], &mut grads[1]);
            }
        }
    }
    Ok(total)
}

/// Trains a planar regressor on `ds`, whose targets are read in their first
/// two coordinates.
pub fn train_vector_regressor(ds: &WeightedDataset, kind: VectorModelKind, cfg: &VectorModelConfig) -> Result<VectorRegressor> {
    let model = VectorRegressor::new(kind, cfg)?;
    let data = TrainData::new(ds, kind)?;
    let mut nets = vec![model.mean_net, model.var_net];
    let mut failure = None;
    let fitted = fit(&mut nets, ds.len(), &cfg.train, |nets, batch, grads| {
        batch_loss(kind, nets, &data, &ds.weights, batch, cfg.beta_exp, grads).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NAN
        })
    });
    if let Some(e) = failure {
        return Err(e);
    }
    fitted?;
    let var_net = nets.pop().unwrap();
    let mean_net = nets.pop().unwrap();
    Ok(VectorRegressor { kind, mean_net, var_net })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleRow {
    pub sector: usize,
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub count: usize,
    pub mse: f64,
    pub beta_nll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressorEval {
    /// Weighted mean of `‖mean − target‖²`.
    pub mse: f64,
    /// Weighted mean β-NLL, summed over the two coordinates.
    pub beta_nll: f64,
    /// GENCE over 10 quantile fibers of `‖s‖`; `None` if a fiber's variance underflows.
    pub gence: Option<f64>,
    /// Aleatoric bleed against a zero true aleatoric variance.
    pub bleed: f64,
    pub per_angle: Vec<AngleRow>,
}

pub fn angle_sector(x: &[f64]) -> usize {
    let a = x[1].atan2(x[0]) + PI;
    ((a / (2.0 * PI) * ANGLE_SECTORS as f64) as usize).min(ANGLE_SECTORS - 1)
}

pub fn evaluate_regressor(model: &VectorRegressor, ds: &WeightedDataset, beta_exp: f64) -> Result<RegressorEval> {
    let targets: Vec<Vec<f64>> = ds.targets()?.iter().map(|t| planar(t).to_vec()).collect();
    let outputs: Vec<RegressorOutput> = ds.points.iter().map(|x| model.predict(x)).collect();
    let means: Vec<Vec<f64>> = outputs.iter().map(|o| o.mean.clone()).collect();
    let vars: Vec<Vec<f64>> = outputs.iter().map(|o| o.variance.clone()).collect();
    let mse = regression_error(&means, &targets, &ds.weights, None)?;
    let nll: Vec<f64> = outputs
        .iter()
        .zip(&targets)
        .map(|(o, t)| (0..2).map(|d| beta_nll(t[d], o.mean[d], o.variance[d], beta_exp).map(|r| r.0)).sum::<Result<f64>>())
        .collect::<Result<_>>()?;
    let beta_nll_mean = nll.iter().zip(&ds.weights).map(|(l, w)| l * w).sum();
    let zeros = vec![vec![0.0; 2]; ds.len()];
    let bleed = aleatoric_bleed(&vars, &zeros, &ds.weights)?;
    let fibers = FiberPartition::from_vectors(&vars, &ds.weights, FiberMode::Quantile(10))?;
    let gence_value = match gence(&outputs, &targets, &ds.weights, &fibers) {
        Ok(r) => Some(r.value),
        Err(Error::VarianceUnderflow { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut per_angle: Vec<AngleRow> = (0..ANGLE_SECTORS)
        .map(|k| AngleRow {
            sector: k,
            angle_lo: -PI + 2.0 * PI * k as f64 / ANGLE_SECTORS as f64,
            angle_hi: -PI + 2.0 * PI * (k + 1) as f64 / ANGLE_SECTORS as f64,
            count: 0,
            mse: 0.0,
            beta_nll: 0.0,
        })
        .collect();
    let mut mass = [0.0; ANGLE_SECTORS];
    for i in 0..ds.len() {
        let k = angle_sector(&ds.points[i]);
        let w = ds.weights[i];
        mass[k] += w;
        per_angle[k].count += 1;
        per_angle[k].mse += w * crate::numeric::squared_distance(&means[i], &targets[i]);
        per_angle[k].beta_nll += w * nll[i];
    }
    for (row, m) in per_angle.iter_mut().zip(mass) {
        if m > 0.0 {
            row.mse /= m;
            row.beta_nll /= m;
        }
    }
    Ok(RegressorEval { mse, beta_nll: beta_nll_mean, gence: gence_value, bleed, per_angle })
}
