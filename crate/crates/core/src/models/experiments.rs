//! The Swiss-roll classification sweep and the planar vector-field
//! regression experiment.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classifier::{evaluate_classifier, train_classifier, InvariantMode, MlpConfig};
use super::mlp::{Optimizer, TrainConfig};
use super::regressor::{evaluate_regressor, train_vector_regressor, VectorModelConfig, VectorModelKind, ANGLE_SECTORS};
use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::generators::{swiss_rolls, vector_field, VectorFieldKind};
use crate::group::{build_group, GroupDescriptor, DEFAULT_TOL};
use crate::rng::{self, streams};
use crate::symmetry::classification_bounds;

/// Random train/test split. With `stratify`, each label is split separately
/// so class proportions carry over to both parts.
pub fn train_test_split(ds: &WeightedDataset, test_fraction: f64, seed: u64, stratify: bool) -> Result<(WeightedDataset, WeightedDataset)> {
    if !(0.0 < test_fraction && test_fraction < 1.0) {
        return Err(Error::invalid(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut rng = rng::stream(seed, streams::SPLIT);
    let groups: Vec<Vec<usize>> = match (stratify, &ds.labels) {
        (true, Some(labels)) => {
            let mut g = vec![Vec::new(); ds.num_classes()];
            for (i, &l) in labels.iter().enumerate() {
                g[l].push(i);
            }
            g
        }
        _ => vec![(0..ds.len()).collect()],
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut g in groups {
        g.shuffle(&mut rng);
        let n_test = (test_fraction * g.len() as f64).round() as usize;
        test.extend_from_slice(&g[..n_test]);
        train.extend_from_slice(&g[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if train.is_empty() || test.is_empty() {
        return Err(Error::Empty("split left one side empty".into()));
    }
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}

// ─── Swiss rolls ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwissConfig {
    pub n_per_arm: usize,
    pub n_bins: usize,
    pub test_fraction: f64,
    /// Network for the z-invariant model; its `invariant_mode` must not be `None`.
    pub invariant: MlpConfig,
    pub unconstrained: MlpConfig,
}

impl Default for SwissConfig {
    fn default() -> Self {
        let train = TrainConfig { learning_rate: 0.01, epochs: 300, batch_size: 32, optimizer: Optimizer::adam(), ..Default::default() };
        let net = MlpConfig { hidden: vec![64, 64], train, ..Default::default() };
        SwissConfig {
            n_per_arm: 150,
            n_bins: 10,
            test_fraction: 0.2,
            invariant: MlpConfig { invariant_mode: InvariantMode::DropZ, ..net.clone() },
            unconstrained: net,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwissRow {
    pub ratio: f64,
    pub seed: u64,
    pub model: String,
    pub acc: f64,
    pub ece: f64,
    /// Accuracy bounds on the full dataset: `1 − upper error`, `1 − lower error`
    /// for the invariant model, the trivial `[0, 1]` otherwise.
    pub lb: f64,
    pub ub: f64,
}

fn swiss_run(ratio: f64, seed: u64, cfg: &SwissConfig) -> Result<[SwissRow; 2]> {
    let ds = swiss_rolls(ratio, cfg.n_per_arm, seed)?;
    let (train, test) = train_test_split(&ds, cfg.test_fraction, seed, true)?;
    let bounds = classification_bounds(&ds, &build_group(GroupDescriptor::ZSwap)?, DEFAULT_TOL)?;
    let mut rows = Vec::with_capacity(2);
    for (name, net) in [("invariant", &cfg.invariant), ("unconstrained", &cfg.unconstrained)] {
        let mut net = net.clone();
        net.train.seed = seed;
        let model = train_classifier(&train, &net)?;
        let eval = evaluate_classifier(&model, &test, cfg.n_bins)?;
        let (lb, ub) = match net.invariant_mode {
            InvariantMode::None => (0.0, 1.0),
            _ => (1.0 - bounds.upper, 1.0 - bounds.lower),
        };
        rows.push(SwissRow { ratio, seed, model: name.into(), acc: eval.accuracy, ece: eval.ece, lb, ub });
    }
    let unconstrained = rows.pop().unwrap();
    Ok([rows.pop().unwrap(), unconstrained])
}

/// Trains both classifiers for every `(ratio, seed)` pair. Runs in parallel;
/// rows come back ordered by ratio, seed, then model.
pub fn run_swissroll_sweep(ratios: &[f64], seeds: &[u64], cfg: &SwissConfig) -> Result<Vec<SwissRow>> {
    if let Some(r) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::invalid(format!("ratio {r} outside [0, 1]")));
    }
    if cfg.invariant.invariant_mode == InvariantMode::None {
        return Err(Error::invalid("the invariant model needs an invariant mode"));
    }
    let jobs: Vec<(f64, u64)> = ratios.iter().flat_map(|&r| seeds.iter().map(move |&s| (r, s))).collect();
    let rows: Vec<[SwissRow; 2]> = jobs.par_iter().map(|&(r, s)| swiss_run(r, s, cfg)).collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwissSummary {
    pub ratio: f64,
    pub model: String,
    pub acc: f64,
    pub ece: f64,
}

/// Seed-averaged accuracy and ECE per ratio and model, in sweep order.
pub fn summarize_sweep(rows: &[SwissRow]) -> Vec<SwissSummary> {
    let mut out: Vec<(SwissSummary, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(s, _)| s.ratio == r.ratio && s.model == r.model) {
            Some((s, n)) => {
                s.acc += r.acc;
                s.ece += r.ece;
                *n += 1;
            }
            None => out.push((SwissSummary { ratio: r.ratio, model: r.model.clone(), acc: r.acc, ece: r.ece }, 1)),
        }
    }
    out.into_iter()
        .map(|(mut s, n)| {
            s.acc /= n as f64;
            s.ece /= n as f64;
            s
        })
        .collect()
}

// ─── vector fields ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldConfig {
    pub n: usize,
    pub radius: f64,
    pub test_fraction: f64,
    pub model: VectorModelConfig,
}

impl Default for VectorFieldConfig {
    fn default() -> Self {
        VectorFieldConfig {
            n: 1000,
            radius: 2.0,
            test_fraction: 0.2,
            model: VectorModelConfig {
                train: TrainConfig { learning_rate: 0.003, epochs: 80, batch_size: 32, optimizer: Optimizer::adam(), ..Default::default() },
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorFieldRow {
    pub seed: u64,
    pub model: VectorModelKind,
    pub mse: f64,
    pub beta_nll: f64,
    pub bleed: f64,
    pub gence: Option<f64>,
    /// Mean norm of the predicted mean vectors on the test split.
    pub mean_norm: f64,
    /// Weighted mean `‖f(x)‖²` of the test targets.
    pub target_second_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSummaryRow {
    pub model: VectorModelKind,
    pub sector: usize,
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub mse: f64,
    pub beta_nll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorFieldReport {
    pub kind: VectorFieldKind,
    pub rows: Vec<VectorFieldRow>,
    /// Per-sector losses averaged over seeds; `ANGLE_SECTORS` rows per model.
    pub per_angle: Vec<AngleSummaryRow>,
}

impl VectorFieldReport {
    /// Seed average of `field` for one model.
    pub fn mean_of(&self, model: VectorModelKind, field: impl Fn(&VectorFieldRow) -> f64) -> f64 {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.model == model).map(field).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    }
}

const MODELS: [VectorModelKind; 2] = [VectorModelKind::Unconstrained, VectorModelKind::RadialEquivariant];

fn vector_run(kind: VectorFieldKind, seed: u64, cfg: &VectorFieldConfig) -> Result<Vec<(VectorFieldRow, Vec<super::regressor::AngleRow>)>> {
    let ds = vector_field(kind, cfg.n, cfg.radius, seed)?;
    let (train, test) = train_test_split(&ds, cfg.test_fraction, seed, false)?;
    let targets = test.targets()?;
    let second_moment: f64 = targets.iter().zip(&test.weights).map(|(t, w)| w * (t[0] * t[0] + t[1] * t[1])).sum();
    MODELS
        .iter()
        .map(|&m| {
            let mut mc = cfg.model.clone();
            mc.train.seed = seed;
            let model = train_vector_regressor(&train, m, &mc)?;
            let eval = evaluate_regressor(&model, &test, mc.beta_exp)?;
            let mean_norm = test
                .points
                .iter()
                .zip(&test.weights)
                .map(|(x, w)| {
                    let p = model.predict(x);
                    w * p.mean[0].hypot(p.mean[1])
                })
                .sum();
            let row = VectorFieldRow {
                seed,
                model: m,
                mse: eval.mse,
                beta_nll: eval.beta_nll,
                bleed: eval.bleed,
                gence: eval.gence,
                mean_norm,
                target_second_moment: second_moment,
            };
            Ok((row, eval.per_angle))
        })
        .collect()
}

/// Trains both regressors on every seed and evaluates them on held-out data.
pub fn run_vectorfield_experiment(kind: VectorFieldKind, seeds: &[u64], cfg: &VectorFieldConfig) -> Result<VectorFieldReport> {
    if seeds.is_empty() {
        return Err(Error::Empty("no seeds".into()));
    }
    let runs: Vec<_> = seeds.par_iter().map(|&s| vector_run(kind, s, cfg)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut per_angle = Vec::new();
    for (mi, &m) in MODELS.iter().enumerate() {
        for k in 0..ANGLE_SECTORS {
            let cells: Vec<&super::regressor::AngleRow> = runs.iter().map(|r| &r[mi].1[k]).collect();
            let n = cells.len() as f64;
            per_angle.push(AngleSummaryRow {
                model: m,
                sector: k,
                angle_lo: cells[0].angle_lo,
                angle_hi: cells[0].angle_hi,
                mse: cells.iter().map(|c| c.mse).sum::<f64>() / n,
                beta_nll: cells.iter().map(|c| c.beta_nll).sum::<f64>() / n,
            });
        }
    }
    for run in runs {
        rows.extend(run.into_iter().map(|(r, _)| r));
    }
    Ok(VectorFieldReport { kind, rows, per_angle })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_split_keeps_proportions() {
        let ds = swiss_rolls(1.0, 50, 1).unwrap();
        let (train, test) = train_test_split(&ds, 0.2, 3, true).unwrap();
        assert_eq!(train.len() + test.len(), ds.len());
        assert_eq!(test.len(), 40);
        let ones = test.labels().unwrap().iter().filter(|&&l| l == 1).count();
        assert_eq!(ones, 20);
        assert_eq!(train_test_split(&ds, 0.2, 3, true).unwrap(), (train, test));
    }

    #[test]
    fn small_sweep_is_ordered_and_bounded() {
        let mut cfg = SwissConfig { n_per_arm: 20, ..Default::default() };
        cfg.invariant.train.epochs = 3;
        cfg.unconstrained.train.epochs = 3;
        let rows = run_swissroll_sweep(&[0.0, 1.0], &[1, 2], &cfg).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!((rows[0].ratio, rows[0].seed, rows[0].model.as_str()), (0.0, 1, "invariant"));
        assert_eq!(rows[1].model, "unconstrained");
        assert_eq!((rows[7].ratio, rows[7].seed), (1.0, 2));
        // all pairs mixed at ratio 0
        assert!((rows[0].ub - 0.5).abs() < 1e-12);
        assert_eq!(rows[6].ub, 1.0);
        assert!(run_swissroll_sweep(&[1.5], &[1], &cfg).is_err());
    }

    #[test]
    fn vector_report_shape() {
        let mut cfg = VectorFieldConfig { n: 60, ..Default::default() };
        cfg.model.train.epochs = 2;
        let rep = run_vectorfield_experiment(VectorFieldKind::Spiral, &[1, 2], &cfg).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert_eq!(rep.per_angle.len(), 2 * ANGLE_SECTORS);
        assert_eq!(rep, run_vectorfield_experiment(VectorFieldKind::Spiral, &[1, 2], &cfg).unwrap());
    }
}
