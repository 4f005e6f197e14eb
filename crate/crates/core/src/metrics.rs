//! Calibration metrics: binned ECE, GENCE and its squared variant, aleatoric
//! bleed and (fiber-restricted) regression error.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Variances at or below this value make GENCE diverge and are rejected.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Default number of equal-width ECE bins.
pub const DEFAULT_BINS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierOutput {
    pub label: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressorOutput {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::ShapeMismatch { expected: n, actual: weights.len() });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::WeightsNotNormalized(total));
    }
    Ok(())
}

// ─── fibers ──────────────────────────────────────────────────────────────────

/// How samples are grouped into fibers of the confidence or variance head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberMode {
    /// Identical values share a fiber.
    Exact,
    /// Values share a fiber when they fall in the same `eps`-wide cell.
    EpsilonBin(f64),
    /// `k` equal-count groups ordered by value (by norm for vectors).
    Quantile(usize),
}

impl FromStr for FiberMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad fiber mode `{s}` (exact|eps:<width>|quantile:<k>)"));
        if s == "exact" {
            return Ok(FiberMode::Exact);
        }
        let (name, arg) = s.split_once(':').ok_or_else(bad)?;
        match name {
            "eps" => {
                let e: f64 = arg.parse().map_err(|_| bad())?;
                if !(e > 0.0) {
                    return Err(bad());
                }
                Ok(FiberMode::EpsilonBin(e))
            }
            "quantile" => {
                let k: usize = arg.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                Ok(FiberMode::Quantile(k))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for FiberMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberMode::Exact => write!(f, "exact"),
            FiberMode::EpsilonBin(e) => write!(f, "eps:{e}"),
            FiberMode::Quantile(k) => write!(f, "quantile:{k}"),
        }
    }
}

/// A partition of sample indices into fibers, with per-fiber mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPartition {
    pub mode: Option<FiberMode>,
    pub groups: Vec<Vec<usize>>,
    pub masses: Vec<f64>,
}

impl FiberPartition {
    /// Fibers from explicit ids; ids need not be contiguous.
    pub fn from_assignment(assignment: &[usize], weights: &[f64]) -> Result<Self> {
        check_weights(weights, assignment.len())?;
        let mut by_id: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &id) in assignment.iter().enumerate() {
            by_id.entry(id).or_default().push(i);
        }
        Ok(Self::from_groups(by_id.into_values().collect(), weights, None))
    }

    fn from_groups(groups: Vec<Vec<usize>>, weights: &[f64], mode: Option<FiberMode>) -> Self {
        let masses = groups.iter().map(|g| g.iter().map(|&i| weights[i]).sum()).collect();
        FiberPartition { mode, groups, masses }
    }

    /// Fibers of a scalar head (confidences).
    pub fn from_scalars(values: &[f64], weights: &[f64], mode: FiberMode) -> Result<Self> {
        let vectors: Vec<Vec<f64>> = values.iter().map(|&v| vec![v]).collect();
        Self::from_vectors(&vectors, weights, mode)
    }

    /// Fibers of a vector head (predicted variances).
    pub fn from_vectors(values: &[Vec<f64>], weights: &[f64], mode: FiberMode) -> Result<Self> {
        check_weights(weights, values.len())?;
        if values.is_empty() {
            return Err(Error::Empty("no samples to partition".into()));
        }
        let groups = match mode {
            FiberMode::Exact => {
                let mut by_key: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
                for (i, v) in values.iter().enumerate() {
                    by_key.entry(v.iter().map(|x| x.to_bits()).collect()).or_default().push(i);
                }
                by_key.into_values().collect()
            }
            FiberMode::EpsilonBin(eps) => {
                let mut by_cell: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
                for (i, v) in values.iter().enumerate() {
                    let cell = v.iter().map(|x| (x / eps).floor() as i64).collect();
                    by_cell.entry(cell).or_default().push(i);
                }
                by_cell.into_values().collect()
            }
            FiberMode::Quantile(k) => {
                let norms: Vec<f64> = values.iter().map(|v| crate::numeric::squared_norm(v).sqrt()).collect();
                let mut order: Vec<usize> = (0..values.len()).collect();
                order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)));
                let n = order.len();
                let k = k.min(n);
                let mut groups = vec![Vec::new(); k];
                for (rank, &i) in order.iter().enumerate() {
                    groups[rank * k / n].push(i);
                }
                for g in groups.iter_mut() {
                    g.sort_unstable();
                }
                groups
            }
        };
        Ok(Self::from_groups(groups, weights, Some(mode)))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Checks that the groups partition `0..n` and carry all the mass.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for g in &self.groups {
            if g.is_empty() {
                return Err(Error::Empty("empty fiber".into()));
            }
            for &i in g {
                if i >= n || seen[i] {
                    return Err(Error::invalid("fibers do not partition the samples"));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("fibers do not cover every sample"));
        }
        let total: f64 = self.masses.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::WeightsNotNormalized(total));
        }
        Ok(())
    }

    /// Fiber-renormalized weights of the members of fiber `f`.
    pub fn local_weights(&self, f: usize, weights: &[f64]) -> Vec<f64> {
        let m = self.masses[f];
        self.groups[f].iter().map(|&i| weights[i] / m).collect()
    }
}

// ─── ECE ─────────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRow {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mass: f64,
    pub accuracy: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EceReport {
    pub ece: f64,
    pub bins: Vec<BinRow>,
}

/// Equal-width binned expected calibration error.
///
/// Each bin contributes its mass times `|accuracy - mean confidence|`, both
/// weighted; empty bins contribute nothing.
pub fn ece_binned(
    outputs: &[ClassifierOutput],
    truths: &[usize],
    weights: &[f64],
    n_bins: usize,
) -> Result<EceReport> {
    if n_bins == 0 {
        return Err(Error::invalid("n_bins must be at least 1"));
    }
    if truths.len() != outputs.len() {
        return Err(Error::ShapeMismatch { expected: outputs.len(), actual: truths.len() });
    }
    check_weights(weights, outputs.len())?;
    let mut mass = vec![0.0; n_bins];
    let mut correct = vec![0.0; n_bins];
    let mut conf = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    for ((o, &y), &w) in outputs.iter().zip(truths).zip(weights) {
        let p = o.confidence;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("confidence {p} outside [0, 1]")));
        }
        let b = ((p * n_bins as f64) as usize).min(n_bins - 1);
        mass[b] += w;
        conf[b] += w * p;
        count[b] += 1;
        if o.label == y {
            correct[b] += w;
        }
    }
    let mut bins = Vec::with_capacity(n_bins);
    let mut terms = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let (accuracy, confidence) = if mass[b] > 0.0 {
            (correct[b] / mass[b], conf[b] / mass[b])
        } else {
            (0.0, 0.0)
        };
        if mass[b] > 0.0 {
            terms.push(mass[b] * (accuracy - confidence).abs());
        }
        bins.push(BinRow {
            lower: b as f64 / n_bins as f64,
            upper: (b + 1) as f64 / n_bins as f64,
            count: count[b],
            mass: mass[b],
            accuracy,
            confidence,
        });
    }
    Ok(EceReport { ece: pairwise_sum(&terms), bins })
}

/// Weighted fraction of correct predictions.
pub fn accuracy(outputs: &[ClassifierOutput], truths: &[usize], weights: &[f64]) -> f64 {
    outputs
        .iter()
        .zip(truths)
        .zip(weights)
        .filter(|((o, y), _)| o.label == **y)
        .map(|(_, w)| w)
        .sum()
}

// ─── GENCE ───────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberRow {
    pub size: usize,
    pub mass: f64,
    /// Mass-weighted mean of the member variance vectors.
    pub variance: Vec<f64>,
    pub numerator: f64,
    pub denominator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenceReport {
    pub value: f64,
    pub fibers: Vec<FiberRow>,
}

#[derive(Clone, Copy)]
enum GenceForm {
    Abs,
    Squared,
}

fn check_regression_inputs(outputs: &[RegressorOutput], truths: &[Vec<f64>], weights: &[f64]) -> Result<()> {
    if truths.len() != outputs.len() {
        return Err(Error::ShapeMismatch { expected: outputs.len(), actual: truths.len() });
    }
    check_weights(weights, outputs.len())?;
    for (o, t) in outputs.iter().zip(truths) {
        if o.mean.len() != t.len() || o.variance.len() != t.len() {
            return Err(Error::ShapeMismatch { expected: t.len(), actual: o.mean.len() });
        }
        if let Some(&v) = o.variance.iter().find(|&&v| !(v > VARIANCE_FLOOR)) {
            return Err(Error::VarianceUnderflow { value: v, floor: VARIANCE_FLOOR });
        }
    }
    Ok(())
}

fn gence_impl(
    outputs: &[RegressorOutput],
    truths: &[Vec<f64>],
    weights: &[f64],
    fibers: &FiberPartition,
    form: GenceForm,
) -> Result<GenceReport> {
    check_regression_inputs(outputs, truths, weights)?;
    fibers.validate(outputs.len())?;
    let dim = truths.first().map_or(0, Vec::len);
    let mut rows = Vec::with_capacity(fibers.len());
    let mut terms = Vec::with_capacity(fibers.len());
    for (f, members) in fibers.groups.iter().enumerate() {
        let mass = fibers.masses[f];
        let local = fibers.local_weights(f, weights);
        let mut s = vec![0.0; dim];
        for (&i, &w) in members.iter().zip(&local) {
            for (acc, v) in s.iter_mut().zip(&outputs[i].variance) {
                *acc += w * v;
            }
        }
        if let Some(&v) = s.iter().find(|&&v| !(v > VARIANCE_FLOOR)) {
            return Err(Error::VarianceUnderflow { value: v, floor: VARIANCE_FLOOR });
        }
        let scale: Vec<f64> = match form {
            GenceForm::Abs => s.iter().map(|v| (2.0 * v / PI).sqrt()).collect(),
            GenceForm::Squared => s.clone(),
        };
        let denominator = crate::numeric::squared_norm(&scale);
        let per_sample: Vec<f64> = members
            .iter()
            .zip(&local)
            .map(|(&i, &w)| {
                let o = &outputs[i];
                let gap: f64 = (0..dim)
                    .map(|d| {
                        let r = o.mean[d] - truths[i][d];
                        let e = match form {
                            GenceForm::Abs => scale[d] - r.abs(),
                            GenceForm::Squared => scale[d] - r * r,
                        };
                        e * e
                    })
                    .sum();
                w * gap
            })
            .collect();
        let numerator = pairwise_sum(&per_sample);
        terms.push(mass * numerator / denominator);
        rows.push(FiberRow { size: members.len(), mass, variance: s, numerator, denominator });
    }
    Ok(GenceReport { value: pairwise_sum(&terms), fibers: rows })
}

/// Generalized expected normalized calibration error:
/// `Σ_fibers mass · E[‖√(2s/π) − |μ − f|‖²] / ‖√(2s/π)‖²`.
///
/// A perfectly calibrated Gaussian predictor scores `(π − 2)/2`, not 0.
pub fn gence(
    outputs: &[RegressorOutput],
    truths: &[Vec<f64>],
    weights: &[f64],
    fibers: &FiberPartition,
) -> Result<GenceReport> {
    gence_impl(outputs, truths, weights, fibers, GenceForm::Abs)
}

/// Squared variant: `Σ mass · E[‖s − (μ − f)²‖²] / ‖s‖²`. A calibrated
/// scalar Gaussian scores 2.
pub fn gence_sq(
    outputs: &[RegressorOutput],
    truths: &[Vec<f64>],
    weights: &[f64],
    fibers: &FiberPartition,
) -> Result<GenceReport> {
    gence_impl(outputs, truths, weights, fibers, GenceForm::Squared)
}

/// Per-fiber `(mass, err_reg(h, s), s)` triples for the GENCE upper bound.
pub fn fiber_regression_errors(
    outputs: &[RegressorOutput],
    truths: &[Vec<f64>],
    weights: &[f64],
    fibers: &FiberPartition,
) -> Result<Vec<(f64, f64, Vec<f64>)>> {
    check_regression_inputs(outputs, truths, weights)?;
    fibers.validate(outputs.len())?;
    let means: Vec<Vec<f64>> = outputs.iter().map(|o| o.mean.clone()).collect();
    let dim = truths.first().map_or(0, Vec::len);
    fibers
        .groups
        .iter()
        .enumerate()
        .map(|(f, members)| {
            let err = regression_error(&means, truths, weights, Some(members))?;
            let local = fibers.local_weights(f, weights);
            let mut s = vec![0.0; dim];
            for (&i, &w) in members.iter().zip(&local) {
                for (acc, v) in s.iter_mut().zip(&outputs[i].variance) {
                    *acc += w * v;
                }
            }
            Ok((fibers.masses[f], err, s))
        })
        .collect()
}

// ─── regression error and aleatoric bleed ────────────────────────────────────

/// Weighted mean squared Euclidean error, optionally restricted to `mask`
/// with the member weights renormalized.
pub fn regression_error(
    preds: &[Vec<f64>],
    truths: &[Vec<f64>],
    weights: &[f64],
    mask: Option<&[usize]>,
) -> Result<f64> {
    if preds.len() != truths.len() {
        return Err(Error::ShapeMismatch { expected: preds.len(), actual: truths.len() });
    }
    if weights.len() != preds.len() {
        return Err(Error::ShapeMismatch { expected: preds.len(), actual: weights.len() });
    }
    let all: Vec<usize>;
    let members: &[usize] = match mask {
        Some(m) => m,
        None => {
            all = (0..preds.len()).collect();
            &all
        }
    };
    if members.is_empty() {
        return Err(Error::Empty("regression error over an empty mask".into()));
    }
    let mass: f64 = members.iter().map(|&i| weights[i]).sum();
    if !(mass > 0.0) {
        return Err(Error::Empty("mask carries no mass".into()));
    }
    let mut terms = Vec::with_capacity(members.len());
    for &i in members {
        if preds[i].len() != truths[i].len() {
            return Err(Error::ShapeMismatch { expected: truths[i].len(), actual: preds[i].len() });
        }
        terms.push(weights[i] / mass * crate::numeric::squared_distance(&preds[i], &truths[i]));
    }
    Ok(pairwise_sum(&terms))
}

/// Regression error between predicted and true aleatoric variances.
pub fn aleatoric_bleed(pred: &[Vec<f64>], truth: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    if let Some(v) = pred.iter().flatten().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(format!("negative predicted variance {v}")));
    }
    regression_error(pred, truth, weights, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cls(label: usize, confidence: f64) -> ClassifierOutput {
        ClassifierOutput { label, confidence }
    }

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn ece_extremes() {
        let out = vec![cls(1, 1.0); 5];
        assert_eq!(ece_binned(&out, &[1; 5], &uniform(5), 100).unwrap().ece, 0.0);
        assert!((ece_binned(&out, &[0; 5], &uniform(5), 100).unwrap().ece - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ece_single_bin_hand_value() {
        let out = vec![cls(0, 0.8); 10];
        let truths = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        let r = ece_binned(&out, &truths, &uniform(10), 100).unwrap();
        assert!((r.ece - 0.2).abs() < 1e-12);
        let occupied: Vec<_> = r.bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(occupied.len(), 1);
        assert!((occupied[0].accuracy - 0.6).abs() < 1e-12);
    }

    #[test]
    fn ece_rejects_bad_confidence() {
        assert!(ece_binned(&[cls(0, 1.2)], &[0], &[1.0], 10).is_err());
        assert!(ece_binned(&[cls(0, 0.2)], &[0], &[1.0], 0).is_err());
    }

    #[test]
    fn gence_perfect_mean_is_one() {
        let outputs = vec![RegressorOutput { mean: vec![1.0, 2.0], variance: vec![0.3, 0.3] }; 4];
        let truths = vec![vec![1.0, 2.0]; 4];
        let w = uniform(4);
        let fibers = FiberPartition::from_assignment(&[0; 4], &w).unwrap();
        assert!((gence(&outputs, &truths, &w, &fibers).unwrap().value - 1.0).abs() < 1e-12);
        assert!((gence_sq(&outputs, &truths, &w, &fibers).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gence_sq_zero_when_residuals_match_variance() {
        let outputs = vec![
            RegressorOutput { mean: vec![0.0], variance: vec![0.25] },
            RegressorOutput { mean: vec![0.0], variance: vec![4.0] },
        ];
        let truths = vec![vec![0.5], vec![-2.0]];
        let w = uniform(2);
        let fibers = FiberPartition::from_vectors(
            &outputs.iter().map(|o| o.variance.clone()).collect::<Vec<_>>(),
            &w,
            FiberMode::Exact,
        )
        .unwrap();
        assert!(gence_sq(&outputs, &truths, &w, &fibers).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn gence_variance_underflow() {
        let outputs = vec![RegressorOutput { mean: vec![0.0], variance: vec![1e-13] }];
        let fibers = FiberPartition::from_assignment(&[0], &[1.0]).unwrap();
        let r = gence(&outputs, &[vec![0.0]], &[1.0], &fibers);
        assert!(matches!(r, Err(Error::VarianceUnderflow { .. })));
    }

    #[test]
    fn bleed_and_regression_error_hand_values() {
        let w = uniform(2);
        assert_eq!(aleatoric_bleed(&[vec![0.0], vec![0.0]], &[vec![0.0], vec![0.0]], &w).unwrap(), 0.0);
        let b = aleatoric_bleed(&[vec![0.1], vec![0.3]], &[vec![0.0], vec![0.0]], &w).unwrap();
        assert!((b - 0.05).abs() < 1e-15);
        assert!(aleatoric_bleed(&[vec![-0.1]], &[vec![0.0]], &[1.0]).is_err());
        let e = regression_error(&[vec![0.0], vec![1.0]], &[vec![1.0], vec![1.0]], &w, None).unwrap();
        assert!((e - 0.5).abs() < 1e-15);
        assert_eq!(regression_error(&[vec![2.0]], &[vec![2.0]], &[1.0], None).unwrap(), 0.0);
        assert!(regression_error(&[vec![2.0]], &[vec![2.0]], &[1.0], Some(&[])).is_err());
    }

    #[test]
    fn masked_regression_error_renormalizes() {
        let preds = vec![vec![0.0], vec![0.0], vec![0.0]];
        let truths = vec![vec![1.0], vec![3.0], vec![100.0]];
        let w = vec![0.1, 0.3, 0.6];
        let e = regression_error(&preds, &truths, &w, Some(&[0, 1])).unwrap();
        assert!((e - (0.25 * 1.0 + 0.75 * 9.0)).abs() < 1e-12);
    }

    #[test]
    fn fiber_modes() {
        let w = uniform(6);
        let v = [0.1, 0.1, 0.15, 0.5, 0.52, 0.9];
        assert_eq!(FiberPartition::from_scalars(&v, &w, FiberMode::Exact).unwrap().len(), 5);
        assert_eq!(FiberPartition::from_scalars(&v, &w, FiberMode::EpsilonBin(0.1)).unwrap().len(), 3);
        let q = FiberPartition::from_scalars(&v, &w, FiberMode::Quantile(3)).unwrap();
        assert_eq!(q.groups, vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        q.validate(6).unwrap();
        assert_eq!("quantile:10".parse::<FiberMode>().unwrap(), FiberMode::Quantile(10));
        assert_eq!("eps:0.5".parse::<FiberMode>().unwrap(), FiberMode::EpsilonBin(0.5));
        assert!("quantile:0".parse::<FiberMode>().is_err());
    }

    fn regression_case() -> impl Strategy<Value = (Vec<RegressorOutput>, Vec<Vec<f64>>, Vec<usize>)> {
        (1usize..4, 2usize..20).prop_flat_map(|(dim, n)| {
            (
                prop::collection::vec(
                    (
                        prop::collection::vec(-3.0f64..3.0, dim),
                        prop::collection::vec(0.05f64..4.0, dim),
                    ),
                    n,
                ),
                prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), n),
                prop::collection::vec(0usize..3, n),
            )
                .prop_map(|(outs, truths, fib)| {
                    let outs = outs
                        .into_iter()
                        .map(|(mean, variance)| RegressorOutput { mean, variance })
                        .collect();
                    (outs, truths, fib)
                })
        })
    }

    proptest! {
        #[test]
        fn ece_within_unit_interval_and_order_free(
            samples in prop::collection::vec((0usize..2, 0.0f64..=1.0, 0usize..2), 1..60),
            bins in 1usize..50,
        ) {
            let outs: Vec<_> = samples.iter().map(|s| cls(s.0, s.1)).collect();
            let truths: Vec<_> = samples.iter().map(|s| s.2).collect();
            let w = uniform(outs.len());
            let e = ece_binned(&outs, &truths, &w, bins).unwrap().ece;
            prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
            let mut rev_o = outs.clone();
            rev_o.reverse();
            let mut rev_t = truths.clone();
            rev_t.reverse();
            let e2 = ece_binned(&rev_o, &rev_t, &w, bins).unwrap().ece;
            prop_assert!((e - e2).abs() < 1e-12);
            // duplicating every sample with half the weight changes nothing
            let dup_o: Vec<_> = outs.iter().chain(&outs).copied().collect();
            let dup_t: Vec<_> = truths.iter().chain(&truths).copied().collect();
            let dup_w = uniform(dup_o.len());
            let e3 = ece_binned(&dup_o, &dup_t, &dup_w, bins).unwrap().ece;
            prop_assert!((e - e3).abs() < 1e-12);
        }

        #[test]
        fn gence_is_scale_free((outs, truths, fib) in regression_case(), c in 0.1f64..10.0) {
            let w = uniform(outs.len());
            let fibers = FiberPartition::from_assignment(&fib, &w).unwrap();
            let g = gence(&outs, &truths, &w, &fibers).unwrap().value;
            let gs = gence_sq(&outs, &truths, &w, &fibers).unwrap().value;
            prop_assert!(g >= 0.0 && gs >= 0.0);
            let scaled: Vec<_> = outs
                .iter()
                .map(|o| RegressorOutput {
                    mean: o.mean.iter().map(|m| c * m).collect(),
                    variance: o.variance.iter().map(|v| c * c * v).collect(),
                })
                .collect();
            let scaled_t: Vec<Vec<f64>> = truths.iter().map(|t| t.iter().map(|v| c * v).collect()).collect();
            let g2 = gence(&scaled, &scaled_t, &w, &fibers).unwrap().value;
            let gs2 = gence_sq(&scaled, &scaled_t, &w, &fibers).unwrap().value;
            prop_assert!((g - g2).abs() <= 1e-10 * g.max(1.0));
            prop_assert!((gs - gs2).abs() <= 1e-10 * gs.max(1.0));
        }

        #[test]
        fn gence_ignores_order_within_fibers((outs, truths, fib) in regression_case()) {
            let n = outs.len();
            let w = uniform(n);
            let fibers = FiberPartition::from_assignment(&fib, &w).unwrap();
            let g = gence(&outs, &truths, &w, &fibers).unwrap().value;
            let perm: Vec<usize> = (0..n).rev().collect();
            let outs_p: Vec<_> = perm.iter().map(|&i| outs[i].clone()).collect();
            let truths_p: Vec<_> = perm.iter().map(|&i| truths[i].clone()).collect();
            let fib_p: Vec<_> = perm.iter().map(|&i| fib[i]).collect();
            let fibers_p = FiberPartition::from_assignment(&fib_p, &w).unwrap();
            let g2 = gence(&outs_p, &truths_p, &w, &fibers_p).unwrap().value;
            prop_assert!((g - g2).abs() < 1e-10);
        }

        #[test]
        fn bleed_equals_regression_error(
            rows in prop::collection::vec((prop::collection::vec(0.0f64..3.0, 2), prop::collection::vec(0.0f64..3.0, 2)), 1..30)
        ) {
            let pred: Vec<_> = rows.iter().map(|r| r.0.clone()).collect();
            let truth: Vec<_> = rows.iter().map(|r| r.1.clone()).collect();
            let w = uniform(rows.len());
            prop_assert_eq!(
                aleatoric_bleed(&pred, &truth, &w).unwrap(),
                regression_error(&pred, &truth, &w, None).unwrap()
            );
        }
    }
}
