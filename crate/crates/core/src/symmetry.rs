//! Orbit statistics: label dissent, target moments, and the error bounds
//! they imply for invariant and equivariant models.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::group::{action_table, decompose_orbits, FiniteGroup, OrbitDecomposition, DEFAULT_TOL};
use crate::numeric::pairwise_sum;

/// Largest acceptable condition number of the orbit weighting matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitStats {
    pub size: usize,
    pub mass: f64,
    pub majority_dissent: f64,
    pub minority_dissent: f64,
    pub target_mean: Option<Vec<f64>>,
    pub target_variance: Option<f64>,
}

fn label_masses(orbit: &[usize], labels: &[usize], weights: &[f64], n_classes: usize) -> Vec<f64> {
    let mut mass = vec![0.0; n_classes];
    for &i in orbit {
        mass[labels[i]] += weights[i];
    }
    mass
}

/// `k(Gx)`: mass disagreeing with the best single label, i.e. the orbit mass
/// minus its heaviest label.
pub fn majority_dissent(orbit: &[usize], labels: &[usize], weights: &[f64], n_classes: usize) -> f64 {
    let mass = label_masses(orbit, labels, weights, n_classes);
    let total: f64 = mass.iter().sum();
    let top = mass.iter().copied().fold(0.0, f64::max);
    (total - top).max(0.0)
}

/// `κ(Gx)`: mass disagreeing with the worst label over all `n_classes`.
/// A label absent from the orbit makes this the full orbit mass.
pub fn minority_dissent(orbit: &[usize], labels: &[usize], weights: &[f64], n_classes: usize) -> f64 {
    let mass = label_masses(orbit, labels, weights, n_classes);
    let total: f64 = mass.iter().sum();
    let bottom = mass.iter().copied().fold(f64::INFINITY, f64::min);
    (total - bottom).max(0.0)
}

/// Orbit-renormalized mean and variance of the targets, plus the orbit mass.
pub fn orbit_target_stats(orbit: &[usize], targets: &[Vec<f64>], weights: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let mass: f64 = orbit.iter().map(|&i| weights[i]).sum();
    if !(mass > 0.0) {
        return Err(Error::Empty("orbit has zero mass".into()));
    }
    let dim = targets[orbit[0]].len();
    let mut mean = vec![0.0; dim];
    for &i in orbit {
        let q = weights[i] / mass;
        for (m, t) in mean.iter_mut().zip(&targets[i]) {
            *m += q * t;
        }
    }
    let terms: Vec<f64> = orbit
        .iter()
        .map(|&i| weights[i] / mass * crate::numeric::squared_distance(&mean, &targets[i]))
        .collect();
    Ok((mean, pairwise_sum(&terms), mass))
}

/// Per-orbit statistics of `ds` under the given decomposition, using the
/// dataset's own weights.
pub fn orbit_stats(ds: &WeightedDataset, orbits: &OrbitDecomposition) -> Result<Vec<OrbitStats>> {
    let n_classes = ds.num_classes();
    orbits
        .orbits
        .par_iter()
        .zip(&orbits.masses)
        .map(|(orbit, &mass)| {
            let (k, kappa) = match &ds.labels {
                Some(l) => (
                    majority_dissent(orbit, l, &ds.weights, n_classes),
                    minority_dissent(orbit, l, &ds.weights, n_classes),
                ),
                None => (0.0, 0.0),
            };
            let (target_mean, target_variance) = match &ds.targets {
                Some(t) => {
                    let (m, v, _) = orbit_target_stats(orbit, t, &ds.weights)?;
                    (Some(m), Some(v))
                }
                None => (None, None),
            };
            Ok(OrbitStats {
                size: orbit.len(),
                mass,
                majority_dissent: k,
                minority_dissent: kappa,
                target_mean,
                target_variance,
            })
        })
        .collect()
}

// ─── classification bounds ───────────────────────────────────────────────────

/// Bounds on the error of every invariant classifier on a labeled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationBounds {
    /// Total majority dissent: no invariant classifier does better.
    pub lower: f64,
    /// Total minority dissent: no invariant classifier does worse.
    pub upper: f64,
    /// Every orbit omits some label, so `upper` is the trivial bound 1.
    pub vacuous: bool,
    pub orbits: OrbitDecomposition,
    pub stats: Vec<OrbitStats>,
}

impl ClassificationBounds {
    pub fn warnings(&self) -> Vec<String> {
        if self.vacuous {
            vec!["vacuous-bound: every orbit omits at least one label, so the error upper bound is trivial".into()]
        } else {
            Vec::new()
        }
    }
}

pub fn classification_bounds_with(ds: &WeightedDataset, orbits: OrbitDecomposition) -> Result<ClassificationBounds> {
    let labels = ds.labels()?;
    let stats = orbit_stats(ds, &orbits)?;
    let lower = pairwise_sum(&stats.iter().map(|s| s.majority_dissent).collect::<Vec<_>>());
    let upper = pairwise_sum(&stats.iter().map(|s| s.minority_dissent).collect::<Vec<_>>());
    let n_classes = ds.num_classes();
    let vacuous = orbits.orbits.iter().all(|o| {
        let mut present = vec![false; n_classes];
        for &i in o {
            present[labels[i]] = true;
        }
        present.iter().any(|p| !p)
    });
    Ok(ClassificationBounds { lower, upper, vacuous, orbits, stats })
}

pub fn classification_bounds(ds: &WeightedDataset, group: &FiniteGroup, tol: f64) -> Result<ClassificationBounds> {
    let orbits = decompose_orbits(ds, group, tol)?;
    classification_bounds_with(ds, orbits)
}

/// Smallest error an invariant classifier can reach on `ds`.
pub fn cls_error_lower(ds: &WeightedDataset, group: &FiniteGroup) -> Result<f64> {
    Ok(classification_bounds(ds, group, DEFAULT_TOL)?.lower)
}

/// Largest error an invariant classifier can reach on `ds`.
pub fn cls_error_upper(ds: &WeightedDataset, group: &FiniteGroup) -> Result<f64> {
    Ok(classification_bounds(ds, group, DEFAULT_TOL)?.upper)
}

/// Weighted error of the classifier that predicts `orbit_labels[o]` on orbit `o`.
pub fn invariant_classifier_error(ds: &WeightedDataset, orbits: &OrbitDecomposition, orbit_labels: &[usize]) -> Result<f64> {
    let labels = ds.labels()?;
    if orbit_labels.len() != orbits.len() {
        return Err(Error::ShapeMismatch { expected: orbits.len(), actual: orbit_labels.len() });
    }
    let terms: Vec<f64> = (0..ds.len())
        .map(|i| if labels[i] == orbit_labels[orbits.orbit_of[i]] { 0.0 } else { ds.weights[i] })
        .collect();
    Ok(pairwise_sum(&terms))
}

// ─── fibers ──────────────────────────────────────────────────────────────────

/// The samples of one fiber with weights renormalized to the fiber, and
/// their orbits computed inside the fiber.
pub fn restrict_to_fiber(
    ds: &WeightedDataset,
    group: &FiniteGroup,
    members: &[usize],
    tol: f64,
) -> Result<(WeightedDataset, OrbitDecomposition)> {
    let sub = ds.subset(members)?;
    let orbits = decompose_orbits(&sub, group, tol)?;
    Ok((sub, orbits))
}

/// Dissent totals of one fiber, measured with fiber-renormalized weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberDissent {
    pub mass: f64,
    pub orbits: usize,
    /// `Σ k_p(Gx)` over the orbits inside the fiber.
    pub majority: f64,
    /// `Σ κ_p(Gx)` over the orbits inside the fiber.
    pub minority: f64,
}

pub fn fiber_dissent(ds: &WeightedDataset, group: &FiniteGroup, fibers: &[Vec<usize>], tol: f64) -> Result<Vec<FiberDissent>> {
    let n_classes = ds.num_classes();
    fibers
        .iter()
        .map(|members| {
            let mass = members.iter().map(|&i| ds.weights[i]).sum();
            let (sub, orbits) = restrict_to_fiber(ds, group, members, tol)?;
            // keep the global class count so absent labels still count for κ
            let labels = sub.labels()?;
            let majority = pairwise_sum(&orbits.orbits.iter().map(|o| majority_dissent(o, labels, &sub.weights, n_classes)).collect::<Vec<_>>());
            let minority = pairwise_sum(&orbits.orbits.iter().map(|o| minority_dissent(o, labels, &sub.weights, n_classes)).collect::<Vec<_>>());
            Ok(FiberDissent { mass, orbits: orbits.len(), majority, minority })
        })
        .collect()
}

// ─── regression bounds ───────────────────────────────────────────────────────

/// Smallest regression error of an invariant model: `Σ mass · V_Gx[f]`.
pub fn invariant_regression_lower_bound(ds: &WeightedDataset, orbits: &OrbitDecomposition) -> Result<f64> {
    let targets = ds.targets()?;
    let terms = orbits
        .orbits
        .par_iter()
        .map(|o| orbit_target_stats(o, targets, &ds.weights).map(|(_, v, m)| m * v))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// The invariant predictor attaining the lower bound: each sample gets its
/// orbit's mean target.
pub fn orbit_mean_predictor(ds: &WeightedDataset, orbits: &OrbitDecomposition) -> Result<Vec<Vec<f64>>> {
    let targets = ds.targets()?;
    let means = orbits
        .orbits
        .iter()
        .map(|o| orbit_target_stats(o, targets, &ds.weights).map(|(m, _, _)| m))
        .collect::<Result<Vec<_>>>()?;
    Ok(orbits.orbit_of.iter().map(|&o| means[o].clone()).collect())
}

/// Smallest regression error of a model equivariant under `group`, whose
/// output representation (identity when absent) must be set.
///
/// For each orbit representative `x`, the best equivariant value at `x` is
/// the `Q`-weighted average `E = Q⁻¹ Σ_g w_g ρ_gᵀ f(gx)` with
/// `Q = Σ_g w_g ρ_gᵀ ρ_g`, and the orbit contributes `Σ_g w_g ‖f(gx) − ρ_g E‖²`.
/// Weights of elements fixing `x` are shared among the stabilizer.
pub fn equivariant_orbit_lower_bound(ds: &WeightedDataset, group: &FiniteGroup, tol: f64) -> Result<f64> {
    let targets = ds.targets()?;
    let orbits = decompose_orbits(ds, group, tol)?;
    let table = action_table(ds, group, tol)?;
    let dim = targets.first().map_or(0, Vec::len);
    let rho: Vec<DMatrix<f64>> = (0..group.order()).map(|g| group.output_matrix(g, dim)).collect();
    if let Some(m) = rho.iter().find(|m| m.nrows() != dim || m.ncols() != dim) {
        return Err(Error::ShapeMismatch { expected: dim, actual: m.nrows() });
    }
    let terms = orbits
        .representatives
        .par_iter()
        .map(|&r| {
            let images: Vec<usize> = table[r]
                .iter()
                .enumerate()
                .map(|(g, j)| j.ok_or_else(|| Error::invalid(format!("sample {r} has no image under element {g}; the sample is not closed under the group"))))
                .collect::<Result<_>>()?;
            let stabilizer = images.iter().filter(|&&j| j == r).count().max(1) as f64;
            let w: Vec<f64> = images.iter().map(|&j| ds.weights[j] / stabilizer).collect();
            let mut q = DMatrix::zeros(dim, dim);
            let mut rhs = DVector::zeros(dim);
            for (g, &j) in images.iter().enumerate() {
                let rt = rho[g].transpose();
                q += w[g] * &rt * &rho[g];
                rhs += w[g] * &rt * DVector::from_column_slice(&targets[j]);
            }
            let eig = q.clone().symmetric_eigen().eigenvalues;
            let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
            if !(lo > 0.0) || hi / lo > MAX_CONDITION {
                return Err(Error::DegenerateOrbitWeighting(format!(
                    "orbit of sample {r} has weighting eigenvalues in [{lo:e}, {hi:e}]"
                )));
            }
            let e = q
                .cholesky()
                .ok_or_else(|| Error::DegenerateOrbitWeighting(format!("orbit of sample {r} is not positive definite")))?
                .solve(&rhs);
            let parts: Vec<f64> = images
                .iter()
                .enumerate()
                .map(|(g, &j)| {
                    let pred = &rho[g] * &e;
                    let d: f64 = pred.iter().zip(&targets[j]).map(|(p, t)| (p - t) * (p - t)).sum();
                    w[g] * d
                })
                .collect();
            Ok(pairwise_sum(&parts))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}
