//! Dataset generators for the worked examples and the desk-scale experiments.
//!
//! Every generator is deterministic given its seed.

use std::f64::consts::PI;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::{uniform_weights, PointKind, WeightedDataset};
use crate::error::{Error, Result};
use crate::rng::{self, streams};

// ─── circle-20 ───────────────────────────────────────────────────────────────

/// Angle of point `k` of the circle dataset. The grid is closed under
/// reflection over the x-axis (`k <-> 19 - k`) and under rotations by 18°.
pub fn circle20_angle(k: usize) -> f64 {
    PI / 20.0 + k as f64 * PI / 10.0
}

/// Twenty points on the unit circle, uniform weights, binary labels.
///
/// Reflection orbits are the pairs `{k, 19 - k}`. On the right half (x > 0)
/// four orbits are label-constant and one is mixed; on the left half all
/// five orbits are mixed. Labels: 14 of class 0, 6 of class 1.
pub fn circle20() -> WeightedDataset {
    let mut points = Vec::with_capacity(20);
    let mut labels = vec![0usize; 20];
    for k in 0..20 {
        let t = circle20_angle(k);
        points.push(vec![t.cos(), t.sin()]);
    }
    // right half: orbits k = 0..=4 pair with 19 - k; only k = 4 is mixed
    labels[15] = 1;
    // left half: orbits k = 5..=9, each mixed
    for k in 5..=9 {
        labels[19 - k] = 1;
    }
    WeightedDataset::new(PointKind::Vector { dim: 2 }, points, Some(labels), None, uniform_weights(20))
        .expect("circle20 is well formed")
}

/// Fiber assignment for the two-confidence model: 0 on the right half, 1 on the left.
pub fn circle20_halves(ds: &WeightedDataset) -> Vec<usize> {
    ds.points.iter().map(|p| usize::from(p[0] < 0.0)).collect()
}

// ─── Swiss rolls ─────────────────────────────────────────────────────────────

/// Number of angular sectors used to assign correct/incorrect invariance.
pub const SWISS_SECTORS: usize = 12;

pub const SWISS_THETA_MAX: f64 = 3.0 * PI;

fn swiss_radius(theta: f64) -> f64 {
    0.4 + 0.15 * theta / PI
}

/// Sector index of a spiral parameter `theta ∈ [0, 3π]`.
pub fn swiss_sector(theta: f64) -> usize {
    ((theta / SWISS_THETA_MAX * SWISS_SECTORS as f64) as usize).min(SWISS_SECTORS - 1)
}

/// Which sectors carry correct z-invariance for a given ratio and seed.
pub fn swiss_correct_sectors(correct_ratio: f64, seed: u64) -> Vec<bool> {
    let n_correct = (correct_ratio * SWISS_SECTORS as f64).round() as usize;
    let mut order: Vec<usize> = (0..SWISS_SECTORS).collect();
    order.shuffle(&mut rng::stream(seed, streams::SECTORS));
    let mut correct = vec![false; SWISS_SECTORS];
    for &s in order.iter().take(n_correct) {
        correct[s] = true;
    }
    correct
}

/// Two interleaved spiral arms duplicated at z = 0 and z = 1.
///
/// Points are ordered arm-major, then z, then along the arm, so the dataset
/// has `4 * n_per_arm` samples. Arm `a` carries label `a` at z = 0. At z = 1
/// the label is kept in correct sectors and flipped in the others, so the
/// z-swap maps the dataset onto itself exactly.
pub fn swiss_rolls(correct_ratio: f64, n_per_arm: usize, seed: u64) -> Result<WeightedDataset> {
    if !(0.0..=1.0).contains(&correct_ratio) {
        return Err(Error::invalid(format!("correct_ratio {correct_ratio} outside [0, 1]")));
    }
    if n_per_arm < 10 {
        return Err(Error::invalid("swiss rolls need at least 10 points per arm"));
    }
    let correct = swiss_correct_sectors(correct_ratio, seed);
    let mut rng = rng::stream(seed, streams::DATASET);
    let mut points = Vec::with_capacity(4 * n_per_arm);
    let mut labels = Vec::with_capacity(4 * n_per_arm);
    for arm in 0..2usize {
        // jittered stratified parameters keep sector fractions close to exact
        let thetas: Vec<f64> = (0..n_per_arm)
            .map(|i| SWISS_THETA_MAX * (i as f64 + rng.random::<f64>()) / n_per_arm as f64)
            .collect();
        for z in [0.0, 1.0] {
            for &theta in &thetas {
                let r = swiss_radius(theta);
                let phi = theta + arm as f64 * PI;
                points.push(vec![r * phi.cos(), r * phi.sin(), z]);
                let flip = z == 1.0 && !correct[swiss_sector(theta)];
                labels.push(if flip { 1 - arm } else { arm });
            }
        }
    }
    let n = points.len();
    WeightedDataset::new(PointKind::Vector { dim: 3 }, points, Some(labels), None, uniform_weights(n))
}

// ─── permutations of four rows ───────────────────────────────────────────────

/// Row features of the four distinct set elements `a, b, c, d`.
pub const PERMUTATION_ROWS: [[f64; 2]; 4] = [[1.0, 0.5], [-0.3, 1.2], [0.7, -0.9], [-1.1, -0.2]];

/// All 4! row orderings of `{a, b, c, d}` as 4x2 matrices; label 0 iff the
/// first row is `a`.
pub fn permutation24() -> WeightedDataset {
    let group = crate::group::build_group(crate::group::GroupDescriptor::Symmetric(4))
        .expect("S4 is supported");
    let base: Vec<f64> = PERMUTATION_ROWS.concat();
    let kind = PointKind::Matrix { rows: 4, cols: 2 };
    let mut points = Vec::with_capacity(24);
    let mut labels = Vec::with_capacity(24);
    for g in 0..group.order() {
        let p = group
            .apply(g, &base, crate::group::Side::Input, kind)
            .expect("shapes match");
        labels.push(usize::from(p[..2] != PERMUTATION_ROWS[0]));
        points.push(p);
    }
    WeightedDataset::new(kind, points, Some(labels), None, uniform_weights(24))
        .expect("permutation24 is well formed")
}

// ─── point clouds with two variance fibers ───────────────────────────────────

#[derive(Debug, Clone)]
pub struct PointCloudExample {
    pub dataset: WeightedDataset,
    /// Variance fiber of each item: 0 for `s1`, 1 for `s2`.
    pub fibers: Vec<usize>,
    pub names: Vec<&'static str>,
}

fn rotate_rows(rows: &[[f64; 2]], theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    rows.iter().flat_map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect()
}

/// Five planar point clouds `a(+), a(×), b, c, d` with probabilities
/// 0.125, 0.125, 0.125, 0.125, 0.5.
///
/// Under the 8-fold rotation group `a(+)` and `a(×)` share an orbit and a
/// target; `b` and `c` share an orbit but not a target, with orbit variance
/// π/4; `d` is alone. Items `a(+), a(×), b, c` form fiber `s1`, `d` forms `s2`.
pub fn pointcloud_gence() -> PointCloudExample {
    let plus = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
    let b = [[1.0, 0.0], [0.0, 2.0], [-1.0, 0.0], [0.5, -0.5]];
    let d = [[2.0, 0.0], [0.0, 0.5], [-0.5, 0.0], [0.0, -1.5]];
    let points = vec![
        rotate_rows(&plus, 0.0),
        rotate_rows(&plus, PI / 4.0),
        rotate_rows(&b, 0.0),
        rotate_rows(&b, PI / 2.0),
        rotate_rows(&d, 0.0),
    ];
    let h = PI.sqrt() / 2.0;
    let targets = vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![h, 0.0], vec![-h, 0.0], vec![0.0, -1.0]];
    let dataset = WeightedDataset::new(
        PointKind::Set { rows: 4, cols: 2 },
        points,
        None,
        Some(targets),
        vec![0.125, 0.125, 0.125, 0.125, 0.5],
    )
    .expect("point cloud example is well formed");
    PointCloudExample {
        dataset,
        fibers: vec![0, 0, 0, 0, 1],
        names: vec!["a(+)", "a(x)", "b", "c", "d"],
    }
}

// ─── vector fields ───────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorFieldKind {
    /// `f(x) = Qx` with `Q` a quarter turn about the z-axis.
    Spiral,
    /// `f(x) = -sin²(‖x‖) x`.
    Sinusoidal,
}

impl std::str::FromStr for VectorFieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spiral" => Ok(VectorFieldKind::Spiral),
            "sinusoidal" => Ok(VectorFieldKind::Sinusoidal),
            _ => Err(Error::invalid(format!("unknown vector field `{s}` (spiral|sinusoidal)"))),
        }
    }
}

impl fmt::Display for VectorFieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VectorFieldKind::Spiral => "spiral",
            VectorFieldKind::Sinusoidal => "sinusoidal",
        })
    }
}

/// Target of the field at a point with three coordinates.
pub fn vector_field_target(kind: VectorFieldKind, x: &[f64]) -> Vec<f64> {
    match kind {
        VectorFieldKind::Spiral => vec![-x[1], x[0], x[2]],
        VectorFieldKind::Sinusoidal => {
            let r = crate::numeric::squared_norm(x).sqrt();
            let s = r.sin();
            x.iter().map(|v| -s * s * v).collect()
        }
    }
}

/// `n` inputs drawn uniformly from the disk of the given radius in the
/// xy-plane (z = 0), with exact targets.
pub fn vector_field(kind: VectorFieldKind, n: usize, radius: f64, seed: u64) -> Result<WeightedDataset> {
    if n == 0 {
        return Err(Error::invalid("vector field needs at least one sample"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("vector field radius must be positive"));
    }
    let mut rng = rng::stream(seed, streams::DATASET);
    let mut points = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let r = radius * rng.random::<f64>().sqrt();
        let phi = 2.0 * PI * rng.random::<f64>();
        let x = vec![r * phi.cos(), r * phi.sin(), 0.0];
        targets.push(vector_field_target(kind, &x));
        points.push(x);
    }
    WeightedDataset::new(PointKind::Vector { dim: 3 }, points, None, Some(targets), uniform_weights(n))
}

// ─── calibrated Gaussian oracle data ─────────────────────────────────────────

/// How the Gaussian noise of the calibrated oracle is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseSampling {
    #[default]
    Iid,
    /// One draw per probability stratum `[(k + u)/n]`, strata shuffled over
    /// samples. Same marginal law, much lower Monte-Carlo variance.
    Stratified,
}

#[derive(Debug, Clone)]
pub struct CalibratedGaussian {
    /// Points are the generating means; targets are `mean + noise`.
    pub dataset: WeightedDataset,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

/// Targets `μ + ε` with `ε ~ N(0, diag(s))`; the generating `(μ, s)` is kept,
/// so predicting exactly `(μ, s)` is a perfectly calibrated model.
pub fn calibrated_gaussian(
    n: usize,
    dims: usize,
    s_range: (f64, f64),
    seed: u64,
    sampling: NoiseSampling,
) -> Result<CalibratedGaussian> {
    let (lo, hi) = s_range;
    if n == 0 || dims == 0 {
        return Err(Error::invalid("calibrated gaussian needs n >= 1 and dims >= 1"));
    }
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::invalid("variance range must be positive and ordered"));
    }
    let mut rng = rng::stream(seed, streams::DATASET);
    let mut noise_rng = rng::stream(seed, streams::NOISE);
    let means: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dims).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let variances: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dims).map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo }).collect())
        .collect();
    let mut unit = vec![vec![0.0; dims]; n];
    match sampling {
        NoiseSampling::Iid => {
            for row in unit.iter_mut() {
                for v in row.iter_mut() {
                    *v = StandardNormal.sample(&mut noise_rng);
                }
            }
        }
        NoiseSampling::Stratified => {
            let normal = Normal::standard();
            for d in 0..dims {
                let mut strata: Vec<usize> = (0..n).collect();
                strata.shuffle(&mut noise_rng);
                for (i, &k) in strata.iter().enumerate() {
                    let u = (k as f64 + noise_rng.random::<f64>()) / n as f64;
                    unit[i][d] = normal.inverse_cdf(u.clamp(1e-300, 1.0 - 1e-16));
                }
            }
        }
    }
    let targets: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..dims)
                .map(|d| means[i][d] + variances[i][d].sqrt() * unit[i][d])
                .collect()
        })
        .collect();
    let dataset = WeightedDataset::new(
        PointKind::Vector { dim: dims },
        means.clone(),
        None,
        Some(targets),
        uniform_weights(n),
    )?;
    Ok(CalibratedGaussian { dataset, means, variances })
}

// ─── named specs for the CLI ─────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    Circle20,
    SwissRoll { correct_ratio: f64, n_per_arm: usize },
    Permutation24,
    PointcloudGence,
    VectorField { field: VectorFieldKind, n: usize, radius: f64 },
    CalibratedGaussian { n: usize, dims: usize, s_min: f64, s_max: f64 },
}

impl DatasetSpec {
    pub fn generate(&self, seed: u64) -> Result<WeightedDataset> {
        match *self {
            DatasetSpec::Circle20 => Ok(circle20()),
            DatasetSpec::SwissRoll { correct_ratio, n_per_arm } => swiss_rolls(correct_ratio, n_per_arm, seed),
            DatasetSpec::Permutation24 => Ok(permutation24()),
            DatasetSpec::PointcloudGence => Ok(pointcloud_gence().dataset),
            DatasetSpec::VectorField { field, n, radius } => vector_field(field, n, radius, seed),
            DatasetSpec::CalibratedGaussian { n, dims, s_min, s_max } => {
                Ok(calibrated_gaussian(n, dims, (s_min, s_max), seed, NoiseSampling::Iid)?.dataset)
            }
        }
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Circle20 => write!(f, "circle20"),
            DatasetSpec::SwissRoll { correct_ratio, n_per_arm } => {
                write!(f, "swiss_roll(ratio={correct_ratio},n={n_per_arm})")
            }
            DatasetSpec::Permutation24 => write!(f, "permutation24"),
            DatasetSpec::PointcloudGence => write!(f, "pointcloud_gence"),
            DatasetSpec::VectorField { field, n, radius } => {
                write!(f, "vector_field_{field}(n={n},radius={radius})")
            }
            DatasetSpec::CalibratedGaussian { n, dims, s_min, s_max } => {
                write!(f, "calibrated_gaussian(n={n},dims={dims},s=[{s_min},{s_max}])")
            }
        }
    }
}
