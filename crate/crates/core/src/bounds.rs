//! Upper and lower bounds on ECE and GENCE, the truncated normal confidence
//! density, DeepSets Lipschitz constants and Hoeffding sample sizes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, pairwise_sum, std_normal_cdf, std_normal_pdf, QUAD_TOL};

/// Truncation masses below this are treated as degenerate.
pub const MIN_TRUNCATION_MASS: f64 = 1e-300;

/// Tolerance of the audit identity between a report's value and components.
pub const AUDIT_TOL: f64 = 1e-10;

// ─── confidence densities ────────────────────────────────────────────────────

/// Density `r(p)` of predicted confidences on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ConfidenceDensity {
    TruncatedNormal { mu: f64, sigma: f64, a: f64, b: f64 },
    Uniform { a: f64, b: f64 },
    Point { p: f64 },
    Empirical { values: Vec<f64>, weights: Vec<f64> },
}

/// Truncated normal density on `[a, b]`; zero outside.
pub fn trunc_normal_pdf(x: f64, mu: f64, sigma: f64, a: f64, b: f64) -> Result<f64> {
    let z = truncation_mass(mu, sigma, a, b)?;
    if x < a || x > b {
        return Ok(0.0);
    }
    Ok(std_normal_pdf((x - mu) / sigma) / (sigma * z))
}

/// `Φ((b−μ)/σ) − Φ((a−μ)/σ)`, evaluated in whichever tail keeps precision.
fn truncation_mass(mu: f64, sigma: f64, a: f64, b: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(a < b) {
        return Err(Error::invalid(format!("truncated normal needs sigma > 0 and a < b (got sigma={sigma}, [{a}, {b}])")));
    }
    let (lo, hi) = ((a - mu) / sigma, (b - mu) / sigma);
    let z = if lo > 0.0 {
        std_normal_cdf(-lo) - std_normal_cdf(-hi)
    } else {
        std_normal_cdf(hi) - std_normal_cdf(lo)
    };
    if !(z >= MIN_TRUNCATION_MASS) {
        return Err(Error::DegenerateTruncation(z));
    }
    Ok(z)
}

impl ConfidenceDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConfidenceDensity::TruncatedNormal { mu, sigma, a, b } => {
                if !(0.0 <= *a && *b <= 1.0) {
                    return Err(Error::invalid(format!("truncation [{a}, {b}] must lie in [0, 1]")));
                }
                truncation_mass(*mu, *sigma, *a, *b).map(|_| ())
            }
            ConfidenceDensity::Uniform { a, b } => {
                if !(0.0 <= *a && a < b && *b <= 1.0) {
                    return Err(Error::invalid(format!("uniform support [{a}, {b}] must be a subinterval of [0, 1]")));
                }
                Ok(())
            }
            ConfidenceDensity::Point { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid(format!("point mass at {p} outside [0, 1]")));
                }
                Ok(())
            }
            ConfidenceDensity::Empirical { values, weights } => {
                if values.is_empty() {
                    return Err(Error::Empty("empirical density has no samples".into()));
                }
                if values.len() != weights.len() {
                    return Err(Error::ShapeMismatch { expected: values.len(), actual: weights.len() });
                }
                if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::invalid(format!("confidence {v} outside [0, 1]")));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 || weights.iter().any(|w| *w < 0.0) {
                    return Err(Error::WeightsNotNormalized(total));
                }
                Ok(())
            }
        }
    }

    /// `∫_lo^hi r(p) g(p) dp`. Analytic forms use adaptive quadrature split at
    /// `breaks`; discrete forms use exact weighted sums.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F, lo: f64, hi: f64, breaks: &[f64]) -> Result<f64> {
        self.validate()?;
        if hi <= lo {
            return Ok(0.0);
        }
        let inside = |p: f64| lo <= p && p <= hi;
        match self {
            ConfidenceDensity::Point { p } => Ok(if inside(*p) { g(*p) } else { 0.0 }),
            ConfidenceDensity::Empirical { values, weights } => {
                let terms: Vec<f64> = values
                    .iter()
                    .zip(weights)
                    .filter(|(p, _)| inside(**p))
                    .map(|(p, w)| w * g(*p))
                    .collect();
                Ok(pairwise_sum(&terms))
            }
            ConfidenceDensity::TruncatedNormal { mu, sigma, a, b } => {
                let z = truncation_mass(*mu, *sigma, *a, *b)?;
                let pdf = |x: f64| std_normal_pdf((x - mu) / sigma) / (sigma * z);
                // nodes around the peak keep narrow densities from slipping
                // between the first quadrature points
                let mut cuts: Vec<f64> = breaks.to_vec();
                cuts.extend([-8.0, -2.0, 0.0, 2.0, 8.0].iter().map(|k| mu + k * sigma));
                piecewise(|x| pdf(x) * g(x), lo.max(*a), hi.min(*b), &cuts)
            }
            ConfidenceDensity::Uniform { a, b } => {
                let h = 1.0 / (b - a);
                piecewise(|x| h * g(x), lo.max(*a), hi.min(*b), breaks)
            }
        }
    }
}

fn piecewise<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cuts: &[f64]) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mut nodes: Vec<f64> = cuts.iter().copied().filter(|c| *c > lo && *c < hi).collect();
    nodes.push(lo);
    nodes.push(hi);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let pieces = (nodes.len() - 1) as f64;
    let parts = nodes
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], QUAD_TOL / pieces))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().sum())
}

impl FromStr for ConfidenceDensity {
    type Err = Error;

    /// `truncnorm:μ,σ,a,b`, `uniform`, `uniform:a,b` or `point:p`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad density `{s}` (truncnorm:mu,sigma,a,b | uniform[:a,b] | point:p)"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
        };
        let d = match (name, nums.as_slice()) {
            ("truncnorm", [mu, sigma, a, b]) => ConfidenceDensity::TruncatedNormal { mu: *mu, sigma: *sigma, a: *a, b: *b },
            ("uniform", []) => ConfidenceDensity::Uniform { a: 0.0, b: 1.0 },
            ("uniform", [a, b]) => ConfidenceDensity::Uniform { a: *a, b: *b },
            ("point", [p]) => ConfidenceDensity::Point { p: *p },
            _ => return Err(bad()),
        };
        d.validate()?;
        Ok(d)
    }
}

impl fmt::Display for ConfidenceDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfidenceDensity::TruncatedNormal { mu, sigma, a, b } => write!(f, "truncnorm:{mu},{sigma},{a},{b}"),
            ConfidenceDensity::Uniform { a, b } => write!(f, "uniform:{a},{b}"),
            ConfidenceDensity::Point { p } => write!(f, "point:{p}"),
            ConfidenceDensity::Empirical { values, .. } => write!(f, "empirical({} samples)", values.len()),
        }
    }
}

// ─── reports ─────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    EceUpperNaive,
    EceUpperInvariant,
    EceUpperFiberwise,
    EceUpperBinary,
    EceUpperBilipschitz,
    EceLower,
    MPrime,
    EceLowerLipschitz,
    GenceUpper,
    /// Closed form of the two-fiber point-cloud example, which does not
    /// apply the fiber mass of `s1` to its error term.
    GenceUpperClosedForm,
    GenceSqLower,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// A bound value with the intermediate quantities it was built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub label: String,
    pub value: f64,
    pub components: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl BoundReport {
    fn new(kind: BoundKind, value: f64, components: &[(&str, f64)]) -> Self {
        BoundReport {
            kind,
            label: kind.to_string(),
            value,
            components: components.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            flags: Vec::new(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    pub fn component(&self, name: &str) -> Result<f64> {
        self.components
            .get(name)
            .copied()
            .ok_or_else(|| Error::invalid(format!("{} report lacks component `{name}`", self.kind)))
    }

    /// Recomputes the value from the components alone.
    pub fn recompute(&self) -> Result<f64> {
        let c = |n: &str| self.component(n);
        Ok(match self.kind {
            BoundKind::EceUpperNaive => 0.5 + c("abs_integral")?,
            BoundKind::EceUpperInvariant => 0.5 + c("abs_integral")? - c("k_star")? * c("p2_mass")?,
            BoundKind::EceUpperFiberwise => 0.5 + c("abs_integral")? - c("m")? * c("p2_mass")?,
            BoundKind::EceUpperBinary => 1.0 - c("m")?,
            BoundKind::EceUpperBilipschitz => {
                let k2 = c("k2")?;
                0.5 + k2 / 4.0 + (-c("k_star")? * k2 * c("p2_mass")? * c("min_orbit_mass")?).min(0.0)
            }
            BoundKind::EceLower | BoundKind::GenceSqLower => c("integral")?,
            BoundKind::MPrime => (1.0 - c("kappa_sum")? / c("min_orbit_mass")?).clamp(0.0, 1.0),
            BoundKind::EceLowerLipschitz => c("inv_k")? * c("min_orbit_mass")? * c("m_prime")?.powi(2) / 2.0,
            BoundKind::GenceUpper => 1.0 + c("normalized_error_sum")?,
            BoundKind::GenceUpperClosedForm => 1.0 + c("err_s1")? / (2.0 * c("s1")? / PI),
        })
    }

    /// Checks the audit identity `value == recompute()`.
    pub fn audit(&self) -> Result<()> {
        let r = self.recompute()?;
        if (r - self.value).abs() > AUDIT_TOL * r.abs().max(1.0) {
            return Err(Error::invalid(format!("{} audit failed: value {} but components give {r}", self.label, self.value)));
        }
        Ok(())
    }
}

// ─── ECE upper bounds ────────────────────────────────────────────────────────

fn unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("{name} = {x} must lie in [0, 1]")));
    }
    Ok(())
}

fn abs_integral(r: &ConfidenceDensity) -> Result<f64> {
    r.integrate(|p| (0.5 - p).abs(), 0.0, 1.0, &[0.5])
}

/// `½ + ∫ r(p)|½ − p| dp`: holds for any classifier.
pub fn ece_upper_naive(r: &ConfidenceDensity) -> Result<BoundReport> {
    let a = abs_integral(r)?;
    Ok(BoundReport::new(BoundKind::EceUpperNaive, 0.5 + a, &[("abs_integral", a)]))
}

/// Naive bound reduced by `k_star · P2_mass`, `k_star` being the smallest
/// nonzero orbit dissent.
pub fn ece_upper_invariant(r: &ConfidenceDensity, k_star: f64, p2_mass: f64) -> Result<BoundReport> {
    unit("k_star", k_star)?;
    unit("p2_mass", p2_mass)?;
    let a = abs_integral(r)?;
    let mut rep = BoundReport::new(
        BoundKind::EceUpperInvariant,
        0.5 + a - k_star * p2_mass,
        &[("abs_integral", a), ("k_star", k_star), ("p2_mass", p2_mass)],
    );
    if k_star == 0.0 {
        rep = rep.flag("k_star is zero: no orbit dissents, the bound equals the naive one");
    }
    Ok(rep)
}

/// Naive bound reduced by `m · P2_mass`, `m` being the smallest total
/// dissent over fibers of the confidence head.
pub fn ece_upper_fiberwise(r: &ConfidenceDensity, m: f64, p2_mass: f64) -> Result<BoundReport> {
    unit("m", m)?;
    unit("p2_mass", p2_mass)?;
    let a = abs_integral(r)?;
    Ok(BoundReport::new(
        BoundKind::EceUpperFiberwise,
        0.5 + a - m * p2_mass,
        &[("abs_integral", a), ("m", m), ("p2_mass", p2_mass)],
    ))
}

/// Binary classification: `1 − m`.
pub fn ece_upper_binary(m: f64) -> Result<BoundReport> {
    unit("m", m)?;
    Ok(BoundReport::new(BoundKind::EceUpperBinary, 1.0 - m, &[("m", m)]))
}

/// Bound for a confidence head with inverse Lipschitz constant `k2`.
pub fn ece_upper_bilipschitz(k2: f64, k_star: f64, p2_mass: f64, min_orbit_mass: f64) -> Result<BoundReport> {
    if !(k2 > 0.0) {
        return Err(Error::invalid(format!("K2 = {k2} must be positive")));
    }
    unit("k_star", k_star)?;
    unit("p2_mass", p2_mass)?;
    unit("min_orbit_mass", min_orbit_mass)?;
    let value = 0.5 + k2 / 4.0 + (-k_star * k2 * p2_mass * min_orbit_mass).min(0.0);
    Ok(BoundReport::new(
        BoundKind::EceUpperBilipschitz,
        value,
        &[("k2", k2), ("k_star", k_star), ("p2_mass", p2_mass), ("min_orbit_mass", min_orbit_mass)],
    ))
}

// ─── ECE lower bounds ────────────────────────────────────────────────────────

/// `∫₀^m r(p)(m − p) dp`, where `m` lower-bounds the accuracy on every fiber.
pub fn ece_lower(r: &ConfidenceDensity, m: f64) -> Result<BoundReport> {
    unit("m", m)?;
    let integral = r.integrate(|p| m - p, 0.0, m, &[])?;
    Ok(BoundReport::new(BoundKind::EceLower, integral, &[("m", m), ("integral", integral)]))
}

/// `m' = 1 − Σκ / (smallest orbit mass)`, clamped to `[0, 1]`.
pub fn m_prime_from(kappa_sum: f64, min_orbit_mass: f64) -> Result<BoundReport> {
    if !(min_orbit_mass > 0.0) {
        return Err(Error::invalid("smallest orbit mass is zero"));
    }
    let raw = 1.0 - kappa_sum / min_orbit_mass;
    let mut rep = BoundReport::new(
        BoundKind::MPrime,
        raw.clamp(0.0, 1.0),
        &[("kappa_sum", kappa_sum), ("min_orbit_mass", min_orbit_mass), ("raw", raw)],
    );
    if raw < 0.0 {
        rep = rep.flag(format!("clamped: raw value {raw} is negative"));
    }
    Ok(rep)
}

/// `m'` of a labeled dataset under `group`.
pub fn m_prime(ds: &crate::dataset::WeightedDataset, group: &crate::group::FiniteGroup) -> Result<BoundReport> {
    let b = crate::symmetry::classification_bounds(ds, group, crate::group::DEFAULT_TOL)?;
    let mut rep = m_prime_from(b.upper, b.orbits.min_mass())?;
    for w in b.warnings() {
        rep = rep.flag(w);
    }
    Ok(rep)
}

/// `(min_orbit_mass / K) · m'² / 2` for a model with Lipschitz constant `K`.
pub fn ece_lower_lipschitz(k: f64, m_prime: f64, min_orbit_mass: f64) -> Result<BoundReport> {
    if !(k > 0.0) {
        return Err(Error::invalid(format!("K = {k} must be positive")));
    }
    unit("m_prime", m_prime)?;
    let inv_k = 1.0 / k;
    Ok(BoundReport::new(
        BoundKind::EceLowerLipschitz,
        inv_k * min_orbit_mass * m_prime * m_prime / 2.0,
        &[("k", k), ("inv_k", inv_k), ("m_prime", m_prime), ("min_orbit_mass", min_orbit_mass)],
    ))
}

// ─── DeepSets Lipschitz constant ─────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeepSetsLipschitz {
    pub n: usize,
    /// Largest singular value of the `1 × n` sum-pooling row.
    pub sigma_pool: f64,
    /// Largest singular value of the `n × n` all-ones matrix.
    pub sigma_ones: f64,
    /// `sigma_pool · (1 + sigma_ones)`.
    pub k: f64,
}

fn sigma_max(m: DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn deepsets_lipschitz(n: usize) -> Result<DeepSetsLipschitz> {
    if n == 0 {
        return Err(Error::invalid("set size must be at least 1"));
    }
    let sigma_pool = sigma_max(DMatrix::from_element(1, n, 1.0));
    let sigma_ones = sigma_max(DMatrix::from_element(n, n, 1.0));
    Ok(DeepSetsLipschitz { n, sigma_pool, sigma_ones, k: sigma_pool * (1.0 + sigma_ones) })
}

/// Permutation-equivariant layer `tanh(λ1)·I + tanh(λ2)·11ᵀ`.
pub fn deepsets_layer(n: usize, lambda1: f64, lambda2: f64) -> DMatrix<f64> {
    DMatrix::identity(n, n) * lambda1.tanh() + DMatrix::from_element(n, n, lambda2.tanh())
}

// ─── GENCE bounds ────────────────────────────────────────────────────────────

/// One fiber of the variance head: its mass, its (minimized) regression
/// error and its variance vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberError {
    pub mass: f64,
    pub error: f64,
    pub variance: Vec<f64>,
}

impl From<(f64, f64, Vec<f64>)> for FiberError {
    fn from((mass, error, variance): (f64, f64, Vec<f64>)) -> Self {
        FiberError { mass, error, variance }
    }
}

/// `1 + Σ mass · err / ‖√(2s/π)‖²`. With minimized invariant or equivariant
/// fiber errors this bounds GENCE of the best symmetric model.
pub fn gence_upper(fibers: &[FiberError]) -> Result<BoundReport> {
    if fibers.is_empty() {
        return Err(Error::Empty("no fibers".into()));
    }
    let total: f64 = fibers.iter().map(|f| f.mass).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::WeightsNotNormalized(total));
    }
    let mut terms = Vec::with_capacity(fibers.len());
    for f in fibers {
        if let Some(&v) = f.variance.iter().find(|&&v| !(v > crate::metrics::VARIANCE_FLOOR)) {
            return Err(Error::VarianceUnderflow { value: v, floor: crate::metrics::VARIANCE_FLOOR });
        }
        let scale: f64 = f.variance.iter().map(|s| 2.0 * s / PI).sum();
        terms.push(f.mass * f.error / scale);
    }
    let sum = pairwise_sum(&terms);
    let mut components = vec![("normalized_error_sum", sum), ("fibers", fibers.len() as f64)];
    let names: Vec<String> = (0..terms.len()).map(|i| format!("term_{i}")).collect();
    for (n, t) in names.iter().zip(&terms) {
        components.push((n.as_str(), *t));
    }
    Ok(BoundReport::new(BoundKind::GenceUpper, 1.0 + sum, &components))
}

/// `Σ_{s < m} mass · (s − m)² / s²` for scalar variances.
pub fn gence_sq_lower(values: &[f64], weights: &[f64], m: f64) -> Result<BoundReport> {
    if !(m >= 0.0) {
        return Err(Error::invalid(format!("m = {m} must be nonnegative")));
    }
    if values.len() != weights.len() {
        return Err(Error::ShapeMismatch { expected: values.len(), actual: weights.len() });
    }
    if let Some(&v) = values.iter().find(|&&v| !(v > crate::metrics::VARIANCE_FLOOR)) {
        return Err(Error::VarianceUnderflow { value: v, floor: crate::metrics::VARIANCE_FLOOR });
    }
    let terms: Vec<f64> = values
        .iter()
        .zip(weights)
        .filter(|(s, _)| **s < m)
        .map(|(s, w)| w * (s - m).powi(2) / (s * s))
        .collect();
    let integral = pairwise_sum(&terms);
    Ok(BoundReport::new(BoundKind::GenceSqLower, integral, &[("m", m), ("integral", integral)]))
}

// ─── sample complexity ───────────────────────────────────────────────────────

/// Smallest `n` with `2·exp(−2nε²) ≤ δ`.
pub fn hoeffding_n(epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0) || !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("need epsilon > 0 and 0 < delta <= 1 (got {epsilon}, {delta})")));
    }
    let n = ((2.0 / delta).ln() / (2.0 * epsilon * epsilon)).ceil();
    Ok(n.max(0.0) as u64)
}
