//! Reproductions of the textbook calibration-bound examples, each computed
//! from its generated dataset rather than from hard-coded answers.

use std::f64::consts::PI;

use crate::bounds::{
    deepsets_lipschitz, ece_lower_lipschitz, ece_upper_binary, ece_upper_invariant, ece_upper_naive, gence_upper,
    m_prime, BoundKind, BoundReport, ConfidenceDensity, FiberError,
};
use crate::error::{Error, Result};
use crate::generators::{circle20, circle20_halves, permutation24, pointcloud_gence};
use crate::group::{build_group, decompose_orbits, GroupDescriptor, DEFAULT_TOL};
use crate::symmetry::{fiber_dissent, invariant_regression_lower_bound};

/// Nominal inverse Lipschitz coefficient of the DeepSets example.
pub const NOMINAL_DEEPSETS_COEFFICIENT: f64 = 0.03;

pub const EXAMPLE_IDS: [&str; 5] = ["4.1", "4.2", "4.3", "4.4", "5.1"];

/// Runs one worked example. `k_star` is required by `4.1`; `s1` defaults to 1.
pub fn worked_example(id: &str, k_star: Option<f64>, s1: Option<f64>) -> Result<Vec<BoundReport>> {
    match id {
        "4.1" => example_4_1(k_star.ok_or_else(|| Error::invalid("example 4.1 needs --k-star"))?),
        "4.2" => example_4_2(),
        "4.3" => example_4_3(),
        "4.4" => example_4_4(),
        "5.1" => example_5_1(s1.unwrap_or(1.0)),
        _ => Err(Error::invalid(format!("unknown example `{id}` (expected one of {})", EXAMPLE_IDS.join(", ")))),
    }
}

/// Unit-square confidences with truncated normal density, σ = 0.1: the
/// naive bound for three means, then the invariant bound for `k_star`.
pub fn example_4_1(k_star: f64) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for mu in [0.25, 0.5, 0.75] {
        let r = ConfidenceDensity::TruncatedNormal { mu, sigma: 0.1, a: 0.0, b: 1.0 };
        out.push(ece_upper_naive(&r)?.labeled(format!("naive mu={mu}")));
    }
    for mu in [0.25, 0.5, 0.75] {
        let r = ConfidenceDensity::TruncatedNormal { mu, sigma: 0.1, a: 0.0, b: 1.0 };
        out.push(ece_upper_invariant(&r, k_star, 1.0)?.labeled(format!("invariant mu={mu}")));
    }
    Ok(out)
}

fn binary_from_fibers(label: &str, descriptor: GroupDescriptor, fibers: &[Vec<usize>]) -> Result<BoundReport> {
    let ds = circle20();
    let group = build_group(descriptor)?;
    let per_fiber = fiber_dissent(&ds, &group, fibers, DEFAULT_TOL)?;
    let m = per_fiber.iter().map(|f| f.majority).fold(f64::INFINITY, f64::min);
    let mut rep = ece_upper_binary(m)?.labeled(label);
    rep.components.insert("fibers".into(), fibers.len() as f64);
    for (i, f) in per_fiber.iter().enumerate() {
        rep.components.insert(format!("fiber_{i}_dissent"), f.majority);
    }
    Ok(rep)
}

/// Circle of 20 points under the x-axis reflection, with the confidence head
/// constant on each half or on the whole circle.
pub fn example_4_2() -> Result<Vec<BoundReport>> {
    let ds = circle20();
    let halves = circle20_halves(&ds);
    let two: Vec<Vec<usize>> = (0..2).map(|h| (0..ds.len()).filter(|&i| halves[i] == h).collect()).collect();
    let one = vec![(0..ds.len()).collect::<Vec<_>>()];
    Ok(vec![
        binary_from_fibers("reflect-x, two fibers", GroupDescriptor::ReflectX, &two)?,
        binary_from_fibers("reflect-x, one fiber", GroupDescriptor::ReflectX, &one)?,
    ])
}

/// The same circle under the 20-fold rotation group: a single orbit.
pub fn example_4_3() -> Result<Vec<BoundReport>> {
    let one = vec![(0..20).collect::<Vec<_>>()];
    Ok(vec![binary_from_fibers("cyclic:20, one fiber", GroupDescriptor::Cyclic(20), &one)?])
}

/// All orderings of a 4-point set under S4: `m'` and the Lipschitz lower
/// bound, with both the nominal coefficient and the exact singular values.
pub fn example_4_4() -> Result<Vec<BoundReport>> {
    let ds = permutation24();
    let group = build_group(GroupDescriptor::Symmetric(4))?;
    let mp = m_prime(&ds, &group)?;
    let min_mass = mp.component("min_orbit_mass")?;
    let exact = deepsets_lipschitz(ds.len())?;
    let nominal = ece_lower_lipschitz(1.0 / NOMINAL_DEEPSETS_COEFFICIENT, mp.value, min_mass)?
        .labeled("lower, nominal coefficient 0.03");
    let mut exact_rep = ece_lower_lipschitz(exact.k, mp.value, min_mass)?
        .labeled("lower, exact singular values")
        .flag(format!(
            "discrepancy: composing the layer norms gives 1/K = {:.5}, not the nominal {NOMINAL_DEEPSETS_COEFFICIENT}",
            1.0 / exact.k
        ));
    exact_rep.components.insert("sigma_pool".into(), exact.sigma_pool);
    exact_rep.components.insert("sigma_ones".into(), exact.sigma_ones);
    Ok(vec![mp.labeled("m_prime"), nominal, exact_rep])
}

/// Point clouds under 8-fold rotation with two variance fibers. The first
/// row uses the closed form `1 + err(s1)/‖√(2s1/π)‖²`; the
/// second applies the fiber masses as the general bound does.
pub fn example_5_1(s1: f64) -> Result<Vec<BoundReport>> {
    if !(s1 > 0.0) {
        return Err(Error::invalid(format!("s1 = {s1} must be positive")));
    }
    let ex = pointcloud_gence();
    let group = build_group(GroupDescriptor::Cyclic(8))?;
    let mut fibers = Vec::new();
    for f in 0..2 {
        let members: Vec<usize> = (0..ex.dataset.len()).filter(|&i| ex.fibers[i] == f).collect();
        let mass: f64 = members.iter().map(|&i| ex.dataset.weights[i]).sum();
        let sub = ex.dataset.subset(&members)?;
        let orbits = decompose_orbits(&sub, &group, DEFAULT_TOL)?;
        let error = invariant_regression_lower_bound(&sub, &orbits)?;
        fibers.push(FiberError { mass, error, variance: vec![s1] });
    }
    let err_s1 = fibers[0].error;
    let closed = BoundReport {
        kind: BoundKind::GenceUpperClosedForm,
        label: "gence upper, closed form".into(),
        value: 1.0 + err_s1 / (2.0 * s1 / PI),
        components: [
            ("err_s1".to_string(), err_s1),
            ("err_s2".to_string(), fibers[1].error),
            ("mass_s1".to_string(), fibers[0].mass),
            ("mass_s2".to_string(), fibers[1].mass),
            ("s1".to_string(), s1),
        ]
        .into_iter()
        .collect(),
        flags: vec!["discrepancy: the closed form omits the 0.5 fiber mass of s1; the general bound is the next row".into()],
    };
    let general = gence_upper(&fibers)?.labeled("gence upper, fiber-mass weighted");
    Ok(vec![closed, general])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_examples_audit() {
        for id in EXAMPLE_IDS {
            for rep in worked_example(id, Some(0.1), Some(1.0)).unwrap() {
                rep.audit().unwrap();
            }
        }
        assert!(worked_example("4.1", None, None).is_err());
        assert!(worked_example("9.9", None, None).is_err());
    }

    #[test]
    fn circle_values() {
        let r = example_4_2().unwrap();
        assert!((r[0].value - 0.9).abs() < 1e-12);
        assert!((r[1].value - 0.7).abs() < 1e-12);
        assert!((example_4_3().unwrap()[0].value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn pointcloud_errors() {
        let r = example_5_1(1.0).unwrap();
        assert!((r[0].component("err_s1").unwrap() - PI / 8.0).abs() < 1e-12);
        assert_eq!(r[0].component("err_s2").unwrap(), 0.0);
        assert!((r[0].value - (1.0 + PI * PI / 16.0)).abs() < 1e-12);
        assert!((r[1].value - (1.0 + PI * PI / 32.0)).abs() < 1e-12);
    }
}
