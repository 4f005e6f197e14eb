//! Upper and lower bounds on the expected calibration error of invariant
//! classifiers, and the sample size needed to estimate it.
//!
//! cargo run --example ece_bounds

use equicalib::bounds::{
    ece_lower, ece_upper_fiberwise, ece_upper_invariant, ece_upper_naive, hoeffding_n, m_prime, BoundReport,
    ConfidenceDensity,
};
use equicalib::generators::{permutation24, swiss_rolls};
use equicalib::group::{build_group, GroupDescriptor, DEFAULT_TOL};
use equicalib::symmetry::classification_bounds;
use equicalib::worked::worked_example;

fn show(r: &BoundReport) {
    println!("  {:<40} {:.6}", r.label, r.value);
    for f in &r.flags {
        println!("      note: {f}");
    }
}

fn main() -> equicalib::Result<()> {
    println!("naive bound for truncated normal confidences (sigma 0.1):");
    for mu in [0.25, 0.5, 0.75, 0.95] {
        let r = ConfidenceDensity::TruncatedNormal { mu, sigma: 0.1, a: 0.0, b: 1.0 };
        show(&ece_upper_naive(&r)?.labeled(format!("mu = {mu}")));
    }

    // a swiss roll where half the sectors are labeled consistently with z-swap
    let ds = swiss_rolls(0.5, 100, 1)?;
    let group = build_group(GroupDescriptor::ZSwap)?;
    let b = classification_bounds(&ds, &group, DEFAULT_TOL)?;
    let k_star = b.stats.iter().map(|s| s.majority_dissent).filter(|&k| k > 0.0).fold(f64::INFINITY, f64::min);
    let k_star = if k_star.is_finite() { k_star } else { 0.0 };
    let r = ConfidenceDensity::Uniform { a: 0.5, b: 1.0 };
    println!("\nswiss roll under z-swap, confidences uniform on [0.5, 1]:");
    println!("  invariant error lies in [{:.4}, {:.4}], k* = {k_star:.5}", b.lower, b.upper);
    show(&ece_upper_naive(&r)?);
    show(&ece_upper_invariant(&r, k_star, 1.0)?);
    show(&ece_upper_fiberwise(&r, b.lower, 1.0)?);
    show(&ece_lower(&r, 1.0 - b.upper)?);

    println!("\npermutations of a 4-point set under S4:");
    show(&m_prime(&permutation24(), &build_group(GroupDescriptor::Symmetric(4))?)?);

    println!("\nworked examples:");
    for id in ["4.1", "4.2", "4.3", "4.4"] {
        println!(" {id}");
        for r in worked_example(id, Some(0.1), None)? {
            show(&r);
        }
    }

    println!("\nsamples for |ECE estimate − ECE| <= eps with probability 1 − delta:");
    for (eps, delta) in [(0.1, 0.05), (0.05, 0.05), (0.01, 0.01)] {
        println!("  eps {eps:<5} delta {delta:<5} n = {}", hoeffding_n(eps, delta)?);
    }
    Ok(())
}
