//! Builds the supported groups, splits datasets into orbits and prints the
//! error bounds that hold for every invariant classifier.
//!
//! cargo run --example group_orbits

use equicalib::generators::{circle20, permutation24, swiss_rolls};
use equicalib::group::{build_group, decompose_orbits, GroupDescriptor, DEFAULT_TOL};
use equicalib::symmetry::classification_bounds;

fn main() -> equicalib::Result<()> {
    for text in ["cyclic:4", "dihedral:3", "reflect-x", "z-swap", "symmetric:4"] {
        let group = build_group(text.parse::<GroupDescriptor>()?)?;
        group.verify()?;
        println!("{text:<12} order {}", group.order());
    }

    let cases = [
        ("circle20", circle20(), GroupDescriptor::ReflectX),
        ("circle20", circle20(), GroupDescriptor::Cyclic(20)),
        ("swiss(0.5)", swiss_rolls(0.5, 50, 0)?, GroupDescriptor::ZSwap),
        ("permutation24", permutation24(), GroupDescriptor::Symmetric(4)),
    ];
    println!();
    for (name, ds, descriptor) in cases {
        let group = build_group(descriptor)?;
        let orbits = decompose_orbits(&ds, &group, DEFAULT_TOL)?;
        let bounds = classification_bounds(&ds, &group, DEFAULT_TOL)?;
        let largest = orbits.orbits.iter().map(Vec::len).max().unwrap_or(0);
        println!(
            "{name:<14} under {:<11} {:>4} points, {:>3} orbits (largest {largest:>2}); error in [{:.4}, {:.4}]",
            descriptor.to_string(),
            ds.len(),
            orbits.orbits.len(),
            bounds.lower,
            bounds.upper
        );
        for w in bounds.warnings() {
            println!("    warning: {w}");
        }
    }
    Ok(())
}
