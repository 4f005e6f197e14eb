//! Orbit statistics and the error floors of invariant and equivariant
//! regressors on vector fields sampled on group-closed rings in the plane z = 0.
//!
//! cargo run --example symmetry_analysis

use equicalib::dataset::{uniform_weights, PointKind, WeightedDataset};
use equicalib::generators::{vector_field_target, VectorFieldKind};
use equicalib::group::{build_group, decompose_orbits, FiniteGroup, GroupDescriptor, Side, DEFAULT_TOL};
use equicalib::symmetry::{equivariant_orbit_lower_bound, invariant_regression_lower_bound, orbit_stats};

/// Orbits of a few base points under `group`, labeled with the field.
fn ring(kind: VectorFieldKind, group: &FiniteGroup) -> equicalib::Result<WeightedDataset> {
    let mut points = Vec::new();
    for (r, t) in [(0.5, 0.1), (1.0, 0.3), (1.5, 0.2), (1.8, 0.7)] {
        let base = [r * f64::cos(t), r * f64::sin(t), 0.0];
        for g in 0..group.order() {
            points.push(group.apply(g, &base, Side::Input, PointKind::Vector { dim: 3 })?);
        }
    }
    let targets = points.iter().map(|p| vector_field_target(kind, p)).collect();
    let n = points.len();
    WeightedDataset::new(PointKind::Vector { dim: 3 }, points, None, Some(targets), uniform_weights(n))
}

fn main() -> equicalib::Result<()> {
    for descriptor in [GroupDescriptor::Cyclic(4), GroupDescriptor::Dihedral(4)] {
        // planar actions lifted to act on (x, y, z)
        let group = build_group(descriptor)?.embedded(3)?;
        let equivariant = group.clone().with_output_from_input()?;
        println!("{descriptor}");
        for kind in [VectorFieldKind::Spiral, VectorFieldKind::Sinusoidal] {
            let ds = ring(kind, &group)?;
            let orbits = decompose_orbits(&ds, &group, DEFAULT_TOL)?;
            let stats = orbit_stats(&ds, &orbits)?;
            let spread = stats.iter().filter_map(|s| s.target_variance).fold(0.0, f64::max);
            println!(
                "  {kind:?}: {} orbits, largest target variance in an orbit {spread:.4}",
                orbits.orbits.len()
            );
            println!("    invariant error floor   {:.6}", invariant_regression_lower_bound(&ds, &orbits)?);
            println!("    equivariant error floor {:.6}", equivariant_orbit_lower_bound(&ds, &equivariant, DEFAULT_TOL)?);
        }
    }
    Ok(())
}
