//! Regression-side bounds: the orbit-mean error floor of invariant models,
//! the GENCE upper bound over variance fibers, and the GENCE_sq lower bound.
//!
//! cargo run --example gence_bounds

use equicalib::bounds::{gence_sq_lower, gence_upper, FiberError};
use equicalib::generators::pointcloud_gence;
use equicalib::group::{build_group, decompose_orbits, GroupDescriptor, DEFAULT_TOL};
use equicalib::symmetry::{invariant_regression_lower_bound, orbit_mean_predictor};
use equicalib::worked::example_5_1;

fn main() -> equicalib::Result<()> {
    let ex = pointcloud_gence();
    let group = build_group(GroupDescriptor::Cyclic(8))?;
    let orbits = decompose_orbits(&ex.dataset, &group, DEFAULT_TOL)?;
    println!("{} point clouds, {} orbits under 8-fold rotation", ex.dataset.len(), orbits.orbits.len());
    println!("best invariant squared error: {:.6}", invariant_regression_lower_bound(&ex.dataset, &orbits)?);
    for (name, pred) in ex.names.iter().zip(orbit_mean_predictor(&ex.dataset, &orbits)?) {
        println!("  {name:<5} orbit-mean prediction {pred:?}");
    }

    println!("\nGENCE upper bound against the variance of the first fiber:");
    for s1 in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let rows = example_5_1(s1)?;
        println!("  s1 = {s1:<4}  closed form {:.5}  mass weighted {:.5}", rows[0].value, rows[1].value);
    }

    // a hand-built two-fiber model with vector variances
    let fibers = vec![
        FiberError { mass: 0.7, error: 0.2, variance: vec![0.5, 0.5] },
        FiberError { mass: 0.3, error: 1.0, variance: vec![1.0, 2.0] },
    ];
    let up = gence_upper(&fibers)?;
    println!("\nhand-built fibers: GENCE <= {:.5}", up.value);

    let values = [0.1, 0.4, 0.9, 1.6];
    let weights = [0.25; 4];
    for m in [0.2, 0.5, 1.0] {
        println!("GENCE_sq lower bound with m = {m}: {:.5}", gence_sq_lower(&values, &weights, m)?.value);
    }
    Ok(())
}
