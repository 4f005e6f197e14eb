//! Fits unconstrained and radially equivariant heteroscedastic regressors to
//! noiseless planar vector fields. A field the radial model cannot express
//! shows up as predicted variance (aleatoric bleed) rather than as bias.
//!
//! cargo run --release --example vector_field_bleed [epochs] [seeds]
//!
//! Without arguments the default training schedule is used with two seeds.

use equicalib::generators::VectorFieldKind;
use equicalib::models::experiments::{run_vectorfield_experiment, VectorFieldConfig};
use equicalib::models::VectorModelKind;
use equicalib::rng::child_seed;

fn main() -> equicalib::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("expected an integer"));
    let epochs = args.next();
    let n_seeds = args.next().unwrap_or(2);

    let mut cfg = VectorFieldConfig::default();
    if let Some(e) = epochs {
        cfg.model.train.epochs = e;
    }
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| child_seed(0, i)).collect();

    for kind in [VectorFieldKind::Spiral, VectorFieldKind::Sinusoidal] {
        let report = run_vectorfield_experiment(kind, &seeds, &cfg)?;
        println!("{kind:?}");
        for model in [VectorModelKind::Unconstrained, VectorModelKind::RadialEquivariant] {
            println!(
                "  {:<13} mse {:.5}  bleed {:.5}  beta-nll {:>8.4}",
                model.to_string(),
                report.mean_of(model, |r| r.mse),
                report.mean_of(model, |r| r.bleed),
                report.mean_of(model, |r| r.beta_nll)
            );
        }
        println!("  per-angle MSE (radial model):");
        for row in report.per_angle.iter().filter(|r| r.model == VectorModelKind::RadialEquivariant) {
            println!("    [{:>6.3}, {:>6.3}) {:.5}", row.angle_lo, row.angle_hi, row.mse);
        }
    }
    Ok(())
}
