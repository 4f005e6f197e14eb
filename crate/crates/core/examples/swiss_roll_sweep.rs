//! Trains z-swap invariant and unconstrained classifiers on swiss rolls whose
//! labels agree with the symmetry on a growing share of sectors, and prints
//! accuracy, calibration and the accuracy range allowed by the orbit bounds.
//!
//! cargo run --release --example swiss_roll_sweep [epochs] [seeds]
//!
//! Without arguments the default training schedule is used with two seeds.

use equicalib::models::experiments::{run_swissroll_sweep, summarize_sweep, SwissConfig};
use equicalib::rng::child_seed;

fn main() -> equicalib::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("expected an integer"));
    let epochs = args.next();
    let n_seeds = args.next().unwrap_or(2);

    let mut cfg = SwissConfig::default();
    if let Some(e) = epochs {
        cfg.invariant.train.epochs = e;
        cfg.unconstrained.train.epochs = e;
    }
    let ratios = [0.0, 0.25, 0.5, 0.75, 1.0];
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| child_seed(0, i)).collect();
    let rows = run_swissroll_sweep(&ratios, &seeds, &cfg)?;

    println!("{:>5} {:>6} {:<13} {:>6} {:>6} {:>14}", "ratio", "seed", "model", "acc", "ece", "bound on acc");
    for r in &rows {
        println!(
            "{:>5} {:>6} {:<13} {:>6.3} {:>6.3}   [{:.3}, {:.3}]",
            r.ratio,
            r.seed % 1_000_000,
            r.model,
            r.acc,
            r.ece,
            r.lb,
            r.ub
        );
    }
    println!("\nmeans over seeds:");
    for s in summarize_sweep(&rows) {
        println!("  ratio {:<5} {:<13} acc {:.3}  ece {:.3}", s.ratio, s.model, s.acc, s.ece);
    }
    Ok(())
}
