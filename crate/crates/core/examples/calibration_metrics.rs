//! Calibration metrics on synthetic predictions: binned ECE for a classifier
//! whose accuracy at confidence `p` is `p²`, GENCE for an exactly calibrated
//! Gaussian regressor, and aleatoric bleed of a biased variance head.
//!
//! cargo run --example calibration_metrics

use equicalib::dataset::uniform_weights;
use equicalib::generators::{calibrated_gaussian, NoiseSampling};
use equicalib::metrics::{aleatoric_bleed, ece_binned, gence, gence_sq, ClassifierOutput, FiberMode, FiberPartition, RegressorOutput};
use equicalib::rng::stream;
use rand::Rng;

fn main() -> equicalib::Result<()> {
    // ─── classification ───
    let mut rng = stream(1, 0);
    let n = 20_000;
    let mut outputs = Vec::with_capacity(n);
    let mut truths = Vec::with_capacity(n);
    for _ in 0..n {
        let p: f64 = rng.random_range(0.5..1.0);
        outputs.push(ClassifierOutput { label: 1, confidence: p });
        truths.push(usize::from(rng.random_bool(p * p)));
    }
    let w = uniform_weights(n);
    let report = ece_binned(&outputs, &truths, &w, 10)?;
    println!("overconfident classifier: ECE = {:.4} (expected about 0.167)", report.ece);
    println!("{:>6} {:>6} {:>7} {:>9} {:>10}", "lower", "upper", "count", "accuracy", "confidence");
    for b in report.bins.iter().filter(|b| b.count > 0) {
        println!("{:>6.2} {:>6.2} {:>7} {:>9.4} {:>10.4}", b.lower, b.upper, b.count, b.accuracy, b.confidence);
    }

    // ─── regression ───
    let cg = calibrated_gaussian(100_000, 1, (0.5, 2.0), 3, NoiseSampling::Stratified)?;
    let w = &cg.dataset.weights;
    let targets = cg.dataset.targets()?;
    let calibrated: Vec<RegressorOutput> =
        cg.means.iter().zip(&cg.variances).map(|(m, s)| RegressorOutput { mean: m.clone(), variance: s.clone() }).collect();
    let fibers = FiberPartition::from_vectors(&cg.variances, w, FiberMode::Exact)?;
    let g = gence(&calibrated, targets, w, &fibers)?;
    let gs = gence_sq(&calibrated, targets, w, &fibers)?;
    println!();
    println!("calibrated Gaussian, one fiber per distinct variance:");
    println!("  GENCE    = {:.4} (baseline (π−2)/2 = {:.4})", g.value, (std::f64::consts::PI - 2.0) / 2.0);
    println!("  GENCE_sq = {:.4} (baseline 2)", gs.value);

    // an overconfident head: every variance halved
    let shrunk: Vec<RegressorOutput> = calibrated
        .iter()
        .map(|o| RegressorOutput { mean: o.mean.clone(), variance: o.variance.iter().map(|s| 0.5 * s).collect() })
        .collect();
    println!("  GENCE with halved variances = {:.4}", gence(&shrunk, targets, w, &fibers)?.value);

    let pred: Vec<Vec<f64>> = shrunk.iter().map(|o| o.variance.clone()).collect();
    println!("  aleatoric bleed of the halved head = {:.4}", aleatoric_bleed(&pred, &cg.variances, w)?);
    Ok(())
}
