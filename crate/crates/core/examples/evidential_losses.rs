//! Evidential (Normal-Inverse-Gamma) regression loss and the β-NLL loss,
//! with their gradients checked against central differences.
//!
//! cargo run --example evidential_losses

use equicalib::evidential::{beta_nll, evidential_nll, nig_summaries, student_t_pdf, NigParams};

fn main() -> equicalib::Result<()> {
    let p = NigParams::new(0.5, 2.0, 3.0, 1.5)?;
    let s = nig_summaries(p)?;
    println!("NIG {p:?}");
    println!("  prediction {:.4}, aleatoric {:.4}, epistemic {:.4}", s.prediction, s.aleatoric, s.epistemic);

    // the NLL is minus the log of a Student t predictive density
    let (nu_t, scale) = (2.0 * p.alpha, (p.beta * (1.0 + p.nu) / (p.nu * p.alpha)).sqrt());
    for y in [-1.0, 0.5, 2.0] {
        let (nll, g) = evidential_nll(y, p, 0.0)?;
        let t = student_t_pdf(y, p.gamma, scale, nu_t)?;
        println!("  y = {y:>4}: NLL {nll:.6}, -ln t-density {:.6}, dNLL/dγ {:.5}", -t.ln(), g.gamma);
    }

    let h = 1e-6;
    let (y, lambda) = (1.3, 0.1);
    let (_, g) = evidential_nll(y, p, lambda)?;
    let f = |q: NigParams| evidential_nll(y, q, lambda).map(|r| r.0);
    let fd = [
        (f(NigParams { gamma: p.gamma + h, ..p })? - f(NigParams { gamma: p.gamma - h, ..p })?) / (2.0 * h),
        (f(NigParams { nu: p.nu + h, ..p })? - f(NigParams { nu: p.nu - h, ..p })?) / (2.0 * h),
        (f(NigParams { alpha: p.alpha + h, ..p })? - f(NigParams { alpha: p.alpha - h, ..p })?) / (2.0 * h),
        (f(NigParams { beta: p.beta + h, ..p })? - f(NigParams { beta: p.beta - h, ..p })?) / (2.0 * h),
    ];
    println!("\nregularized loss gradient (analytic vs central difference):");
    for (name, (a, n)) in ["gamma", "nu", "alpha", "beta"].iter().zip([g.gamma, g.nu, g.alpha, g.beta].into_iter().zip(fd)) {
        println!("  {name:<5} {a:>12.8} {n:>12.8}");
    }

    println!("\nβ-NLL at y = 1, μ = 0.4, σ² = 0.8:");
    for b in [0.0, 0.5, 1.0] {
        let (loss, dm, ds) = beta_nll(1.0, 0.4, 0.8, b)?;
        println!("  β = {b}: loss {loss:.5}, d/dμ {dm:.5}, d/dσ² {ds:.5}");
    }
    Ok(())
}
