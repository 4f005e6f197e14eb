//! Evidential regression: Student-t density, Normal-Inverse-Gamma summaries,
//! the evidential loss and β-NLL, all with analytic gradients.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

/// Student-t density with location `mu`, scale `sigma` and `nu_df` degrees of freedom.
pub fn student_t_pdf(t: f64, mu: f64, sigma: f64, nu_df: f64) -> Result<f64> {
    if !(sigma > 0.0 && nu_df > 0.0) {
        return Err(Error::invalid(format!("student t needs sigma > 0 and nu > 0 (got {sigma}, {nu_df})")));
    }
    let z = (t - mu) / sigma;
    let log_norm = ln_gamma((nu_df + 1.0) / 2.0) - ln_gamma(nu_df / 2.0) - 0.5 * (PI * nu_df).ln() - sigma.ln();
    Ok((log_norm - (nu_df + 1.0) / 2.0 * (z * z / nu_df).ln_1p()).exp())
}

/// Normal-Inverse-Gamma parameters `(γ, ν, α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NigParams {
    pub gamma: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl NigParams {
    pub fn new(gamma: f64, nu: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = NigParams { gamma, nu, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.alpha > 1.0 && self.beta > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "NIG parameters need nu > 0, alpha > 1, beta > 0 (got {:?})",
                self
            )));
        }
        Ok(())
    }

    /// Parameters from unconstrained head outputs: `γ = raw0`,
    /// `ν = softplus(raw1)`, `α = 1 + softplus(raw2)`, `β = softplus(raw3)`.
    pub fn from_raw(raw: [f64; 4]) -> Self {
        NigParams {
            gamma: raw[0],
            nu: softplus(raw[1]),
            alpha: 1.0 + softplus(raw[2]),
            beta: softplus(raw[3]),
        }
    }

    /// Chain rule from a gradient in `(γ, ν, α, β)` to one in the raw outputs.
    pub fn raw_gradient(raw: [f64; 4], grad: NigGradient) -> [f64; 4] {
        [
            grad.gamma,
            grad.nu * sigmoid(raw[1]),
            grad.alpha * sigmoid(raw[2]),
            grad.beta * sigmoid(raw[3]),
        ]
    }
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintySummary {
    pub prediction: f64,
    pub aleatoric: f64,
    pub epistemic: f64,
}

/// Prediction `γ`, aleatoric `β/(α−1)` and epistemic `β/(ν(α−1))` uncertainty.
pub fn nig_summaries(p: NigParams) -> Result<UncertaintySummary> {
    p.validate()?;
    let aleatoric = p.beta / (p.alpha - 1.0);
    Ok(UncertaintySummary { prediction: p.gamma, aleatoric, epistemic: aleatoric / p.nu })
}

/// Gradient of a loss with respect to the NIG parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NigGradient {
    pub gamma: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Evidential loss `L_NLL + λ·|y − γ|·(2ν + α)` and its gradient.
pub fn evidential_nll(y: f64, p: NigParams, lambda_reg: f64) -> Result<(f64, NigGradient)> {
    p.validate()?;
    let NigParams { gamma, nu, alpha, beta } = p;
    let r = y - gamma;
    let omega = 2.0 * beta * (1.0 + nu);
    let d = r * r * nu + omega;
    let a_half = alpha + 0.5;
    let nll = 0.5 * (PI / nu).ln() - alpha * omega.ln() + a_half * d.ln() + ln_gamma(alpha) - ln_gamma(a_half);
    let mut g = NigGradient {
        gamma: -a_half * 2.0 * r * nu / d,
        nu: -0.5 / nu - alpha * 2.0 * beta / omega + a_half * (r * r + 2.0 * beta) / d,
        alpha: -omega.ln() + d.ln() + digamma(alpha) - digamma(a_half),
        beta: -alpha / beta + a_half * 2.0 * (1.0 + nu) / d,
    };
    let reg = r.abs() * (2.0 * nu + alpha);
    // the |·| subgradient at zero is taken to be zero
    let sign = if r > 0.0 { 1.0 } else if r < 0.0 { -1.0 } else { 0.0 };
    g.gamma += lambda_reg * -sign * (2.0 * nu + alpha);
    g.nu += lambda_reg * 2.0 * r.abs();
    g.alpha += lambda_reg * r.abs();
    Ok((nll + lambda_reg * reg, g))
}

/// β-NLL `⌊(σ²)^β⌋·(½ log σ² + (y − μ)²/(2σ²))` with the bracketed factor
/// held constant. Returns the loss and its gradients in `μ` and `σ²`.
pub fn beta_nll(y: f64, mu: f64, sigma2: f64, beta_exp: f64) -> Result<(f64, f64, f64)> {
    if !(sigma2 > 0.0) {
        return Err(Error::invalid(format!("variance {sigma2} must be positive")));
    }
    if !(0.0..=1.0).contains(&beta_exp) {
        return Err(Error::invalid(format!("beta exponent {beta_exp} must lie in [0, 1]")));
    }
    let f = sigma2.powf(beta_exp);
    let r = y - mu;
    let loss = f * (0.5 * sigma2.ln() + r * r / (2.0 * sigma2));
    let d_mu = f * (mu - y) / sigma2;
    let d_s2 = f * (0.5 / sigma2 - r * r / (2.0 * sigma2 * sigma2));
    Ok((loss, d_mu, d_s2))
}
