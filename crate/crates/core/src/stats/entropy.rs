//! Bernoulli cross-entropy, KL divergence and the posterior log-likelihood score.
//!
//! All quantities are in nats.

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::observations::ProbeFeatures;

fn check_open_unit(name: &str, q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {q} must lie in (0, 1)")))
    }
}

fn check_closed_unit(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} must lie in [0, 1]")))
    }
}

/// `x · log y` with the convention `0 · log y = 0`.
#[inline]
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `H(p; q) = −p log q − (1−p) log(1−q)`.
pub fn cross_entropy_bernoulli(p: f64, q: f64) -> Result<f64> {
    check_closed_unit("p", p)?;
    check_open_unit("q", q)?;
    Ok(-p * q.ln() - (1.0 - p) * (-q).ln_1p())
}

/// `h(p) = H(p; p)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    -xlogy(p, p) - xlogy(1.0 - p, 1.0 - p)
}

/// `KL(p ‖ q) = p log(p/q) + (1−p) log((1−p)/(1−q))`.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    check_closed_unit("p", p)?;
    check_open_unit("q", q)?;
    let a = if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    let b = if p == 1.0 {
        0.0
    } else {
        (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln()
    };
    // rounding can leave a tiny negative near p = q
    Ok((a + b).max(0.0))
}

/// `PLL(y; C) = −Σ_ω L^ω · H(p̂_ω; P_b(ω))` over channels present in the probe.
pub fn pll_score(features: &ProbeFeatures, codebook: &Codebook) -> Result<f64> {
    features.config().ensure_same(&codebook.config)?;
    let mut total = 0.0;
    for ((p_hat, &l), entry) in features
        .p_hat()
        .iter()
        .zip(features.support())
        .zip(&codebook.entries)
    {
        if let Some(p_hat) = *p_hat {
            total -= l as f64 * cross_entropy_bernoulli(p_hat, entry.p)?;
        }
    }
    Ok(total)
}
