//! Likelihood-ratio test between the original and fake channel laws.
//!
//! The per-channel operating point is `ρ = 1` (`log ρ = 0`): both likelihoods
//! equal. In flip-rate space that boundary sits at `gamma_crit`.

use super::entropy::{cross_entropy_bernoulli, kl_bernoulli};
use crate::error::{Error, Result};

/// `H(p̂; Q_b) − H(p̂; P_b)`: the expected normalized log-likelihood ratio at flip rate `p̂`.
///
/// `p_b` and `q_b` must be clamped away from 0 and 1.
pub fn np_statistic(p_hat: f64, p_b: f64, q_b: f64) -> Result<f64> {
    Ok(cross_entropy_bernoulli(p_hat, q_b)? - cross_entropy_bernoulli(p_hat, p_b)?)
}

/// `(1/L) log R = (D/L) log(p_b/q_b) + ((L−D)/L) log((1−p_b)/(1−q_b))`.
pub fn np_log_ratio(d: u64, l: u64, p_b: f64, q_b: f64) -> f64 {
    debug_assert!(d <= l && l >= 1);
    if p_b == q_b {
        return 0.0;
    }
    let rate = d as f64 / l as f64;
    let flip_term = if d == 0 { 0.0 } else { rate * (p_b.ln() - q_b.ln()) };
    let keep_term = if d == l {
        0.0
    } else {
        (1.0 - rate) * ((-p_b).ln_1p() - (-q_b).ln_1p())
    };
    flip_term + keep_term
}

/// `log ρ = L · (KL(γ‖q_b) − KL(γ‖p_b))`: the likelihood-ratio threshold matching a
/// Hamming cut at `γ`. Defined for `p_b ≤ q_b`.
pub fn rho_for_gamma(gamma: f64, l: u64, p_b: f64, q_b: f64) -> Result<f64> {
    if p_b > q_b {
        return Err(Error::Ordering { p_b, q_b });
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    Ok(l as f64 * (kl_bernoulli(gamma, q_b)? - kl_bernoulli(gamma, p_b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::threshold::gamma_crit;

    #[test]
    fn statistic_at_reference_rates_is_kl() {
        let (p, q) = (0.1, 0.4);
        let at_p = np_statistic(p, p, q).unwrap();
        let at_q = np_statistic(q, p, q).unwrap();
        assert!((at_p - kl_bernoulli(p, q).unwrap()).abs() < 1e-15);
        assert!((at_q + kl_bernoulli(q, p).unwrap()).abs() < 1e-15);
        for x in [0.0, 0.2, 1.0] {
            assert_eq!(np_statistic(x, 0.3, 0.3).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_ratio_frozen_and_consistent() {
        // log(0.9 / 0.6)
        assert!((np_log_ratio(0, 10, 0.1, 0.4) - 0.4054651081081644).abs() < 1e-15);
        for d in 0..=40 {
            let lr = np_log_ratio(d, 40, 0.1, 0.4);
            let st = np_statistic(d as f64 / 40.0, 0.1, 0.4).unwrap();
            assert!((lr - st).abs() < 1e-14);
            assert_eq!(np_log_ratio(d, 40, 0.2, 0.2), 0.0);
        }
    }

    #[test]
    fn log_ratio_decreases_in_flips() {
        let mut prev = f64::INFINITY;
        for d in 0..=100 {
            let lr = np_log_ratio(d, 100, 0.05, 0.3);
            assert!(lr < prev);
            prev = lr;
        }
    }

    #[test]
    fn rho_vanishes_at_gamma_crit() {
        for &(p, q) in &[(0.1, 0.4), (0.01, 0.05), (0.2, 0.6)] {
            let g = gamma_crit(p, q).unwrap();
            assert!(rho_for_gamma(g, 100, p, q).unwrap().abs() < 1e-12);
            let below = np_log_ratio((g * 100.0).floor() as u64, 100, p, q);
            let above = np_log_ratio((g * 100.0).floor() as u64 + 1, 100, p, q);
            assert!(below > 0.0 && above < 0.0);
        }
    }

    #[test]
    fn rho_at_reference_rates() {
        let (p, q, l) = (0.1, 0.4, 50);
        let at_p = rho_for_gamma(p, l, p, q).unwrap();
        let at_q = rho_for_gamma(q, l, p, q).unwrap();
        assert!((at_p - l as f64 * kl_bernoulli(p, q).unwrap()).abs() < 1e-12);
        assert!((at_q + l as f64 * kl_bernoulli(q, p).unwrap()).abs() < 1e-12);
        assert!(at_p > 0.0 && at_q < 0.0);
    }

    #[test]
    fn rho_requires_ordering() {
        assert!(matches!(rho_for_gamma(0.2, 10, 0.4, 0.1), Err(Error::Ordering { .. })));
        assert!(rho_for_gamma(0.0, 10, 0.1, 0.4).is_err());
    }
}
