//! Likelihood-ratio view of a channel: the log-ratio agrees in sign with the
//! Hamming test at gamma_crit, and PLL scores a whole probe against a codebook.

use cdp_bpc::channel::{extract_channels, probe_features};
use cdp_bpc::sim::{default_codebooks, gen_template, simulate_probe};
use cdp_bpc::stats::{cross_entropy_bernoulli, gamma_crit, kl_bernoulli, np_log_ratio, pll_score, rho_for_gamma};
use cdp_bpc::ModelConfig;

fn main() -> cdp_bpc::Result<()> {
    let (p, q, l) = (0.1, 0.3, 60u64);
    let g = gamma_crit(p, q)?;
    println!("P_b = {p}, Q_b = {q}, L = {l}, gamma_crit L = {:.2}", g * l as f64);
    for d in (0..=30).step_by(3) {
        println!("  d = {d:>2}: log LR = {:>8.3}", np_log_ratio(d, l, p, q));
    }
    println!("log rho at gamma = 0.2: {:.4}", rho_for_gamma(0.2, l, p, q)?);
    println!("H(0.1; 0.2) = {:.4}, KL(0.1 || 0.2) = {:.4}", cross_entropy_bernoulli(0.1, 0.2)?, kl_bernoulli(0.1, 0.2)?);

    let cfg = ModelConfig::default();
    let (c0, c1) = default_codebooks(cfg, 3)?;
    let t = gen_template(64, 64, 3);
    for (name, cb) in [("original", &c0), ("fake", &c1)] {
        let probe = simulate_probe(&t, cb, 30);
        let f = probe_features(&extract_channels(&t, &probe, &cfg)?);
        println!(
            "{name:>8} probe: PLL vs C0 = {:>9.2}, PLL vs C1 = {:>9.2}",
            pll_score(&f, &c0)?,
            pll_score(&f, &c1)?
        );
    }
    Ok(())
}
