//! Per-channel Hamming tests: exact error tails, the critical boundary and
//! the optimal integer cut.

use cdp_bpc::stats::{gamma_crit, optimal_threshold, p_false_accept, p_miss};

fn main() -> cdp_bpc::Result<()> {
    let (p, q) = (0.1, 0.4);
    let g = gamma_crit(p, q)?;
    println!("P_b = {p}, Q_b = {q}: gamma_crit = {g:.6}");

    println!("{:>5} {:>6} {:>12} {:>12} {:>12}", "L", "cut", "P_miss", "P_fa", "P_err");
    for l in [5u64, 10, 20, 50, 100, 400] {
        let opt = optimal_threshold(l, p, q);
        println!(
            "{l:>5} {:>6} {:>12.3e} {:>12.3e} {:>12.3e}",
            opt.cut, opt.p_miss, opt.p_fa, opt.p_err
        );
        assert!(opt.cut == (g * l as f64).floor() as u64 || opt.cut == (g * l as f64).ceil() as u64);
    }

    // a fixed fraction of flips as the cut
    let l = 30;
    for gamma in [0.15, 0.25, 0.35] {
        println!(
            "L = {l}, gamma = {gamma}: P_miss = {:.4}, P_fa = {:.4}",
            p_miss(gamma, l, p),
            p_false_accept(gamma, l, q)
        );
    }
    Ok(())
}
