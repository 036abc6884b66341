//! Exact binomial tails.
//!
//! Probabilities are built from the log-space term recurrence
//! `log t_{k+1} = log t_k + log((L−k)/(k+1)) + log(p/(1−p))`, so nothing
//! overflows for large `L`. Each tail is summed from its small end.

/// All tail probabilities of `Binom(n, p)`.
#[derive(Debug, Clone)]
pub struct BinomialTails {
    n: u64,
    /// `at_most[k] = P(D ≤ k)`
    at_most: Vec<f64>,
    /// `above[k] = P(D > k)`
    above: Vec<f64>,
}

/// `P(D = k)` for `k = 0..=n`.
pub fn pmf_table(n: u64, p: f64) -> Vec<f64> {
    let len = n as usize + 1;
    let mut pmf = vec![0.0; len];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n as usize] = 1.0;
        return pmf;
    }
    let log_odds = p.ln() - (-p).ln_1p();
    let mut log_term = n as f64 * (-p).ln_1p();
    pmf[0] = log_term.exp();
    for k in 0..n {
        log_term += ((n - k) as f64 / (k + 1) as f64).ln() + log_odds;
        pmf[k as usize + 1] = log_term.exp();
    }
    pmf
}

impl BinomialTails {
    pub fn new(n: u64, p: f64) -> Self {
        let pmf = pmf_table(n, p);
        let len = pmf.len();
        let mut at_most = vec![0.0; len];
        let mut acc = 0.0;
        for (k, &t) in pmf.iter().enumerate() {
            acc += t;
            at_most[k] = acc.min(1.0);
        }
        let mut above = vec![0.0; len];
        acc = 0.0;
        for k in (0..len).rev() {
            above[k] = acc.min(1.0);
            acc += pmf[k];
        }
        Self { n, at_most, above }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `P(D ≤ k)`; 1 for `k ≥ n`.
    pub fn at_most(&self, k: u64) -> f64 {
        if k >= self.n {
            1.0
        } else {
            self.at_most[k as usize]
        }
    }

    /// `P(D > k)`; 0 for `k ≥ n`.
    pub fn above(&self, k: u64) -> f64 {
        if k >= self.n {
            0.0
        } else {
            self.above[k as usize]
        }
    }

    /// `P(D < k)`.
    pub fn below(&self, k: u64) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.at_most(k - 1)
        }
    }

    /// `P(D ≥ k)`.
    pub fn at_least(&self, k: u64) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.above(k - 1)
        }
    }
}

/// Integer cut `⌊γL⌋`.
///
/// Products `γ·L` that land within 1e-9 of an integer snap to it, so that
/// `γ = k/L` always yields `k` despite rounding in the division.
pub fn threshold_cut(gamma: f64, l: u64) -> u64 {
    let x = gamma.clamp(0.0, 1.0) * l as f64;
    let r = x.round();
    let cut = if (x - r).abs() <= 1e-9 * x.max(1.0) {
        r
    } else {
        x.floor()
    };
    (cut as u64).min(l)
}

/// Probability of miss: `P(D > ⌊γL⌋)` with `D ~ Binom(L, p_b)`.
pub fn p_miss(gamma: f64, l: u64, p_b: f64) -> f64 {
    BinomialTails::new(l, p_b).above(threshold_cut(gamma, l))
}

/// Probability of false acceptance: `P(D ≤ ⌊γL⌋)` with `D ~ Binom(L, q_b)`.
pub fn p_false_accept(gamma: f64, l: u64, q_b: f64) -> f64 {
    BinomialTails::new(l, q_b).at_most(threshold_cut(gamma, l))
}
