//! Per-channel Hamming-distance test: optimal integer cut and the closed-form boundary.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::binomial::BinomialTails;
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::model::PatternId;

/// Which side of the cut votes "fake".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `P_b ≤ Q_b`: fake iff `D > k`.
    FakeAbove,
    /// `P_b > Q_b`: fake iff `D < k`.
    FakeBelow,
}

impl Direction {
    pub fn for_channel(p_b: f64, q_b: f64) -> Self {
        if p_b <= q_b {
            Direction::FakeAbove
        } else {
            Direction::FakeBelow
        }
    }

    /// Vote of one channel with flip count `d` against the integer cut `k`.
    pub fn votes_fake(self, d: u64, k: u64) -> bool {
        match self {
            Direction::FakeAbove => d > k,
            Direction::FakeBelow => d < k,
        }
    }
}

/// Minimizer of `(P_m + P_fa) / 2` over integer cuts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalThreshold {
    pub cut: u64,
    pub gamma: f64,
    pub direction: Direction,
    pub p_miss: f64,
    pub p_fa: f64,
    pub p_err: f64,
}

// Relative slack when comparing candidate errors; sums of complementary tails of
// one law differ from 1/2 only by rounding and must count as ties.
const TIE_RTOL: f64 = 1e-12;

/// Exhaustive search over `k ∈ {0, …, L}`, `γ = k/L`, ties toward the smallest `k`.
///
/// `P_err` is a step function of `⌊γL⌋`, so the integer search is exact.
pub fn optimal_threshold(l: u64, p_b: f64, q_b: f64) -> OptimalThreshold {
    let orig = BinomialTails::new(l, p_b);
    let fake = BinomialTails::new(l, q_b);
    let direction = Direction::for_channel(p_b, q_b);
    let errors = |k: u64| match direction {
        Direction::FakeAbove => (orig.above(k), fake.at_most(k)),
        Direction::FakeBelow => (orig.below(k), fake.at_least(k)),
    };
    let (m0, f0) = errors(0);
    let mut best = (0u64, m0, f0, 0.5 * (m0 + f0));
    for k in 1..=l {
        let (m, f) = errors(k);
        let e = 0.5 * (m + f);
        if e < best.3 * (1.0 - TIE_RTOL) {
            best = (k, m, f, e);
        }
    }
    let (cut, p_miss, p_fa, p_err) = best;
    OptimalThreshold {
        cut,
        gamma: if l == 0 { 0.0 } else { cut as f64 / l as f64 },
        direction,
        p_miss,
        p_fa,
        p_err,
    }
}

/// Boundary where both channel likelihoods are equal:
/// `(1 + (log p_b − log q_b) / (log(1−q_b) − log(1−p_b)))⁻¹`, independent of `L`.
pub fn gamma_crit(p_b: f64, q_b: f64) -> Result<f64> {
    for (name, v) in [("p_b", p_b), ("q_b", q_b)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    if p_b == q_b {
        return Err(Error::DegenerateChannel(p_b));
    }
    // Pairs mirrored about 1/2 have equal log-ratios; the closed form only misses
    // 0.5 there through the rounding of 1 − q.
    if ((p_b + q_b) - 1.0).abs() <= f64::EPSILON {
        return Ok(0.5);
    }
    let log_ratio = p_b.ln() - q_b.ln();
    let log_ratio_c = (-q_b).ln_1p() - (-p_b).ln_1p();
    Ok(log_ratio_c / (log_ratio + log_ratio_c))
}

/// Error profile of one channel under the optimal Hamming-distance test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelErrorProfile {
    pub pattern: PatternId,
    pub p_b: f64,
    pub q_b: f64,
    pub l: u64,
    /// `None` for non-informative channels (`p_b = q_b`).
    pub gamma_crit: Option<f64>,
    pub gamma_opt: f64,
    pub cut: u64,
    pub direction: Direction,
    pub p_miss: f64,
    pub p_fa: f64,
    pub p_err: f64,
}

impl ChannelErrorProfile {
    pub fn compute(pattern: PatternId, l: u64, p_b: f64, q_b: f64) -> Self {
        let opt = optimal_threshold(l, p_b, q_b);
        Self {
            pattern,
            p_b,
            q_b,
            l,
            gamma_crit: gamma_crit(p_b, q_b).ok(),
            gamma_opt: opt.gamma,
            cut: opt.cut,
            direction: opt.direction,
            p_miss: opt.p_miss,
            p_fa: opt.p_fa,
            p_err: opt.p_err,
        }
    }

    /// Informative channels have distinct reference laws after clamping.
    pub fn is_informative(&self) -> bool {
        self.p_b != self.q_b
    }
}

/// Profiles of every channel of a codebook pair, with `L^ω` given per channel.
pub fn channel_profiles(
    c0: &Codebook,
    c1: &Codebook,
    support: &[u64],
) -> Result<Vec<ChannelErrorProfile>> {
    c0.config.ensure_same(&c1.config)?;
    if support.len() != c0.len() {
        return Err(Error::Dimension {
            expected: format!("{} support values", c0.len()),
            actual: format!("{}", support.len()),
        });
    }
    Ok((0..c0.len())
        .into_par_iter()
        .map(|w| {
            ChannelErrorProfile::compute(
                PatternId(w as u32),
                support[w],
                c0.entries[w].p,
                c1.entries[w].p,
            )
        })
        .collect())
}

/// Average per-image occurrences of each channel in a codebook pooled over `images` pairs.
pub fn mean_support(codebook: &Codebook, images: usize) -> Vec<u64> {
    let n = images.max(1) as f64;
    codebook
        .entries
        .iter()
        .map(|e| (e.occurrences as f64 / n).round() as u64)
        .collect()
}

pub const PROFILE_CSV_HEADER: &str = "pattern_id,p_b,q_b,L,gamma_crit,gamma_opt,p_miss,p_fa,p_err";

fn push_profile_fields(out: &mut String, p: &ChannelErrorProfile) {
    let gc = p.gamma_crit.map_or_else(String::new, |g| format!("{g:.10}"));
    write!(
        out,
        "{},{:e},{:e},{},{},{:.10},{:e},{:e},{:e}",
        p.pattern, p.p_b, p.q_b, p.l, gc, p.gamma_opt, p.p_miss, p.p_fa, p.p_err
    )
    .unwrap();
}

/// Channel profile export; non-informative channels leave `gamma_crit` empty.
pub fn profiles_to_csv(profiles: &[ChannelErrorProfile]) -> String {
    let mut out = String::from("# cdp-bpc channel-profile v1\n");
    out.push_str(PROFILE_CSV_HEADER);
    out.push('\n');
    for p in profiles {
        push_profile_fields(&mut out, p);
        out.push('\n');
    }
    out
}

/// Profile export with an extra column holding the measured per-channel error.
pub fn profiles_with_empirical_csv(profiles: &[ChannelErrorProfile], empirical: &[f64]) -> String {
    let mut out = String::from("# cdp-bpc fig2 v1\n");
    out.push_str(PROFILE_CSV_HEADER);
    out.push_str(",p_err_empirical\n");
    for (p, e) in profiles.iter().zip(empirical) {
        push_profile_fields(&mut out, p);
        writeln!(out, ",{e:e}").unwrap();
    }
    out
}

pub fn write_profiles_csv(path: &Path, profiles: &[ChannelErrorProfile]) -> Result<()> {
    crate::pnm::write_atomic(path, profiles_to_csv(profiles).as_bytes())
}
