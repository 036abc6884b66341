//! Per-channel theory-versus-simulation check of the Hamming-distance test.

use rand::Rng;
use rayon::prelude::*;

use super::rng::{stream, Role};
use crate::codebook::Codebook;
use crate::error::Result;
use crate::model::PatternId;
use crate::stats::threshold::ChannelErrorProfile;

/// Predicted and measured error of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Point {
    pub profile: ChannelErrorProfile,
    pub empirical_p_err: f64,
    /// Monte-Carlo standard error of `empirical_p_err` around the prediction.
    pub std_error: f64,
}

impl Fig2Point {
    /// Distance between measurement and prediction in standard errors.
    pub fn z(&self) -> f64 {
        let diff = (self.empirical_p_err - self.profile.p_err).abs();
        if self.std_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / self.std_error
        }
    }
}

fn draw_flips<R: Rng>(rng: &mut R, l: u64, p: f64) -> u64 {
    (0..l).filter(|_| rng.random::<f64>() < p).count() as u64
}

/// For every informative channel, compare the optimal-cut error predicted by
/// the binomial model with the error measured on `n_probes` simulated flip
/// counts per class, classified by that same cut.
///
/// The standard error is `sqrt(P_err (1 − P_err) / n_probes)`. Channel `ω`
/// draws from its own stream, so results do not depend on thread scheduling.
pub fn fig2_experiment(
    c0: &Codebook,
    c1: &Codebook,
    l_per_channel: u64,
    n_probes: usize,
    seed: u64,
) -> Result<Vec<Fig2Point>> {
    c0.config.ensure_same(&c1.config)?;
    let points = (0..c0.len())
        .into_par_iter()
        .filter(|&w| c0.entries[w].p != c1.entries[w].p)
        .map(|w| {
            let (p, q) = (c0.entries[w].p, c1.entries[w].p);
            let profile = ChannelErrorProfile::compute(PatternId(w as u32), l_per_channel, p, q);
            let mut rng = stream(seed, w as u64, Role::Channel, 0);
            let mut misses = 0usize;
            let mut accepts = 0usize;
            for _ in 0..n_probes {
                if profile.direction.votes_fake(draw_flips(&mut rng, l_per_channel, p), profile.cut) {
                    misses += 1;
                }
                if !profile.direction.votes_fake(draw_flips(&mut rng, l_per_channel, q), profile.cut) {
                    accepts += 1;
                }
            }
            let n = n_probes.max(1) as f64;
            Fig2Point {
                profile,
                empirical_p_err: 0.5 * (misses as f64 + accepts as f64) / n,
                std_error: (profile.p_err * (1.0 - profile.p_err) / n).sqrt(),
            }
        })
        .collect();
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;

    fn pair(p: f64, q: f64) -> (Codebook, Codebook) {
        let mut c0 = Codebook::uniform(ModelConfig::default(), 0.2).unwrap();
        let mut c1 = c0.clone();
        c0.entries[7].p = p;
        c1.entries[7].p = q;
        (c0, c1)
    }

    #[test]
    fn only_informative_channels_are_reported() {
        let (c0, c1) = pair(0.1, 0.4);
        let pts = fig2_experiment(&c0, &c1, 100, 10, 1).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].profile.pattern, PatternId(7));
        assert!(fig2_experiment(&c0, &c0, 100, 10, 1).unwrap().is_empty());
    }

    #[test]
    fn close_laws_sit_near_chance() {
        let (c0, c1) = pair(0.2, 0.2001);
        let pt = fig2_experiment(&c0, &c1, 100, 2000, 5).unwrap()[0];
        assert!(pt.profile.p_err > 0.49);
        assert!((pt.empirical_p_err - 0.5).abs() < 0.04);
    }

    #[test]
    fn matches_theory_within_error_bars() {
        let (c0, c1) = pair(0.1, 0.4);
        let pt = fig2_experiment(&c0, &c1, 100, 10_000, 2).unwrap()[0];
        assert!(pt.z() <= 3.0, "{pt:?}");
    }

    #[test]
    fn disjoint_channel_is_error_free() {
        let (c0, c1) = pair(1e-6, 1.0 - 1e-6);
        let pt = fig2_experiment(&c0, &c1, 100, 1000, 3).unwrap()[0];
        assert!(pt.profile.p_err < 1e-12);
        assert_eq!(pt.empirical_p_err, 0.0);
    }
}
