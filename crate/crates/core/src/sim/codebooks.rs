//! Codebook presets for simulation.
//!
//! Real `(P_b, Q_b)` laws across channels have no known parametric form, so
//! both presets are modeling choices.

use rand::Rng;

use super::rng::{stream, Role};
use crate::codebook::Codebook;
use crate::error::Result;
use crate::model::ModelConfig;

/// `C₀` log-uniform in `[10⁻³, 10⁻¹]` per channel; `C₁ = C₀ + U[0.05, 0.3]`, clamped.
pub fn default_codebooks(config: ModelConfig, seed: u64) -> Result<(Codebook, Codebook)> {
    let mut rng = stream(seed, 0, Role::Aux, 1);
    let m = config.num_patterns();
    let mut p = Vec::with_capacity(m);
    let mut q = Vec::with_capacity(m);
    for _ in 0..m {
        let pb = 10f64.powf(rng.random_range(-3.0..=-1.0));
        let uplift = rng.random_range(0.05..=0.3);
        p.push(pb);
        q.push((pb + uplift).min(1.0));
    }
    Ok((
        Codebook::from_probabilities(config, &p)?,
        Codebook::from_probabilities(config, &q)?,
    ))
}

/// Knobs of [`mixed_codebooks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedParams {
    /// Mean fake uplift on channels whose center agrees with most neighbors.
    pub strong_uplift: f64,
    /// Mean fake uplift on the remaining, noisier channels.
    pub weak_uplift: f64,
}

impl Default for MixedParams {
    fn default() -> Self {
        Self {
            strong_uplift: 0.01,
            weak_uplift: 0.001,
        }
    }
}

/// Number of neighbors whose bit differs from the center bit of pattern `id`.
pub fn disagreeing_neighbors(id: usize, config: &ModelConfig) -> u32 {
    let n = config.h() * config.h();
    let center = (id >> (n / 2)) & 1;
    let same = (if center == 1 { id } else { !id }) & ((1usize << n) - 1);
    // the center always agrees with itself
    n - same.count_ones()
}

/// Structured preset where pattern isolation drives noise.
///
/// A channel with `n` of its `N = h² − 1` neighbors disagreeing with the center
/// gets `P_b ≈ 10^(−3 + 2.5 n/N)` (log-jittered by ±0.1 decade). Fakes add a
/// uniform uplift in `[0.5, 1.5]` times `strong_uplift` when `n ≤ N/2` and
/// `weak_uplift` otherwise. Noisy, barely informative channels make plain
/// averaging clearly worse than selective aggregation.
pub fn mixed_codebooks(
    config: ModelConfig,
    params: MixedParams,
    seed: u64,
) -> Result<(Codebook, Codebook)> {
    let mut rng = stream(seed, 0, Role::Aux, 2);
    let neighbors = config.h() * config.h() - 1;
    let m = config.num_patterns();
    let mut p = Vec::with_capacity(m);
    let mut q = Vec::with_capacity(m);
    for id in 0..m {
        let n = disagreeing_neighbors(id, &config);
        let exponent = -3.0 + 2.5 * f64::from(n) / f64::from(neighbors) + rng.random_range(-0.1..=0.1);
        let pb = 10f64.powf(exponent);
        let mean_uplift = if 2 * n <= neighbors {
            params.strong_uplift
        } else {
            params.weak_uplift
        };
        let uplift = mean_uplift * rng.random_range(0.5..=1.5);
        p.push(pb);
        q.push((pb + uplift).min(1.0));
    }
    Ok((
        Codebook::from_probabilities(config, &p)?,
        Codebook::from_probabilities(config, &q)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ranges() {
        let (c0, c1) = default_codebooks(ModelConfig::default(), 3).unwrap();
        for (a, b) in c0.entries.iter().zip(&c1.entries) {
            assert!((1e-3 - 1e-12..=1e-1 + 1e-12).contains(&a.p));
            let d = b.p - a.p;
            assert!((0.05 - 1e-12..=0.3 + 1e-12).contains(&d));
        }
        assert_eq!(c0, default_codebooks(ModelConfig::default(), 3).unwrap().0);
        assert_ne!(c0, default_codebooks(ModelConfig::default(), 4).unwrap().0);
    }

    #[test]
    fn neighbor_disagreement() {
        let cfg = ModelConfig::default();
        assert_eq!(disagreeing_neighbors(0, &cfg), 0);
        assert_eq!(disagreeing_neighbors(511, &cfg), 0);
        assert_eq!(disagreeing_neighbors(16, &cfg), 8);
        assert_eq!(disagreeing_neighbors(511 - 16, &cfg), 8);
        assert_eq!(disagreeing_neighbors(0b100_010_000, &cfg), 7);
        let hist = (0..512).fold([0; 9], |mut h, id| {
            h[disagreeing_neighbors(id, &cfg) as usize] += 1;
            h
        });
        assert_eq!(hist, [2, 16, 56, 112, 140, 112, 56, 16, 2]);
    }

    #[test]
    fn mixed_preset_is_structured() {
        let cfg = ModelConfig::default();
        let (c0, c1) = mixed_codebooks(cfg, MixedParams::default(), 1).unwrap();
        for id in 0..512 {
            let n = disagreeing_neighbors(id, &cfg);
            let d = c1.entries[id].p - c0.entries[id].p;
            if n <= 4 {
                assert!(c0.entries[id].p < 0.03 && d >= 0.005 - 1e-12);
            } else {
                assert!(d <= 0.0015 + 1e-12);
            }
        }
    }
}
