//! Per-channel flip counts and the empirical flip-rate features derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelConfig, PatternId};

/// Flip count `D` and occurrence count `L` of one channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelCount {
    pub flips: u64,
    pub occurrences: u64,
}

impl ChannelCount {
    pub fn new(flips: u64, occurrences: u64) -> Self {
        debug_assert!(flips <= occurrences);
        Self { flips, occurrences }
    }

    /// `D / L`, or `None` when the channel never occurred.
    pub fn rate(&self) -> Option<f64> {
        (self.occurrences > 0).then(|| self.flips as f64 / self.occurrences as f64)
    }
}

/// `(D^ω, L^ω)` for every channel, extracted from one or more template/probe pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelObservations {
    config: ModelConfig,
    counts: Vec<ChannelCount>,
}

impl ChannelObservations {
    pub fn empty(config: ModelConfig) -> Self {
        Self {
            config,
            counts: vec![ChannelCount::default(); config.num_patterns()],
        }
    }

    pub fn from_counts(config: ModelConfig, counts: Vec<ChannelCount>) -> Result<Self> {
        if counts.len() != config.num_patterns() {
            return Err(Error::Dimension {
                expected: format!("{} channels", config.num_patterns()),
                actual: format!("{} channels", counts.len()),
            });
        }
        if let Some(w) = counts.iter().position(|c| c.flips > c.occurrences) {
            return Err(Error::Invariant(format!(
                "channel {w}: {} flips exceed {} occurrences",
                counts[w].flips, counts[w].occurrences
            )));
        }
        Ok(Self { config, counts })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn counts(&self) -> &[ChannelCount] {
        &self.counts
    }

    pub fn get(&self, pattern: PatternId) -> ChannelCount {
        self.counts[pattern.index()]
    }

    pub(crate) fn record(&mut self, pattern: usize, flipped: bool) {
        let c = &mut self.counts[pattern];
        c.occurrences += 1;
        c.flips += u64::from(flipped);
    }

    /// Add another set of counts channel by channel.
    pub fn merge(&mut self, other: &ChannelObservations) -> Result<()> {
        self.config.ensure_same(&other.config)?;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.flips += b.flips;
            a.occurrences += b.occurrences;
        }
        Ok(())
    }

    /// `Σ_ω D^ω`.
    pub fn total_flips(&self) -> u64 {
        self.counts.iter().map(|c| c.flips).sum()
    }

    /// `Σ_ω L^ω`, the number of interior pixels that contributed.
    pub fn total_occurrences(&self) -> u64 {
        self.counts.iter().map(|c| c.occurrences).sum()
    }

    /// Channels that occurred at least once.
    pub fn supported(&self) -> impl Iterator<Item = (PatternId, ChannelCount)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.occurrences > 0)
            .map(|(w, c)| (PatternId(w as u32), *c))
    }
}

/// Empirical flip rate per channel; `None` marks channels absent from the probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeFeatures {
    config: ModelConfig,
    p_hat: Vec<Option<f64>>,
    support: Vec<u64>,
}

impl ProbeFeatures {
    pub fn from_observations(obs: &ChannelObservations) -> Self {
        Self {
            config: *obs.config(),
            p_hat: obs.counts().iter().map(ChannelCount::rate).collect(),
            support: obs.counts().iter().map(|c| c.occurrences).collect(),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn p_hat(&self) -> &[Option<f64>] {
        &self.p_hat
    }

    pub fn get(&self, pattern: PatternId) -> Option<f64> {
        self.p_hat[pattern.index()]
    }

    /// `L^ω` per channel.
    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.p_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_hat.is_empty()
    }
}
