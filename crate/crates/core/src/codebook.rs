//! Per-channel bit-flip probability tables.
//!
//! One type serves both references: the codebook of originals (`P_b`) and the
//! codebook of fakes (`Q_b`). The on-disk form is
//!
//! ```json
//! {"h": 3, "prob_floor": 1.0e-6, "entries": [[occurrences, flips, p], ...]}
//! ```
//!
//! with `M` entries and probabilities written with 17 significant digits so
//! that a load after a save is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{ModelConfig, PatternId, Validate, Violation};
use crate::observations::ChannelObservations;

/// One channel of a codebook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookEntry {
    pub occurrences: u64,
    pub flips: u64,
    /// Clamped flip probability.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub config: ModelConfig,
    pub entries: Vec<CodebookEntry>,
}

impl Codebook {
    /// Checked constructor.
    pub fn new(config: ModelConfig, entries: Vec<CodebookEntry>) -> Result<Self> {
        let cb = Self { config, entries };
        cb.validate()?;
        Ok(cb)
    }

    /// Maximum-likelihood estimate from pooled counts: `p = clamp(D / L)`, or `ε` when `L = 0`.
    pub fn from_observations(obs: &ChannelObservations) -> Self {
        let config = *obs.config();
        let entries = obs
            .counts()
            .iter()
            .map(|c| CodebookEntry {
                occurrences: c.occurrences,
                flips: c.flips,
                p: c.rate().map_or(config.prob_floor(), |r| config.clamp(r)),
            })
            .collect();
        Self { config, entries }
    }

    /// Codebook with prescribed channel laws and no supporting counts (used by the simulator).
    pub fn from_probabilities(config: ModelConfig, probs: &[f64]) -> Result<Self> {
        if probs.len() != config.num_patterns() {
            return Err(Error::Dimension {
                expected: format!("{} probabilities", config.num_patterns()),
                actual: format!("{} probabilities", probs.len()),
            });
        }
        if let Some(bad) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("probability {bad} outside [0, 1]")));
        }
        let entries = probs
            .iter()
            .map(|&p| CodebookEntry {
                occurrences: 0,
                flips: 0,
                p: config.clamp(p),
            })
            .collect();
        Ok(Self { config, entries })
    }

    pub fn uniform(config: ModelConfig, p: f64) -> Result<Self> {
        Self::from_probabilities(config, &vec![p; config.num_patterns()])
    }

    pub fn p(&self, pattern: PatternId) -> f64 {
        self.entries[pattern.index()].p
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.p).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(64 + self.entries.len() * 40);
        write!(
            out,
            "{{\"h\": {}, \"prob_floor\": {:.16e}, \"entries\": [",
            self.config.h(),
            self.config.prob_floor()
        )
        .unwrap();
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write!(out, "[{}, {}, {:.16e}]", e.occurrences, e.flips, e.p).unwrap();
        }
        out.push_str("]}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            h: u32,
            prob_floor: f64,
            entries: Vec<(u64, u64, f64)>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let config = ModelConfig::new(raw.h, raw.prob_floor)?;
        let entries = raw
            .entries
            .into_iter()
            .map(|(occurrences, flips, p)| CodebookEntry {
                occurrences,
                flips,
                p,
            })
            .collect();
        Self::new(config, entries)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::pnm::write_atomic(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

impl Validate for Codebook {
    fn validate(&self) -> std::result::Result<(), Violation> {
        let m = self.config.num_patterns();
        if self.entries.len() != m {
            return Err(Violation(format!(
                "length mismatch: {} entries, expected M = {m}",
                self.entries.len()
            )));
        }
        let eps = self.config.prob_floor();
        for (w, e) in self.entries.iter().enumerate() {
            if e.flips > e.occurrences {
                return Err(Violation(format!(
                    "channel {w}: flips {} exceed occurrences {}",
                    e.flips, e.occurrences
                )));
            }
            if !(e.p >= eps && e.p <= 1.0 - eps) {
                return Err(Violation(format!(
                    "channel {w}: probability {} outside [{eps}, {}]",
                    e.p,
                    1.0 - eps
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observations::ChannelCount;
    use proptest::prelude::*;

    fn cfg() -> ModelConfig {
        ModelConfig::default()
    }

    #[test]
    fn flips_above_occurrences_is_a_violation() {
        let mut cb = Codebook::uniform(cfg(), 0.1).unwrap();
        cb.entries[7] = CodebookEntry {
            occurrences: 2,
            flips: 5,
            p: 0.1,
        };
        let v = cb.validate().unwrap_err();
        assert!(v.0.contains("channel 7"), "{v}");
    }

    #[test]
    fn unclamped_probability_is_a_violation() {
        let mut cb = Codebook::uniform(cfg(), 0.1).unwrap();
        cb.entries[3].p = 0.0;
        assert!(cb.validate().is_err());
        cb.entries[3].p = 1.0;
        assert!(cb.validate().is_err());
    }

    #[test]
    fn wrong_length_is_a_violation() {
        let mut cb = Codebook::uniform(cfg(), 0.1).unwrap();
        cb.entries.pop();
        assert!(cb.validate().is_err());
    }

    #[test]
    fn estimate_clamps_and_marks_unseen_channels() {
        let mut counts = vec![ChannelCount::default(); 512];
        counts[1] = ChannelCount::new(0, 40);
        counts[2] = ChannelCount::new(40, 40);
        counts[3] = ChannelCount::new(3, 100);
        let obs = ChannelObservations::from_counts(cfg(), counts).unwrap();
        let cb = Codebook::from_observations(&obs);
        let eps = cfg().prob_floor();
        assert_eq!(cb.entries[0].p, eps);
        assert_eq!(cb.entries[0].occurrences, 0);
        assert_eq!(cb.entries[1].p, eps);
        assert_eq!(cb.entries[2].p, 1.0 - eps);
        assert_eq!(cb.entries[3].p, 0.03);
        assert_eq!(cb.validate(), Ok(()));
    }

    #[test]
    fn json_has_documented_shape() {
        let cb = Codebook::uniform(ModelConfig::new(1, 1e-6).unwrap(), 0.1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&cb.to_json()).unwrap();
        assert_eq!(v["h"], 1);
        assert_eq!(v["entries"].as_array().unwrap().len(), 2);
        assert_eq!(v["entries"][0].as_array().unwrap().len(), 3);
        // 17 significant digits in the mantissa
        assert!(cb.to_json().contains("1.0000000000000001e-1"));
    }

    #[test]
    fn json_rejects_invalid_contents() {
        assert!(Codebook::from_json(r#"{"h": 2, "prob_floor": 1e-6, "entries": []}"#).is_err());
        assert!(Codebook::from_json(r#"{"h": 1, "prob_floor": 1e-6, "entries": [[1, 2, 0.5], [0, 0, 0.5]]}"#).is_err());
        assert!(Codebook::from_json("not json").is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(
            raw in prop::collection::vec((0u64..1_000_000, 0.0f64..1.0, 0.0f64..1.0), 512)
        ) {
            let config = cfg();
            let entries = raw
                .into_iter()
                .map(|(occ, frac, p)| CodebookEntry {
                    occurrences: occ,
                    flips: (occ as f64 * frac) as u64,
                    p: config.clamp(p),
                })
                .collect();
            let cb = Codebook::new(config, entries).unwrap();
            let back = Codebook::from_json(&cb.to_json()).unwrap();
            prop_assert_eq!(back.config, cb.config);
            for (a, b) in cb.entries.iter().zip(&back.entries) {
                prop_assert_eq!(a.occurrences, b.occurrences);
                prop_assert_eq!(a.flips, b.flips);
                prop_assert_eq!(a.p.to_bits(), b.p.to_bits());
            }
        }
    }
}
