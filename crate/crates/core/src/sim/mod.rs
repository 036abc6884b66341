//! Synthetic CDP generator for the pattern-channel forward model.
//!
//! Templates are fair coin flips. A probe copies the template and flips each
//! interior bit with the probability its template neighborhood has in the
//! population codebook. Flips are independent per pixel and per shot, so
//! simulated multi-shot gains are optimistic compared with real captures,
//! which are correlated.

pub mod codebooks;
pub mod fig2;
pub mod rng;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::for_each_interior;
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::model::{BinaryImage, ModelConfig};
use crate::observations::ChannelObservations;

pub use codebooks::{default_codebooks, mixed_codebooks, MixedParams};
pub use fig2::{fig2_experiment, Fig2Point};
pub use rng::{mix64, stream, Role, SimRng};

/// One simulated population: image size, channel law, seed and captures per template.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub width: usize,
    pub height: usize,
    pub codebook: Codebook,
    pub seed: u64,
    pub shots: u32,
}

impl SimSpec {
    fn check(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("image dimensions must be positive".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fair-bit template drawn from ChaCha8 seeded with `seed`.
pub fn gen_template(width: usize, height: usize, seed: u64) -> BinaryImage {
    fill_template(width, height, &mut stream(seed, 0, Role::Template, 0))
}

fn fill_template(width: usize, height: usize, rng: &mut SimRng) -> BinaryImage {
    let n = width * height;
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let word: u64 = rng.random();
        let take = (n - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    BinaryImage::new(width, height, bits).expect("length matches dimensions")
}

/// Probe whose interior bits are flipped per the codebook; border pixels are copied.
pub fn simulate_probe(template: &BinaryImage, codebook: &Codebook, seed: u64) -> BinaryImage {
    flip_probe(template, codebook, &mut stream(seed, 0, Role::Original, 0))
}

// One uniform draw per interior pixel in row-major order. `flip_counts`
// consumes the stream identically, so counting never needs the image.
fn flip_probe(template: &BinaryImage, codebook: &Codebook, rng: &mut SimRng) -> BinaryImage {
    let mut probe = template.clone();
    let w = template.width;
    for_each_interior(template, &codebook.config, |r, c, id| {
        if rng.random::<f64>() < codebook.entries[id].p {
            probe.bits[r * w + c] ^= 1;
        }
    });
    probe
}

fn flip_counts(template: &BinaryImage, codebook: &Codebook, rng: &mut SimRng) -> ChannelObservations {
    let mut obs = ChannelObservations::empty(codebook.config);
    for_each_interior(template, &codebook.config, |_, _, id| {
        obs.record(id, rng.random::<f64>() < codebook.entries[id].p);
    });
    obs
}

/// A template with its original and fake captures.
#[derive(Debug, Clone)]
pub struct Triple {
    pub template: BinaryImage,
    pub originals: Vec<BinaryImage>,
    pub fakes: Vec<BinaryImage>,
}

/// Per-shot channel counts of one template's captures.
#[derive(Debug, Clone)]
pub struct TripleObservations {
    pub originals: Vec<ChannelObservations>,
    pub fakes: Vec<ChannelObservations>,
}

/// Deterministic simulated dataset. Images are generated on demand from
/// per-(template, class, shot) streams, so nothing is held in memory.
///
/// Templates come from the originals' seed; each class draws its flips from
/// its own spec seed.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub originals: SimSpec,
    pub fakes: SimSpec,
    pub n_templates: usize,
}

/// Pair two populations over `n_templates` shared templates.
///
/// Both specs must agree on dimensions, pattern size and shot count.
pub fn make_dataset(
    spec_originals: &SimSpec,
    spec_fakes: &SimSpec,
    n_templates: usize,
) -> Result<SimDataset> {
    spec_originals.check()?;
    spec_fakes.check()?;
    if (spec_originals.width, spec_originals.height) != (spec_fakes.width, spec_fakes.height) {
        return Err(Error::Dimension {
            expected: format!("{}x{}", spec_originals.width, spec_originals.height),
            actual: format!("{}x{}", spec_fakes.width, spec_fakes.height),
        });
    }
    spec_originals.codebook.config.ensure_same(&spec_fakes.codebook.config)?;
    if spec_originals.shots != spec_fakes.shots {
        return Err(Error::InvalidConfig(format!(
            "shot counts differ: {} vs {}",
            spec_originals.shots, spec_fakes.shots
        )));
    }
    Ok(SimDataset {
        originals: spec_originals.clone(),
        fakes: spec_fakes.clone(),
        n_templates,
    })
}

impl SimDataset {
    pub fn config(&self) -> &ModelConfig {
        &self.originals.codebook.config
    }

    pub fn shots(&self) -> u32 {
        self.originals.shots
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.originals.width, self.originals.height)
    }

    pub fn template(&self, index: usize) -> BinaryImage {
        let (w, h) = self.dims();
        fill_template(w, h, &mut stream(self.originals.seed, index as u64, Role::Template, 0))
    }

    fn class(&self, fake: bool) -> (&SimSpec, Role) {
        if fake {
            (&self.fakes, Role::Fake)
        } else {
            (&self.originals, Role::Original)
        }
    }

    /// Capture `shot` of template `index`, from the fake population when `fake` is set.
    pub fn probe(&self, template: &BinaryImage, index: usize, fake: bool, shot: u32) -> BinaryImage {
        let (spec, role) = self.class(fake);
        flip_probe(template, &spec.codebook, &mut stream(spec.seed, index as u64, role, shot))
    }

    pub fn triple(&self, index: usize) -> Triple {
        let template = self.template(index);
        let shots = 0..self.shots();
        Triple {
            originals: shots.clone().map(|s| self.probe(&template, index, false, s)).collect(),
            fakes: shots.map(|s| self.probe(&template, index, true, s)).collect(),
            template,
        }
    }

    /// Channel counts of every capture of template `index`, identical to
    /// extracting them from the images of [`SimDataset::triple`].
    pub fn observations(&self, index: usize) -> TripleObservations {
        let template = self.template(index);
        let counts = |fake: bool| {
            let (spec, role) = self.class(fake);
            (0..self.shots())
                .map(|s| {
                    let mut rng = stream(spec.seed, index as u64, role, s);
                    flip_counts(&template, &spec.codebook, &mut rng)
                })
                .collect()
        };
        TripleObservations {
            originals: counts(false),
            fakes: counts(true),
        }
    }

    /// Observations for the given template indices, computed in parallel.
    pub fn observations_for(&self, indices: &[usize]) -> Vec<TripleObservations> {
        indices.par_iter().map(|&i| self.observations(i)).collect()
    }

    pub fn all_observations(&self) -> Vec<TripleObservations> {
        (0..self.n_templates)
            .into_par_iter()
            .map(|i| self.observations(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::extract_channels;

    fn spec(p: f64, seed: u64, shots: u32) -> SimSpec {
        SimSpec {
            width: 40,
            height: 30,
            codebook: Codebook::uniform(ModelConfig::default(), p).unwrap(),
            seed,
            shots,
        }
    }

    #[test]
    fn template_is_reproducible() {
        let a = gen_template(33, 17, 99);
        assert_eq!(a, gen_template(33, 17, 99));
        assert_ne!(a, gen_template(33, 17, 100));
        let one = gen_template(1, 1, 5);
        assert!(one.bits[0] <= 1);
    }

    #[test]
    fn template_bits_are_fair() {
        let t = gen_template(1000, 1000, 2024);
        let ones: u64 = t.bits.iter().map(|&b| u64::from(b)).sum();
        let frac = ones as f64 / 1e6;
        assert!((frac - 0.5).abs() < 0.002, "{frac}");
    }

    #[test]
    fn near_identity_channel() {
        let t = gen_template(64, 64, 1);
        let cb = Codebook::uniform(ModelConfig::default(), 1e-6).unwrap();
        let probe = simulate_probe(&t, &cb, 3);
        let obs = extract_channels(&t, &probe, &cb.config).unwrap();
        assert_eq!(obs.total_occurrences(), 62 * 62);
        assert!(obs.total_flips() <= 1);
    }

    #[test]
    fn flip_total_within_three_sigma() {
        let t = gen_template(200, 200, 11);
        let cb = Codebook::uniform(ModelConfig::default(), 0.1).unwrap();
        let obs = extract_channels(&t, &simulate_probe(&t, &cb, 12), &cb.config).unwrap();
        let n = obs.total_occurrences() as f64;
        let dev = (obs.total_flips() as f64 - 0.1 * n).abs();
        assert!(dev <= 3.0 * (0.09 * n).sqrt(), "{dev}");
    }

    #[test]
    fn borders_are_copied() {
        let t = gen_template(20, 20, 4);
        let cb = Codebook::uniform(ModelConfig::default(), 0.5).unwrap();
        let p = simulate_probe(&t, &cb, 5);
        for i in 0..20 {
            for (r, c) in [(0, i), (19, i), (i, 0), (i, 19)] {
                assert_eq!(t.get(r, c), p.get(r, c));
            }
        }
    }

    #[test]
    fn fully_noisy_channel_decouples_probe() {
        let t = gen_template(300, 300, 8);
        let cb = Codebook::uniform(ModelConfig::default(), 0.5).unwrap();
        let p = simulate_probe(&t, &cb, 9);
        // empirical mutual information between interior template and probe bits
        let mut joint = [[0f64; 2]; 2];
        for r in 1..299 {
            for c in 1..299 {
                joint[t.get(r, c) as usize][p.get(r, c) as usize] += 1.0;
            }
        }
        let n: f64 = joint.iter().flatten().sum();
        let mut mi = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let pab = joint[a][b] / n;
                let pa = (joint[a][0] + joint[a][1]) / n;
                let pb = (joint[0][b] + joint[1][b]) / n;
                mi += pab * (pab / (pa * pb)).ln();
            }
        }
        assert!(mi < 1e-3, "{mi}");
    }

    #[test]
    fn counts_match_rendered_images() {
        let ds = make_dataset(&spec(0.2, 1, 3), &spec(0.35, 2, 3), 4).unwrap();
        for i in 0..4 {
            let tri = ds.triple(i);
            let obs = ds.observations(i);
            for s in 0..3 {
                let cfg = ds.config();
                assert_eq!(extract_channels(&tri.template, &tri.originals[s], cfg).unwrap(), obs.originals[s]);
                assert_eq!(extract_channels(&tri.template, &tri.fakes[s], cfg).unwrap(), obs.fakes[s]);
            }
        }
    }

    #[test]
    fn dataset_is_deterministic_and_streams_differ() {
        let ds = make_dataset(&spec(0.2, 1, 2), &spec(0.2, 1, 2), 3).unwrap();
        let a = ds.triple(2);
        let b = ds.triple(2);
        assert_eq!(a.template, b.template);
        assert_eq!(a.originals, b.originals);
        assert_ne!(a.originals[0], a.originals[1]);
        assert_ne!(a.originals[0], a.fakes[0]);
        assert_ne!(ds.template(0), ds.template(1));
    }

    #[test]
    fn dataset_rejects_mismatched_specs() {
        let mut other = spec(0.2, 1, 2);
        other.width = 41;
        let err = make_dataset(&spec(0.2, 1, 2), &other, 1).unwrap_err();
        assert!(err.to_string().contains("40x30") && err.to_string().contains("41x30"));
        assert!(make_dataset(&spec(0.2, 1, 2), &spec(0.2, 1, 3), 1).is_err());
        assert!(make_dataset(&spec(0.2, 1, 0), &spec(0.2, 1, 0), 1).is_err());
    }
}
