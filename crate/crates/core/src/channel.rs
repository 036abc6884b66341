//! Binary pattern-based channel mechanics.
//!
//! Every interior pixel of a template is assigned the channel `ω` given by its
//! `h × h` neighborhood. Comparing the template with a binarized probe then
//! yields, per channel, the number of flipped centers `D^ω` out of `L^ω`
//! occurrences. Pixels closer than `⌊h/2⌋` to an edge have no full
//! neighborhood and are excluded from every count; no padding is invented.
//!
//! Pattern bit order is row-major with the top-left pixel as the most
//! significant bit. For `h = 3` the center pixel is bit 4 (value 16).

use rayon::prelude::*;

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::model::{BinaryImage, ModelConfig, PatternId};
use crate::observations::{ChannelObservations, ProbeFeatures};

/// Indicator of a flipped center bit, `δ = t ⊕ t̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitFlip(u8);

impl BitFlip {
    pub fn between(template_bit: u8, probe_bit: u8) -> Self {
        BitFlip((template_bit ^ probe_bit) & 1)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_flip(self) -> bool {
        self.0 == 1
    }
}

/// Encode an `h × h` row-major block of bits.
pub fn encode_pattern(block: &[u8], h: usize) -> Result<PatternId> {
    if block.len() != h * h {
        return Err(Error::Dimension {
            expected: format!("{h}x{h} block ({} bits)", h * h),
            actual: format!("{} bits", block.len()),
        });
    }
    if h * h > 32 {
        return Err(Error::Dimension {
            expected: "at most 32 bits".into(),
            actual: format!("{} bits", h * h),
        });
    }
    let mut id = 0u32;
    for &b in block {
        if b > 1 {
            return Err(Error::Domain(format!("non-binary value {b} in pattern block")));
        }
        id = (id << 1) | u32::from(b);
    }
    Ok(PatternId(id))
}

/// Channel index of every interior pixel, visited in row-major order.
///
/// `visit(row, col, pattern)` receives image coordinates of the center pixel.
pub fn for_each_interior<F>(template: &BinaryImage, config: &ModelConfig, mut visit: F)
where
    F: FnMut(usize, usize, usize),
{
    let h = config.h() as usize;
    let rad = config.radius();
    let (w, ht) = template.dims();
    if w < h || ht < h {
        return;
    }
    // row_codes[r * w + c] = the h bits of row r centered on column c (leftmost = MSB)
    let mut row_codes = vec![0u32; w * ht];
    for r in 0..ht {
        let row = &template.bits[r * w..(r + 1) * w];
        for c in rad..w - rad {
            let mut code = 0u32;
            for &b in &row[c - rad..=c + rad] {
                code = (code << 1) | u32::from(b);
            }
            row_codes[r * w + c] = code;
        }
    }
    for r in rad..ht - rad {
        for c in rad..w - rad {
            let mut id = 0u32;
            for dr in 0..h {
                id = (id << h) | row_codes[(r - rad + dr) * w + c];
            }
            visit(r, c, id as usize);
        }
    }
}

/// Per-channel `(D^ω, L^ω)` between a template and a pre-aligned binarized probe.
pub fn extract_channels(
    template: &BinaryImage,
    probe: &BinaryImage,
    config: &ModelConfig,
) -> Result<ChannelObservations> {
    template.ensure_same_dims(probe)?;
    let mut obs = ChannelObservations::empty(*config);
    let w = template.width;
    for_each_interior(template, config, |r, c, id| {
        let idx = r * w + c;
        obs.record(id, BitFlip::between(template.bits[idx], probe.bits[idx]).is_flip());
    });
    Ok(obs)
}

/// Pool counts over all pairs, then divide: the ML estimate under i.i.d. Bernoulli flips.
pub fn estimate_codebook(
    pairs: &[(BinaryImage, BinaryImage)],
    config: &ModelConfig,
) -> Result<Codebook> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("codebook estimation needs at least one pair"));
    }
    let per_pair = pairs
        .par_iter()
        .map(|(t, p)| extract_channels(t, p, config))
        .collect::<Result<Vec<_>>>()?;
    let pooled = fuse_multishot(&per_pair)?;
    Ok(Codebook::from_observations(&pooled))
}

/// Empirical flip rate `D^ω / L^ω`; channels with `L^ω = 0` stay undefined.
pub fn probe_features(obs: &ChannelObservations) -> ProbeFeatures {
    ProbeFeatures::from_observations(obs)
}

/// Sum counts over several captures of the same printed pattern.
///
/// Shots are treated as independent evidence even though real captures of
/// one print are correlated.
pub fn fuse_multishot(shots: &[ChannelObservations]) -> Result<ChannelObservations> {
    let (first, rest) = shots
        .split_first()
        .ok_or(Error::EmptyInput("multi-shot fusion needs at least one shot"))?;
    let mut fused = first.clone();
    for shot in rest {
        fused.merge(shot)?;
    }
    Ok(fused)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observations::ChannelCount;
    use proptest::prelude::*;

    fn cfg() -> ModelConfig {
        ModelConfig::default()
    }

    fn pseudo_random_image(w: usize, h: usize, seed: u64) -> BinaryImage {
        let mut s = seed;
        let bits = (0..w * h)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 63) as u8
            })
            .collect();
        BinaryImage::new(w, h, bits).unwrap()
    }

    #[test]
    fn encode_known_blocks() {
        assert_eq!(encode_pattern(&[0; 9], 3).unwrap(), PatternId(0));
        assert_eq!(encode_pattern(&[1; 9], 3).unwrap(), PatternId(511));
        let mut center = [0u8; 9];
        center[4] = 1;
        assert_eq!(encode_pattern(&center, 3).unwrap(), PatternId(16));
        let mut top_left = [0u8; 9];
        top_left[0] = 1;
        assert_eq!(encode_pattern(&top_left, 3).unwrap(), PatternId(256));
    }

    #[test]
    fn encode_rejects_wrong_size() {
        assert!(matches!(encode_pattern(&[0; 8], 3), Err(Error::Dimension { .. })));
        assert!(encode_pattern(&[0, 2, 0, 0, 0, 0, 0, 0, 0], 3).is_err());
    }

    #[test]
    fn interior_visit_matches_encode_pattern() {
        let img = pseudo_random_image(9, 7, 3);
        let mut seen = 0;
        for_each_interior(&img, &cfg(), |r, c, id| {
            let mut block = Vec::new();
            for rr in r - 1..=r + 1 {
                for cc in c - 1..=c + 1 {
                    block.push(img.get(rr, cc));
                }
            }
            assert_eq!(encode_pattern(&block, 3).unwrap().index(), id);
            seen += 1;
        });
        assert_eq!(seen, 7 * 5);
    }

    #[test]
    fn identical_probe_has_no_flips() {
        let t = pseudo_random_image(20, 17, 1);
        let obs = extract_channels(&t, &t, &cfg()).unwrap();
        assert_eq!(obs.total_flips(), 0);
        assert_eq!(obs.total_occurrences(), 18 * 15);
    }

    #[test]
    fn complement_probe_flips_every_center() {
        let t = pseudo_random_image(20, 17, 2);
        let obs = extract_channels(&t, &t.inverted(), &cfg()).unwrap();
        for c in obs.counts() {
            assert_eq!(c.flips, c.occurrences);
        }
    }

    #[test]
    fn full_size_template_support() {
        let t = pseudo_random_image(228, 228, 5);
        let obs = extract_channels(&t, &t, &cfg()).unwrap();
        assert_eq!(obs.total_occurrences(), 51_076);
        let mean = obs.total_occurrences() as f64 / 512.0;
        assert!((mean - 100.0).abs() < 1.0, "{mean}");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = pseudo_random_image(10, 10, 1);
        let b = pseudo_random_image(10, 11, 1);
        let err = extract_channels(&a, &b, &cfg()).unwrap_err();
        assert!(err.to_string().contains("10x10") && err.to_string().contains("10x11"));
    }

    #[test]
    fn small_images_have_no_interior() {
        let t = pseudo_random_image(2, 5, 1);
        let obs = extract_channels(&t, &t, &cfg()).unwrap();
        assert_eq!(obs.total_occurrences(), 0);
    }

    #[test]
    fn estimate_codebook_on_identity_pair_is_floor() {
        let t = pseudo_random_image(30, 30, 9);
        let cb = estimate_codebook(&[(t.clone(), t)], &cfg()).unwrap();
        assert!(cb.entries.iter().all(|e| e.p == cfg().prob_floor()));
    }

    #[test]
    fn estimate_codebook_pools_counts() {
        let t1 = pseudo_random_image(25, 25, 1);
        let t2 = pseudo_random_image(25, 25, 2);
        let p1 = pseudo_random_image(25, 25, 3);
        let p2 = pseudo_random_image(25, 25, 4);
        let o1 = extract_channels(&t1, &p1, &cfg()).unwrap();
        let o2 = extract_channels(&t2, &p2, &cfg()).unwrap();
        let cb = estimate_codebook(&[(t1, p1), (t2, p2)], &cfg()).unwrap();
        for w in 0..512 {
            let (a, b) = (o1.counts()[w], o2.counts()[w]);
            assert_eq!(cb.entries[w].occurrences, a.occurrences + b.occurrences);
            assert_eq!(cb.entries[w].flips, a.flips + b.flips);
        }
    }

    #[test]
    fn estimate_codebook_needs_pairs() {
        assert!(matches!(estimate_codebook(&[], &cfg()), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn probe_features_quotients_and_undefined() {
        let mut counts = vec![ChannelCount::default(); 512];
        counts[10] = ChannelCount::new(3, 100);
        counts[11] = ChannelCount::new(0, 50);
        let f = probe_features(&ChannelObservations::from_counts(cfg(), counts).unwrap());
        assert_eq!(f.get(PatternId(10)), Some(0.03));
        assert_eq!(f.get(PatternId(11)), Some(0.0));
        assert_eq!(f.get(PatternId(12)), None);
        assert_eq!(f.support()[10], 100);
    }

    #[test]
    fn fuse_single_shot_is_identity() {
        let t = pseudo_random_image(20, 20, 1);
        let o = extract_channels(&t, &pseudo_random_image(20, 20, 8), &cfg()).unwrap();
        assert_eq!(fuse_multishot(std::slice::from_ref(&o)).unwrap(), o);
    }

    #[test]
    fn fuse_six_equal_shots_scales_support() {
        let t = pseudo_random_image(40, 40, 1);
        let o = extract_channels(&t, &pseudo_random_image(40, 40, 8), &cfg()).unwrap();
        let fused = fuse_multishot(&vec![o.clone(); 6]).unwrap();
        for (a, b) in o.counts().iter().zip(fused.counts()) {
            assert_eq!(b.occurrences, 6 * a.occurrences);
            assert_eq!(b.flips, 6 * a.flips);
        }
    }

    #[test]
    fn fuse_disjoint_supports_is_union() {
        let mut a = vec![ChannelCount::default(); 512];
        let mut b = vec![ChannelCount::default(); 512];
        a[1] = ChannelCount::new(1, 4);
        b[2] = ChannelCount::new(2, 5);
        let a = ChannelObservations::from_counts(cfg(), a).unwrap();
        let b = ChannelObservations::from_counts(cfg(), b).unwrap();
        let fused = fuse_multishot(&[a, b]).unwrap();
        let supported: Vec<_> = fused.supported().map(|(w, _)| w.0).collect();
        assert_eq!(supported, vec![1, 2]);
    }

    #[test]
    fn fuse_rejects_empty_and_mismatched() {
        assert!(fuse_multishot(&[]).is_err());
        let a = ChannelObservations::empty(cfg());
        let b = ChannelObservations::empty(ModelConfig::new(1, 1e-6).unwrap());
        assert!(fuse_multishot(&[a, b]).is_err());
    }

    #[test]
    fn location_invariance_on_periodic_template() {
        // Period-4 tiling with a 40x40 interior: every phase of the tile appears the
        // same number of times whatever the translation, so counts must not move.
        let tile: [u8; 16] = [1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 1];
        let make = |w: usize, h: usize, dr: usize, dc: usize, invert_mask: bool| {
            let bits = (0..w * h)
                .map(|i| {
                    let (r, c) = (i / w + dr, i % w + dc);
                    let t = tile[(r % 4) * 4 + c % 4];
                    // probe: flip every pixel on a period-4 lattice of its own
                    if invert_mask && (r % 4 == 1) && (c % 4 == 2) {
                        t ^ 1
                    } else {
                        t
                    }
                })
                .collect();
            BinaryImage::new(w, h, bits).unwrap()
        };
        let base = extract_channels(&make(42, 42, 0, 0, false), &make(42, 42, 0, 0, true), &cfg())
            .unwrap();
        let shifted =
            extract_channels(&make(42, 42, 1, 3, false), &make(42, 42, 1, 3, true), &cfg())
                .unwrap();
        assert_eq!(base, shifted);
        assert!(base.total_flips() > 0);
    }

    proptest! {
        #[test]
        fn flips_sum_to_interior_hamming_distance(
            w in 3usize..24, h in 3usize..24, s1 in any::<u64>(), s2 in any::<u64>()
        ) {
            let t = pseudo_random_image(w, h, s1);
            let p = pseudo_random_image(w, h, s2);
            let obs = extract_channels(&t, &p, &cfg()).unwrap();
            let mut hamming = 0u64;
            for r in 1..h - 1 {
                for c in 1..w - 1 {
                    hamming += u64::from(t.get(r, c) != p.get(r, c));
                }
            }
            prop_assert_eq!(obs.total_flips(), hamming);
            prop_assert_eq!(obs.total_occurrences() as usize, (w - 2) * (h - 2));
            prop_assert_eq!(extract_channels(&t, &p, &cfg()).unwrap(), obs);
        }
    }
}
