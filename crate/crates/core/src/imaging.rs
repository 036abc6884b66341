//! Gray-level preprocessing of captured probes: histogram matching and Otsu binarization.
//!
//! Both work on 256 uniform bins, `bin(v) = round(255 v)`. Dark pixels become
//! 1 (black) after binarization. Probes are assumed already registered to
//! their template.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{BinaryImage, GrayImage};
use crate::pnm::{read_gray_any, read_pbm};

pub const HIST_BINS: usize = 256;

pub fn to_bin(v: f64) -> usize {
    (v.clamp(0.0, 1.0) * 255.0).round() as usize
}

pub fn histogram(img: &GrayImage) -> [u64; HIST_BINS] {
    let mut h = [0u64; HIST_BINS];
    for &v in &img.values {
        h[to_bin(v)] += 1;
    }
    h
}

fn cumulative(h: &[u64; HIST_BINS]) -> [u64; HIST_BINS] {
    let mut c = [0u64; HIST_BINS];
    let mut acc = 0;
    for (slot, &n) in c.iter_mut().zip(h) {
        acc += n;
        *slot = acc;
    }
    c
}

fn ensure_nonempty(img: &GrayImage, what: &'static str) -> Result<()> {
    if img.values.is_empty() {
        Err(Error::EmptyInput(what))
    } else {
        Ok(())
    }
}

/// Map each probe bin through the probe CDF and the inverse reference CDF.
///
/// Bin `b` goes to the smallest reference bin `j` with
/// `F_ref(j) ≥ F_probe(b)`, compared exactly in integers, and the output
/// value is `j / 255`. A constant probe is returned unchanged.
pub fn histogram_match(probe: &GrayImage, reference: &GrayImage) -> Result<GrayImage> {
    ensure_nonempty(probe, "histogram matching needs a non-empty probe")?;
    ensure_nonempty(reference, "histogram matching needs a non-empty reference")?;
    let hp = histogram(probe);
    if hp.iter().filter(|&&n| n > 0).count() < 2 {
        log::warn!("constant probe: histogram matching left it unchanged");
        return Ok(probe.clone());
    }
    let (cp, cr) = (cumulative(&hp), cumulative(&histogram(reference)));
    let (np, nr) = (u128::from(cp[255]), u128::from(cr[255]));
    let mut lut = [0.0; HIST_BINS];
    let mut j = 0;
    for b in 0..HIST_BINS {
        // cp is non-decreasing, so j only moves forward
        while u128::from(cr[j]) * np < u128::from(cp[b]) * nr {
            j += 1;
        }
        lut[b] = j as f64 / 255.0;
    }
    let values = probe.values.iter().map(|&v| lut[to_bin(v)]).collect();
    GrayImage::new(probe.width, probe.height, values)
}

/// Bin `t` maximizing the between-class variance of `{bins ≤ t}` vs `{bins > t}`,
/// ties toward the lowest `t`; `None` when fewer than two bins are occupied.
///
/// With `n₀, S₀` the count and bin-index sum up to `t` and `N, S` the totals,
/// the variance is `(S₀N − S n₀)² / (N² n₀ n₁)`; candidates are compared by
/// exact cross-multiplication, falling back to floating point on overflow.
pub fn otsu_threshold_bin(hist: &[u64; HIST_BINS]) -> Option<usize> {
    let n: u64 = hist.iter().sum();
    let s: u64 = hist.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();
    let (mut n0, mut s0) = (0u64, 0u64);
    // best as (a², n₀n₁)
    let mut best: Option<(usize, u128, u128)> = None;
    for (t, &c) in hist.iter().enumerate().take(HIST_BINS - 1) {
        n0 += c;
        s0 += t as u64 * c;
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let a = (i128::from(s0) * i128::from(n) - i128::from(s) * i128::from(n0)).unsigned_abs();
        let num = a.checked_mul(a);
        let den = u128::from(n0) * u128::from(n1);
        let better = match best {
            None => true,
            Some((_, bnum, bden)) => match num {
                Some(num) => match (num.checked_mul(bden), bnum.checked_mul(den)) {
                    (Some(l), Some(r)) => l > r,
                    _ => (num as f64 / den as f64) > (bnum as f64 / bden as f64),
                },
                None => (a as f64).powi(2) / den as f64 > bnum as f64 / bden as f64,
            },
        };
        if better {
            best = Some((t, num.unwrap_or(u128::MAX), den));
        }
    }
    best.map(|(t, _, _)| t)
}

/// Otsu binarization. Pixels in bins above the optimal bin `t` become 0 (white),
/// the rest 1 (black); the returned threshold `(t + ½)/255` is the bin boundary.
pub fn otsu_binarize(image: &GrayImage) -> Result<(BinaryImage, f64)> {
    ensure_nonempty(image, "binarization needs a non-empty image")?;
    let t = otsu_threshold_bin(&histogram(image))
        .ok_or_else(|| Error::Degenerate("constant image has no valid split".into()))?;
    let bits = image.values.iter().map(|&v| u8::from(to_bin(v) <= t)).collect();
    Ok((BinaryImage::new(image.width, image.height, bits)?, (t as f64 + 0.5) / 255.0))
}

/// Histogram-matching reference shared by all probes of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessSpec {
    pub reference: GrayImage,
}

impl PreprocessSpec {
    pub fn new(reference: GrayImage) -> Result<Self> {
        ensure_nonempty(&reference, "histogram reference is empty")?;
        Ok(Self { reference })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(read_gray_any(path)?)
    }
}

/// Load a template and a probe; the probe is histogram-matched when a
/// reference is given, then binarized and checked against the template size.
pub fn ingest_triple(
    template_path: &Path,
    probe_path: &Path,
    spec: Option<&PreprocessSpec>,
) -> Result<(BinaryImage, BinaryImage)> {
    let template = read_pbm(template_path)?;
    let mut probe = read_gray_any(probe_path)?;
    if let Some(spec) = spec {
        probe = histogram_match(&probe, &spec.reference)?;
    }
    let (probe, _) = otsu_binarize(&probe)?;
    template.ensure_same_dims(&probe)?;
    Ok((template, probe))
}

/// [`ingest_triple`] over many `(template, probe)` path pairs in parallel.
pub fn ingest_many<P: AsRef<Path> + Sync>(
    pairs: &[(P, P)],
    spec: Option<&PreprocessSpec>,
) -> Result<Vec<(BinaryImage, BinaryImage)>> {
    pairs
        .par_iter()
        .map(|(t, p)| ingest_triple(t.as_ref(), p.as_ref(), spec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pnm::{write_pbm, write_pgm};
    use proptest::prelude::*;

    fn gray(values: Vec<f64>) -> GrayImage {
        let n = values.len();
        GrayImage::new(n, 1, values).unwrap()
    }

    #[test]
    fn matching_self_is_identity_at_bin_level() {
        let img = gray((0..300).map(|i| ((i * 7919) % 256) as f64 / 255.0).collect());
        let out = histogram_match(&img, &img).unwrap();
        for (a, b) in img.values.iter().zip(&out.values) {
            assert!((a - b).abs() <= 1.0 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn two_level_probe() {
        let probe = gray([0.2, 0.8].repeat(10));
        let reference = gray([0.0, 1.0].repeat(7));
        let out = histogram_match(&probe, &reference).unwrap();
        assert_eq!(out.values, [0.0, 1.0].repeat(10));
    }

    #[test]
    fn stretched_reference_histogram_is_recovered() {
        let reference = gray((0..500).map(|i| ((i * 31) % 101) as f64 / 255.0).collect());
        let probe = gray(reference.values.iter().map(|v| 2.0 * v + 0.1).collect());
        let out = histogram_match(&probe, &reference).unwrap();
        assert_eq!(histogram(&out), histogram(&reference));
    }

    #[test]
    fn constant_probe_is_returned() {
        let probe = gray(vec![0.3; 10]);
        let reference = gray(vec![0.0, 1.0]);
        assert_eq!(histogram_match(&probe, &reference).unwrap(), probe);
    }

    #[test]
    fn otsu_bimodal() {
        let img = gray([0.1, 0.9].repeat(50));
        let (bin, t) = otsu_binarize(&img).unwrap();
        assert!(t > 0.1 && t < 0.9);
        assert_eq!(bin.bits, [1, 0].repeat(50));
    }

    #[test]
    fn otsu_unbalanced_two_values_split_at_gap() {
        let mut v = vec![0.3; 90];
        v.extend([0.7; 10]);
        let (bin, t) = otsu_binarize(&gray(v)).unwrap();
        assert!(t > 0.3 && t < 0.7);
        assert_eq!(bin.bits.iter().filter(|&&b| b == 1).count(), 90);
    }

    #[test]
    fn otsu_constant_is_an_error() {
        assert!(otsu_binarize(&gray(vec![0.5; 10])).is_err());
    }

    #[test]
    fn binary_probe_passes_through() {
        let dir = tempfile::tempdir().unwrap();
        let t = crate::sim::gen_template(20, 12, 3);
        let p = crate::sim::gen_template(20, 12, 4);
        write_pbm(&dir.path().join("t.pbm"), &t).unwrap();
        write_pbm(&dir.path().join("p.pbm"), &p).unwrap();
        let (t2, p2) = ingest_triple(&dir.path().join("t.pbm"), &dir.path().join("p.pbm"), None).unwrap();
        assert_eq!((t2, p2), (t, p));
    }

    #[test]
    fn ingest_errors_name_paths_and_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let t = crate::sim::gen_template(20, 12, 3);
        write_pbm(&dir.path().join("t.pbm"), &t).unwrap();
        let missing = dir.path().join("nope.pgm");
        let err = ingest_triple(&dir.path().join("t.pbm"), &missing, None).unwrap_err();
        assert!(err.to_string().contains("nope.pgm"));
        let other = gray((0..60).map(|i| (i % 2) as f64).collect());
        let other = GrayImage::new(10, 6, other.values).unwrap();
        write_pgm(&dir.path().join("o.pgm"), &other).unwrap();
        let err = ingest_triple(&dir.path().join("t.pbm"), &dir.path().join("o.pgm"), None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("20x12") && msg.contains("10x6"), "{msg}");
    }

    fn arb_gray() -> impl Strategy<Value = GrayImage> {
        prop::collection::vec(0u8..=255, 2..200).prop_map(|v| gray(v.into_iter().map(|b| f64::from(b) / 255.0).collect()))
    }

    proptest! {
        #[test]
        fn matching_is_monotone_and_idempotent(probe in arb_gray(), reference in arb_gray()) {
            let once = histogram_match(&probe, &reference).unwrap();
            let mut pairs: Vec<(f64, f64)> = probe.values.iter().copied().zip(once.values.iter().copied()).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            prop_assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
            prop_assert!(once.values.iter().all(|v| (0.0..=1.0).contains(v)));
            let twice = histogram_match(&once, &reference).unwrap();
            let bins = |g: &GrayImage| g.values.iter().map(|&v| to_bin(v)).collect::<Vec<_>>();
            if histogram(&once).iter().filter(|&&n| n > 0).count() >= 2 {
                prop_assert_eq!(bins(&once), bins(&twice));
            }
        }

        #[test]
        fn two_valued_classes_survive_monotone_maps(lo in 0u8..128, hi in 128u8..=255, n in 2usize..40, k in 1usize..39) {
            prop_assume!(k < n);
            let vals: Vec<f64> = (0..n).map(|i| if i < k { f64::from(lo) } else { f64::from(hi) } / 255.0).collect();
            let (a, _) = otsu_binarize(&gray(vals.clone())).unwrap();
            let mapped: Vec<f64> = vals.iter().map(|v| v.sqrt()).collect();
            let (b, _) = otsu_binarize(&gray(mapped)).unwrap();
            prop_assert_eq!(a.bits, b.bits);
        }
    }
}
