//! Shared domain vocabulary: model configuration, pattern identities and images.
//!
//! Bit encoding is uniform across the crate: `1` is a black dot and `0` a white
//! dot. Only XOR of template and probe bits enters any statistic, so the
//! polarity matters solely for the PBM files and for binarization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default clamp ε applied to every codebook probability.
pub const DEFAULT_PROB_FLOOR: f64 = 1e-6;

/// Largest supported pattern side. `h = 7` would already need 2^49 channels.
pub const MAX_PATTERN_SIDE: u32 = 5;

/// Description of the first invariant a value breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::Invariant(v.0)
    }
}

/// Invariant check that never fails itself: it reports the first violation or `Ok`.
pub trait Validate {
    fn validate(&self) -> std::result::Result<(), Violation>;
}

/// Pattern side `h` and probability floor ε. The channel count `M = 2^(h²)` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    h: u32,
    prob_floor: f64,
}

impl ModelConfig {
    pub fn new(h: u32, prob_floor: f64) -> Result<Self> {
        if h.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("pattern side h must be odd, got {h}")));
        }
        if h > MAX_PATTERN_SIDE {
            return Err(Error::InvalidConfig(format!(
                "pattern side h = {h} exceeds the supported maximum {MAX_PATTERN_SIDE}"
            )));
        }
        if !(prob_floor > 0.0 && prob_floor < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "probability floor must lie in (0, 0.5), got {prob_floor}"
            )));
        }
        Ok(Self { h, prob_floor })
    }

    /// Pattern side.
    pub fn h(&self) -> u32 {
        self.h
    }

    /// Half-width of the neighborhood, `⌊h/2⌋`.
    pub fn radius(&self) -> usize {
        (self.h / 2) as usize
    }

    /// Number of channels `M = 2^(h²)`.
    pub fn num_patterns(&self) -> usize {
        1usize << (self.h * self.h)
    }

    pub fn prob_floor(&self) -> f64 {
        self.prob_floor
    }

    /// Clamp a probability into `[ε, 1−ε]`.
    pub fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.prob_floor, 1.0 - self.prob_floor)
    }

    /// Number of pixels with a full neighborhood inside a `width × height` image.
    pub fn interior_count(&self, width: usize, height: usize) -> usize {
        let side = self.h as usize;
        if width < side || height < side {
            0
        } else {
            (width - side + 1) * (height - side + 1)
        }
    }

    pub(crate) fn ensure_same(&self, other: &ModelConfig) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ConfigMismatch(format!(
                "h = {}, ε = {} vs h = {}, ε = {}",
                self.h, self.prob_floor, other.h, other.prob_floor
            )))
        }
    }
}

// The floor is validated finite, so equality is reflexive.
impl Eq for ModelConfig {}

impl std::hash::Hash for ModelConfig {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.h.hash(state);
        self.prob_floor.to_bits().hash(state);
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            h: 3,
            prob_floor: DEFAULT_PROB_FLOOR,
        }
    }
}

/// Identity of an `h × h` binary neighborhood, i.e. the channel index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternId(pub u32);

impl PatternId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Row-major binary image; `1` = black, `0` = white.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    pub width: usize,
    pub height: usize,
    pub bits: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        let img = Self { width, height, bits };
        img.validate()?;
        Ok(img)
    }

    pub fn filled(width: usize, height: usize, bit: u8) -> Result<Self> {
        Self::new(width, height, vec![bit; width * height])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.width + col]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Bitwise complement.
    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| b ^ 1).collect(),
        }
    }

    /// Gray rendering: black dots become 0.0, white dots 1.0.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            values: self.bits.iter().map(|&b| if b == 1 { 0.0 } else { 1.0 }).collect(),
        }
    }

    pub(crate) fn ensure_same_dims(&self, other: &BinaryImage) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: format!("{}x{}", self.width, self.height),
                actual: format!("{}x{}", other.width, other.height),
            })
        }
    }
}

impl Validate for BinaryImage {
    fn validate(&self) -> std::result::Result<(), Violation> {
        if self.width == 0 || self.height == 0 {
            return Err(Violation(format!(
                "dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if self.bits.len() != self.width * self.height {
            return Err(Violation(format!(
                "length mismatch: {} bits for a {}x{} image",
                self.bits.len(),
                self.width,
                self.height
            )));
        }
        if let Some(pos) = self.bits.iter().position(|&b| b > 1) {
            return Err(Violation(format!("non-binary value {} at index {pos}", self.bits[pos])));
        }
        Ok(())
    }
}

/// Row-major gray-level image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let img = Self {
            width,
            height,
            values,
        };
        img.validate()?;
        Ok(img)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl Validate for GrayImage {
    fn validate(&self) -> std::result::Result<(), Violation> {
        if self.width == 0 || self.height == 0 {
            return Err(Violation(format!(
                "dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if self.values.len() != self.width * self.height {
            return Err(Violation(format!(
                "length mismatch: {} values for a {}x{} image",
                self.values.len(),
                self.width,
                self.height
            )));
        }
        if let Some(pos) = self.values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Violation(format!(
                "value {} at index {pos} outside [0, 1]",
                self.values[pos]
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_derives_channel_count() {
        assert_eq!(ModelConfig::default().num_patterns(), 512);
        assert_eq!(ModelConfig::new(1, 1e-6).unwrap().num_patterns(), 2);
        assert_eq!(ModelConfig::new(5, 1e-6).unwrap().num_patterns(), 1 << 25);
    }

    #[test]
    fn config_rejects_even_side_and_bad_floor() {
        assert!(ModelConfig::new(2, 1e-6).is_err());
        assert!(ModelConfig::new(4, 1e-6).is_err());
        assert!(ModelConfig::new(7, 1e-6).is_err());
        assert!(ModelConfig::new(3, 0.0).is_err());
        assert!(ModelConfig::new(3, 0.5).is_err());
        assert!(ModelConfig::new(3, f64::NAN).is_err());
    }

    #[test]
    fn binary_image_validation() {
        let ok = BinaryImage {
            width: 2,
            height: 2,
            bits: vec![0, 1, 1, 0],
        };
        assert_eq!(ok.validate(), Ok(()));

        let short = BinaryImage {
            width: 2,
            height: 2,
            bits: vec![0, 1, 1],
        };
        let v = short.validate().unwrap_err();
        assert!(v.0.contains("length mismatch"), "{v}");

        let nonbinary = BinaryImage {
            width: 2,
            height: 1,
            bits: vec![0, 2],
        };
        assert!(nonbinary.validate().is_err());
        assert!(BinaryImage::new(2, 2, vec![0, 1, 1]).is_err());
    }

    #[test]
    fn gray_image_validation() {
        assert!(GrayImage::new(2, 1, vec![0.0, 1.0]).is_ok());
        assert!(GrayImage::new(2, 1, vec![0.0, 1.5]).is_err());
        assert!(GrayImage::new(2, 1, vec![0.0, f64::NAN]).is_err());
        assert!(GrayImage::new(2, 2, vec![0.0]).is_err());
    }

    #[test]
    fn interior_count_excludes_border() {
        let cfg = ModelConfig::default();
        assert_eq!(cfg.interior_count(228, 228), 226 * 226);
        assert_eq!(cfg.interior_count(2, 10), 0);
        assert_eq!(cfg.interior_count(3, 3), 1);
    }
}
