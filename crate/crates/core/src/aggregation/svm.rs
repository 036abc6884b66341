//! Linear max-margin classifier on per-channel flip rates.
//!
//! Training is regularized hinge-loss subgradient descent (Pegasos step
//! `1/(λt)`), single-threaded, with a seeded shuffle per epoch and iterate
//! averaging after the first epoch. Features are standardized per channel with
//! training statistics; channels absent from a probe take the training mean.
//! Labels: original −1, fake +1, so positive weights point toward fakes.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observations::ProbeFeatures;
use crate::sim::rng::{stream, Role};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    fn fit(rows: &[&ProbeFeatures]) -> Self {
        let m = rows[0].len();
        let mut mean = vec![0.0; m];
        let mut seen = vec![0usize; m];
        for r in rows {
            for (w, v) in r.p_hat().iter().enumerate() {
                if let Some(v) = v {
                    mean[w] += v;
                    seen[w] += 1;
                }
            }
        }
        for (m, &n) in mean.iter_mut().zip(&seen) {
            if n > 0 {
                *m /= n as f64;
            }
        }
        let mut var = vec![0.0; m];
        for r in rows {
            for (w, v) in r.p_hat().iter().enumerate() {
                let d = v.unwrap_or(mean[w]) - mean[w];
                var[w] += d * d;
            }
        }
        let n = rows.len() as f64;
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, f: &ProbeFeatures) -> Vec<f64> {
        f.p_hat()
            .iter()
            .enumerate()
            .map(|(w, v)| (v.unwrap_or(self.mean[w]) - self.mean[w]) / self.std[w])
            .collect()
    }
}

/// Trained weights in standardized space plus the standardization itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardization: Standardization,
}

impl LinearClassifier {
    /// Signed margin; positive leans fake.
    pub fn decision(&self, f: &ProbeFeatures) -> f64 {
        dot(&self.weights, &self.standardization.apply(f)) + self.bias
    }

    /// Weights on raw flip rates, `w_ω / σ_ω`; the form aggregation plans consume.
    pub fn coefficients(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.standardization.std)
            .map(|(w, s)| w / s)
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::pnm::write_atomic(path, serde_json::to_string(self)?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: Self = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        let m = c.weights.len();
        if c.standardization.mean.len() != m || c.standardization.std.len() != m {
            return Err(Error::parse(path, "standardization length differs from weights"));
        }
        Ok(c)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean hinge loss `max(0, 1 − y f(x))` over labeled probes.
pub fn hinge_loss(clf: &LinearClassifier, originals: &[ProbeFeatures], fakes: &[ProbeFeatures]) -> f64 {
    let n = (originals.len() + fakes.len()) as f64;
    let sum: f64 = originals
        .iter()
        .map(|f| (1.0 + clf.decision(f)).max(0.0))
        .chain(fakes.iter().map(|f| (1.0 - clf.decision(f)).max(0.0)))
        .sum();
    sum / n
}

/// Fit on labeled features. The bias is regularized like any weight.
pub fn train_linear_classifier(
    originals: &[ProbeFeatures],
    fakes: &[ProbeFeatures],
    config: &SvmConfig,
) -> Result<LinearClassifier> {
    if originals.len() < 2 || fakes.len() < 2 {
        return Err(Error::Degenerate(format!(
            "classifier training needs at least 2 probes per class, got {} originals and {} fakes",
            originals.len(),
            fakes.len()
        )));
    }
    if config.lambda.is_nan() || config.lambda <= 0.0 || config.epochs == 0 {
        return Err(Error::InvalidConfig("lambda must be positive and epochs at least 1".into()));
    }
    let cfg = originals[0].config();
    for f in originals.iter().chain(fakes) {
        cfg.ensure_same(f.config())?;
    }
    let rows: Vec<&ProbeFeatures> = originals.iter().chain(fakes).collect();
    let standardization = Standardization::fit(&rows);
    let x: Vec<Vec<f64>> = rows.iter().map(|f| standardization.apply(f)).collect();
    let y: Vec<f64> = (0..rows.len())
        .map(|i| if i < originals.len() { -1.0 } else { 1.0 })
        .collect();

    let m = x[0].len();
    let mut w = vec![0.0; m];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; m];
    let mut b_avg = 0.0;
    let mut averaged = 0u64;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut rng = stream(config.seed, 0, Role::Aux, 3);
    let mut t = 0u64;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (config.lambda * t as f64);
            let margin = y[i] * (dot(&w, &x[i]) + b);
            let shrink = 1.0 - eta * config.lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            b *= shrink;
            if margin < 1.0 {
                for (v, xi) in w.iter_mut().zip(&x[i]) {
                    *v += eta * y[i] * xi;
                }
                b += eta * y[i];
            }
            if epoch > 0 || config.epochs == 1 {
                averaged += 1;
                let a = 1.0 / averaged as f64;
                for (s, v) in w_avg.iter_mut().zip(&w) {
                    *s += (v - *s) * a;
                }
                b_avg += (b - b_avg) * a;
            }
        }
    }
    Ok(LinearClassifier {
        weights: w_avg,
        bias: b_avg,
        standardization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use crate::observations::{ChannelCount, ChannelObservations};

    fn feat(cfg: ModelConfig, counts: &[(u64, u64)]) -> ProbeFeatures {
        let counts = counts.iter().map(|&(d, l)| ChannelCount::new(d, l)).collect();
        ProbeFeatures::from_observations(&ChannelObservations::from_counts(cfg, counts).unwrap())
    }

    fn toy() -> (Vec<ProbeFeatures>, Vec<ProbeFeatures>) {
        // one-pixel patterns: two channels; channel 1 carries no signal
        let cfg = ModelConfig::new(1, 1e-6).unwrap();
        let o = vec![feat(cfg, &[(1, 10), (5, 10)]), feat(cfg, &[(2, 10), (5, 10)])];
        let f = vec![feat(cfg, &[(7, 10), (5, 10)]), feat(cfg, &[(8, 10), (5, 10)])];
        (o, f)
    }

    #[test]
    fn separable_toy_set() {
        let (o, f) = toy();
        let clf = train_linear_classifier(&o, &f, &SvmConfig::default()).unwrap();
        assert!(clf.weights[0] > 0.0);
        assert_eq!(clf.weights[1], 0.0);
        assert!(o.iter().all(|x| clf.decision(x) < 0.0));
        assert!(f.iter().all(|x| clf.decision(x) > 0.0));
        assert!(hinge_loss(&clf, &o, &f) < 0.05, "{}", hinge_loss(&clf, &o, &f));
    }

    #[test]
    fn deterministic_given_seed() {
        let (o, f) = toy();
        let cfg = SvmConfig::default();
        let a = train_linear_classifier(&o, &f, &cfg).unwrap();
        let b = train_linear_classifier(&o, &f, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_is_rejected() {
        let (o, f) = toy();
        assert!(train_linear_classifier(&o, &f[..1], &SvmConfig::default()).is_err());
        assert!(train_linear_classifier(&[], &f, &SvmConfig::default()).is_err());
    }

    #[test]
    fn coefficients_are_raw_space() {
        let (o, f) = toy();
        let clf = train_linear_classifier(&o, &f, &SvmConfig::default()).unwrap();
        let c = clf.coefficients();
        // decision is affine in raw rates with slope c
        let shifted = feat(ModelConfig::new(1, 1e-6).unwrap(), &[(3, 10), (5, 10)]);
        let delta = clf.decision(&shifted) - clf.decision(&o[1]);
        assert!((delta - c[0] * 0.1).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let (o, f) = toy();
        let clf = train_linear_classifier(&o, &f, &SvmConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clf.json");
        clf.save(&path).unwrap();
        assert_eq!(LinearClassifier::load(&path).unwrap(), clf);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"standardization\"") && text.contains("\"bias\""));
    }
}
