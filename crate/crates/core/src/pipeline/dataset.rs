//! Dataset directories: layout, manifest, deterministic split.
//!
//! ```text
//! manifest.json
//! templates/NNNN.pbm
//! originals/NNNN_shotS.pbm      (S is 0-based; .pgm probes are accepted too)
//! fakes/NNNN_shotS.pbm
//! ```
//!
//! The manifest is written first with `"complete": false` and rewritten with
//! `true` once every image is on disk, so an interrupted run is detectable.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::extract_channels;
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::imaging::{ingest_triple, PreprocessSpec};
use crate::model::ModelConfig;
use crate::pnm::{write_atomic, write_pbm};
use crate::sim::{default_codebooks, make_dataset, mix64, mixed_codebooks, MixedParams, SimSpec, TripleObservations};

pub const MANIFEST: &str = "manifest.json";
const FORMAT: &str = "cdp-bpc dataset v1";

/// Which codebook pair a simulated dataset is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Default,
    Mixed,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Preset::Default),
            "mixed" => Ok(Preset::Mixed),
            _ => Err(Error::InvalidConfig(format!("unknown codebook preset {s:?}"))),
        }
    }
}

impl Preset {
    pub fn codebooks(self, config: ModelConfig, seed: u64) -> Result<(Codebook, Codebook)> {
        match self {
            Preset::Default => default_codebooks(config, seed),
            Preset::Mixed => mixed_codebooks(config, MixedParams::default(), seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub h: u32,
    pub prob_floor: f64,
    pub n_templates: usize,
    pub shots: u32,
    /// Generating codebooks of simulated datasets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationInfo>,
    /// Gray reference for histogram matching, relative to the dataset root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histogram_reference: Option<String>,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationInfo {
    pub preset: Preset,
    pub codebook_original: serde_json::Value,
    pub codebook_fake: serde_json::Value,
}

impl Manifest {
    pub fn config(&self) -> Result<ModelConfig> {
        ModelConfig::new(self.h, self.prob_floor)
    }

    /// The generating codebooks, when the dataset is simulated.
    pub fn true_codebooks(&self) -> Result<Option<(Codebook, Codebook)>> {
        self.simulation
            .as_ref()
            .map(|s| {
                Ok((
                    Codebook::from_json(&s.codebook_original.to_string())?,
                    Codebook::from_json(&s.codebook_fake.to_string())?,
                ))
            })
            .transpose()
    }
}

pub fn template_path(root: &Path, index: usize) -> PathBuf {
    root.join("templates").join(format!("{index:04}.pbm"))
}

/// `.pbm` path of a capture; [`Dataset::probe_path`] also resolves `.pgm`.
pub fn probe_path(root: &Path, index: usize, fake: bool, shot: u32) -> PathBuf {
    let dir = if fake { "fakes" } else { "originals" };
    root.join(dir).join(format!("{index:04}_shot{shot}.pbm"))
}

/// Parameters of a simulated dataset on disk.
#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub out: PathBuf,
    pub seed: u64,
    pub n_templates: usize,
    pub shots: u32,
    pub width: usize,
    pub height: usize,
    pub config: ModelConfig,
    pub preset: Preset,
}

fn write_manifest(root: &Path, m: &Manifest) -> Result<()> {
    write_atomic(&root.join(MANIFEST), serde_json::to_string_pretty(m)?.as_bytes())
}

/// Render a simulated dataset to disk. Output is a pure function of the config.
pub fn simulate_to_disk(cfg: &SimulateConfig) -> Result<Manifest> {
    let (c0, c1) = cfg.preset.codebooks(cfg.config, cfg.seed)?;
    let spec = |cb: &Codebook| SimSpec {
        width: cfg.width,
        height: cfg.height,
        codebook: cb.clone(),
        seed: cfg.seed,
        shots: cfg.shots,
    };
    let ds = make_dataset(&spec(&c0), &spec(&c1), cfg.n_templates)?;
    for dir in ["", "templates", "originals", "fakes"] {
        let d = cfg.out.join(dir);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let mut manifest = Manifest {
        format: FORMAT.into(),
        seed: cfg.seed,
        width: cfg.width,
        height: cfg.height,
        h: cfg.config.h(),
        prob_floor: cfg.config.prob_floor(),
        n_templates: cfg.n_templates,
        shots: cfg.shots,
        simulation: Some(SimulationInfo {
            preset: cfg.preset,
            codebook_original: serde_json::from_str(&c0.to_json())?,
            codebook_fake: serde_json::from_str(&c1.to_json())?,
        }),
        histogram_reference: None,
        complete: false,
    };
    write_manifest(&cfg.out, &manifest)?;
    (0..cfg.n_templates).into_par_iter().try_for_each(|i| {
        let tri = ds.triple(i);
        write_pbm(&template_path(&cfg.out, i), &tri.template)?;
        for (s, (o, f)) in tri.originals.iter().zip(&tri.fakes).enumerate() {
            write_pbm(&probe_path(&cfg.out, i, false, s as u32), o)?;
            write_pbm(&probe_path(&cfg.out, i, true, s as u32), f)?;
        }
        Ok::<_, Error>(())
    })?;
    manifest.complete = true;
    write_manifest(&cfg.out, &manifest)?;
    Ok(manifest)
}

/// A complete dataset directory.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Manifest,
    preprocess: Option<PreprocessSpec>,
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.to_string()))?;
        if !manifest.complete {
            return Err(Error::parse(&path, "dataset is incomplete (no completion flag)"));
        }
        manifest.config()?;
        let preprocess = manifest
            .histogram_reference
            .as_ref()
            .map(|r| PreprocessSpec::load(&root.join(r)))
            .transpose()?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest,
            preprocess,
        })
    }

    pub fn config(&self) -> ModelConfig {
        self.manifest.config().expect("validated on open")
    }

    pub fn probe_path(&self, index: usize, fake: bool, shot: u32) -> PathBuf {
        let pbm = probe_path(&self.root, index, fake, shot);
        if pbm.exists() {
            pbm
        } else {
            pbm.with_extension("pgm")
        }
    }

    /// Channel counts of every capture of one template.
    pub fn observations(&self, index: usize) -> Result<TripleObservations> {
        let cfg = self.config();
        let tpath = template_path(&self.root, index);
        let load = |fake: bool| {
            (0..self.manifest.shots)
                .map(|s| {
                    let (t, p) = ingest_triple(&tpath, &self.probe_path(index, fake, s), self.preprocess.as_ref())?;
                    extract_channels(&t, &p, &cfg)
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(TripleObservations {
            originals: load(false)?,
            fakes: load(true)?,
        })
    }

    pub fn observations_for(&self, indices: &[usize]) -> Result<Vec<TripleObservations>> {
        indices.par_iter().map(|&i| self.observations(i)).collect()
    }
}

/// Deterministic train/test split of `0..n` by the hash of `(seed, index)`.
///
/// The train split holds exactly `round(fraction · n)` indices; both splits
/// come back sorted and must be non-empty.
pub fn split(seed: u64, n: usize, train_fraction: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::EmptyInput("train/test split leaves one side empty"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (mix64(seed ^ mix64(i as u64)), i));
    let (mut train, mut test) = (order[..n_train].to_vec(), order[n_train..].to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_exact_disjoint_and_seeded() {
        let (tr, te) = split(3, 1440, 500.0 / 1440.0).unwrap();
        assert_eq!((tr.len(), te.len()), (500, 940));
        let mut all: Vec<_> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1440).collect::<Vec<_>>());
        assert_eq!(split(3, 1440, 500.0 / 1440.0).unwrap().0, tr);
        assert_ne!(split(4, 1440, 500.0 / 1440.0).unwrap().0, tr);
        assert!(split(3, 10, 0.0).is_err());
        assert!(split(3, 1, 0.5).is_err());
    }

    #[test]
    fn simulate_then_open() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimulateConfig {
            out: dir.path().join("ds"),
            seed: 5,
            n_templates: 3,
            shots: 2,
            width: 24,
            height: 20,
            config: ModelConfig::default(),
            preset: Preset::Default,
        };
        let m = simulate_to_disk(&cfg).unwrap();
        let ds = Dataset::open(&cfg.out).unwrap();
        assert_eq!(ds.manifest, m);
        let (c0, c1) = m.true_codebooks().unwrap().unwrap();
        assert_eq!((c0, c1), Preset::Default.codebooks(ModelConfig::default(), 5).unwrap());
        // disk round trip reproduces in-memory simulation
        let spec = |cb: &Codebook| SimSpec { width: 24, height: 20, codebook: cb.clone(), seed: 5, shots: 2 };
        let (c0, c1) = m.true_codebooks().unwrap().unwrap();
        let mem = make_dataset(&spec(&c0), &spec(&c1), 3).unwrap();
        for i in 0..3 {
            let a = ds.observations(i).unwrap();
            let b = mem.observations(i);
            assert_eq!(a.originals, b.originals);
            assert_eq!(a.fakes, b.fakes);
        }
    }

    #[test]
    fn incomplete_dataset_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest {
            format: FORMAT.into(),
            seed: 0,
            width: 8,
            height: 8,
            h: 3,
            prob_floor: 1e-6,
            n_templates: 0,
            shots: 1,
            simulation: None,
            histogram_reference: None,
            complete: false,
        };
        write_manifest(dir.path(), &m).unwrap();
        assert!(Dataset::open(dir.path()).is_err());
        assert!(Dataset::open(&dir.path().join("missing")).is_err());
    }
}
