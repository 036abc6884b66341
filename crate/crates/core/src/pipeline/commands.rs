//! End-to-end operations over dataset directories and codebook files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::dataset::{simulate_to_disk, split, Dataset, Manifest, SimulateConfig};
use super::experiment::{mean_occurrences, run_table, fig3_to_csv, table_to_csv, ExperimentConfig, ShotMode, TableRow};
use crate::aggregation::{
    authenticate, build_plan, train_linear_classifier, Decider, LinearClassifier, PlanSpec, Strategy,
    SvmConfig, VerdictReport,
};
use crate::channel::{extract_channels, fuse_multishot};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::imaging::{ingest_triple, PreprocessSpec};
use crate::observations::{ChannelObservations, ProbeFeatures};
use crate::pnm::write_atomic;
use crate::sim::{fig2_experiment, Fig2Point, TripleObservations};
use crate::stats::threshold::{channel_profiles, profiles_with_empirical_csv, ChannelErrorProfile};

/// Write a deterministic simulated dataset.
pub fn cmd_simulate(config: &SimulateConfig) -> Result<Manifest> {
    simulate_to_disk(config)
}

/// Where the train split of a dataset comes from.
#[derive(Debug, Clone)]
pub struct SplitConfig {
    pub dataset: PathBuf,
    pub seed: u64,
    pub train_fraction: f64,
}

impl SplitConfig {
    fn load(&self) -> Result<(Dataset, Vec<usize>, Vec<usize>)> {
        let ds = Dataset::open(&self.dataset)?;
        let (train, test) = split(self.seed, ds.manifest.n_templates, self.train_fraction)?;
        Ok((ds, train, test))
    }
}

fn pooled(set: &[TripleObservations], fake: bool) -> Result<ChannelObservations> {
    let all: Vec<ChannelObservations> = set
        .iter()
        .flat_map(|t| if fake { &t.fakes } else { &t.originals })
        .cloned()
        .collect();
    fuse_multishot(&all)
}

/// Estimate `C₀` and `C₁` from every capture of the train split.
pub fn cmd_estimate(split_cfg: &SplitConfig, out_orig: &Path, out_fake: &Path) -> Result<(Codebook, Codebook)> {
    let (ds, train, _) = split_cfg.load()?;
    let obs = ds.observations_for(&train)?;
    let c0 = Codebook::from_observations(&pooled(&obs, false)?);
    let c1 = Codebook::from_observations(&pooled(&obs, true)?);
    c0.save(out_orig)?;
    c1.save(out_fake)?;
    Ok((c0, c1))
}

/// Train the linear classifier on the train split.
pub fn cmd_train(split_cfg: &SplitConfig, mode: ShotMode, svm: &SvmConfig, out: &Path) -> Result<LinearClassifier> {
    let (ds, train, _) = split_cfg.load()?;
    let obs = ds.observations_for(&train)?;
    let features = |fake: bool| -> Result<Vec<ProbeFeatures>> {
        obs.iter()
            .map(|t| {
                let shots = if fake { &t.fakes } else { &t.originals };
                let o = match mode {
                    ShotMode::Single => shots[0].clone(),
                    ShotMode::Multi => fuse_multishot(shots)?,
                };
                Ok(ProbeFeatures::from_observations(&o))
            })
            .collect()
    };
    let clf = train_linear_classifier(&features(false)?, &features(true)?, svm)?;
    clf.save(out)?;
    Ok(clf)
}

#[derive(Debug, Clone)]
pub struct AuthenticateConfig {
    pub template: PathBuf,
    /// One path per capture; several captures are fused.
    pub probes: Vec<PathBuf>,
    pub reference: Option<PathBuf>,
    pub codebook_orig: PathBuf,
    pub codebook_fake: PathBuf,
    pub plan: PlanSpec,
    /// Required by strategy s4.
    pub classifier: Option<PathBuf>,
}

/// Verdict for one printed pattern from one or more captures.
///
/// Channel error profiles for strategy s3 use this probe's own support.
pub fn cmd_authenticate(cfg: &AuthenticateConfig) -> Result<VerdictReport> {
    let c0 = Codebook::load(&cfg.codebook_orig)?;
    let c1 = Codebook::load(&cfg.codebook_fake)?;
    c0.config.ensure_same(&c1.config)?;
    if cfg.probes.is_empty() {
        return Err(Error::EmptyInput("authentication needs at least one probe"));
    }
    let reference = cfg.reference.as_deref().map(PreprocessSpec::load).transpose()?;
    let shots = cfg
        .probes
        .iter()
        .map(|p| {
            let (t, probe) = ingest_triple(&cfg.template, p, reference.as_ref())?;
            extract_channels(&t, &probe, &c0.config)
        })
        .collect::<Result<Vec<_>>>()?;
    let obs = fuse_multishot(&shots)?;
    let support: Vec<u64> = obs.counts().iter().map(|c| c.occurrences.max(1)).collect();
    let profiles = channel_profiles(&c0, &c1, &support)?;
    let alpha = match (cfg.plan.strategy, &cfg.classifier) {
        (Strategy::S4, Some(path)) => Some(LinearClassifier::load(path)?.coefficients()),
        (Strategy::S4, None) => {
            return Err(Error::Plan("strategy s4 needs a trained classifier file".into()))
        }
        _ => None,
    };
    let plan = build_plan(cfg.plan, &c0, &c1, &profiles, alpha.as_deref())?;
    let decider = Decider::new(&c0, &c1, cfg.plan.rule)?;
    authenticate(&obs, &plan, &decider)
}

#[derive(Debug, Clone)]
pub struct EvaluateConfig {
    pub split: SplitConfig,
    pub codebook_orig: PathBuf,
    pub codebook_fake: PathBuf,
    pub experiment: ExperimentConfig,
    /// Simulated probes per class per channel for fig2.csv.
    pub fig2_probes: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableCell {
    pub strategy: String,
    pub ordering: String,
    pub shot_mode: &'static str,
    pub best_k: usize,
    pub p_err: f64,
}

#[derive(Debug, Clone)]
pub struct EvaluationOutput {
    pub rows: Vec<TableRow>,
    pub fig2: Vec<Fig2Point>,
}

impl EvaluationOutput {
    pub fn cells(&self) -> Vec<TableCell> {
        self.rows
            .iter()
            .map(|r| TableCell {
                strategy: r.plan.spec.strategy.to_string(),
                ordering: r.plan.spec.order.to_string(),
                shot_mode: r.shot_mode.name(),
                best_k: r.best.k,
                p_err: r.best.eval.p_err,
            })
            .collect()
    }
}

/// Run every strategy, ordering and shot mode on the test split and write
/// `fig2.csv`, `fig3.csv` and `table1.csv` under `out`.
pub fn cmd_evaluate(cfg: &EvaluateConfig) -> Result<EvaluationOutput> {
    let c0 = Codebook::load(&cfg.codebook_orig)?;
    let c1 = Codebook::load(&cfg.codebook_fake)?;
    let (ds, train, test) = cfg.split.load()?;
    ds.config().ensure_same(&c0.config)?;
    let train_obs = ds.observations_for(&train)?;
    let test_obs = ds.observations_for(&test)?;
    let rows = run_table(&c0, &c1, &train_obs, &test_obs, &cfg.experiment)?;

    let single: Vec<ChannelObservations> = test_obs.iter().map(|t| t.originals[0].clone()).collect();
    let support = mean_occurrences(&single);
    let l = (support.iter().sum::<u64>() as f64 / support.len() as f64).round().max(1.0) as u64;
    let fig2 = fig2_experiment(&c0, &c1, l, cfg.fig2_probes, cfg.split.seed)?;
    let profiles: Vec<ChannelErrorProfile> = fig2.iter().map(|p| p.profile).collect();
    let empirical: Vec<f64> = fig2.iter().map(|p| p.empirical_p_err).collect();

    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    write_atomic(&cfg.out.join("fig2.csv"), profiles_with_empirical_csv(&profiles, &empirical).as_bytes())?;
    write_atomic(&cfg.out.join("fig3.csv"), fig3_to_csv(&rows).as_bytes())?;
    write_atomic(&cfg.out.join("table1.csv"), table_to_csv(&rows).as_bytes())?;
    Ok(EvaluationOutput { rows, fig2 })
}
