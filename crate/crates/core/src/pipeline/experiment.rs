//! Strategy × ordering × shot-mode evaluation on a train/test split.
//!
//! The train split supplies classifier training data and the per-channel
//! support used for error profiles; every reported error is measured on the
//! test split with the threshold that minimizes it there (the minimal-error
//! protocol), swept over every `k`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::aggregation::{
    best_k, best_k_sweep, build_plan, channel_inputs, train_linear_classifier, AggregationPlan,
    Decider, DecisionRule, Order, PlanParams, PlanSpec, Strategy, SvmConfig, SweepPoint,
};
use crate::channel::fuse_multishot;
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::observations::{ChannelObservations, ProbeFeatures};
use crate::sim::TripleObservations;
use crate::stats::threshold::channel_profiles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotMode {
    /// First capture only.
    Single,
    /// All captures fused.
    Multi,
}

impl ShotMode {
    pub fn name(self) -> &'static str {
        match self {
            ShotMode::Single => "single",
            ShotMode::Multi => "multi",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentConfig {
    pub rule: DecisionRule,
    pub params: PlanParams,
    pub svm: SvmConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rule: DecisionRule::GammaCrit,
            params: PlanParams::default(),
            svm: SvmConfig::default(),
        }
    }
}

/// One cell of the results table with the curve behind it.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub plan: AggregationPlan,
    pub shot_mode: ShotMode,
    pub best: SweepPoint,
    pub curve: Vec<SweepPoint>,
}

fn fused(tri: &TripleObservations, mode: ShotMode, fake: bool) -> Result<ChannelObservations> {
    let shots = if fake { &tri.fakes } else { &tri.originals };
    match mode {
        ShotMode::Single => shots
            .first()
            .cloned()
            .ok_or(Error::EmptyInput("template without captures")),
        ShotMode::Multi => fuse_multishot(shots),
    }
}

/// Mean per-probe occurrences of each channel, at least 1.
pub fn mean_occurrences(probes: &[ChannelObservations]) -> Vec<u64> {
    let m = probes.first().map_or(0, |p| p.counts().len());
    let n = probes.len().max(1) as f64;
    (0..m)
        .map(|w| {
            let total: u64 = probes.iter().map(|p| p.counts()[w].occurrences).sum();
            ((total as f64 / n).round() as u64).max(1)
        })
        .collect()
}

/// All 16 cells: 4 strategies × 2 orderings × 2 shot modes.
pub fn run_table(
    c0: &Codebook,
    c1: &Codebook,
    train: &[TripleObservations],
    test: &[TripleObservations],
    cfg: &ExperimentConfig,
) -> Result<Vec<TableRow>> {
    if test.is_empty() {
        return Err(Error::EmptyInput("evaluation needs a non-empty test split"));
    }
    let decider = Decider::new(c0, c1, cfg.rule)?;
    let mut rows = Vec::with_capacity(16);
    for mode in [ShotMode::Single, ShotMode::Multi] {
        let collect = |set: &[TripleObservations], fake| {
            set.iter().map(|t| fused(t, mode, fake)).collect::<Result<Vec<_>>>()
        };
        let (train_o, train_f) = (collect(train, false)?, collect(train, true)?);
        let (test_o, test_f) = (collect(test, false)?, collect(test, true)?);
        let support = mean_occurrences(if train_o.is_empty() { &test_o } else { &train_o });
        let profiles = channel_profiles(c0, c1, &support)?;
        let features = |v: &[ChannelObservations]| v.iter().map(ProbeFeatures::from_observations).collect::<Vec<_>>();
        let alpha = train_linear_classifier(&features(&train_o), &features(&train_f), &cfg.svm)?.coefficients();
        for strategy in Strategy::ALL {
            for order in Order::ALL {
                let spec = PlanSpec {
                    strategy: *strategy,
                    order: *order,
                    rule: cfg.rule,
                    params: PlanParams { k: None, ..cfg.params },
                };
                let plan = build_plan(spec, c0, c1, &profiles, Some(&alpha))?;
                let inputs = |v: &[ChannelObservations]| {
                    v.iter().map(|o| channel_inputs(o, *order, &decider)).collect::<Vec<_>>()
                };
                let ks: Vec<usize> = (1..=plan.ranking.len()).collect();
                let curve = best_k_sweep(&plan, &inputs(&test_o), &inputs(&test_f), &ks)?;
                let best = best_k(&curve).ok_or(Error::EmptyInput("strategy selected no channels"))?;
                rows.push(TableRow {
                    plan,
                    shot_mode: mode,
                    best,
                    curve,
                });
            }
        }
    }
    Ok(rows)
}

pub const TABLE_CSV_HEADER: &str = "strategy,ordering,shot_mode,best_k,threshold,p_err";

pub fn table_to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("# cdp-bpc table1 v1\n");
    out.push_str(TABLE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:e},{:e}",
            r.plan.spec.strategy,
            r.plan.spec.order,
            r.shot_mode.name(),
            r.best.k,
            r.best.eval.threshold,
            r.best.eval.p_err
        )
        .unwrap();
    }
    out
}

/// Single-shot error curves over `k`.
pub fn fig3_to_csv(rows: &[TableRow]) -> String {
    crate::aggregation::sweep_to_csv(
        rows.iter()
            .filter(|r| r.shot_mode == ShotMode::Single)
            .map(|r| (&r.plan, r.curve.as_slice())),
    )
    .replacen("sweep v1", "fig3 v1", 1)
}

/// Cell lookup.
pub fn cell(rows: &[TableRow], strategy: Strategy, order: Order, mode: ShotMode) -> Option<&TableRow> {
    rows.iter()
        .find(|r| r.plan.spec.strategy == strategy && r.plan.spec.order == order && r.shot_mode == mode)
}
