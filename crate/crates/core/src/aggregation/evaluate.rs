//! Minimal average error of a scalar score and best-k sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::AggregationPlan;
use crate::error::{Error, Result};

/// Best threshold found by [`evaluate_scores`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    /// `±∞` when one class is labeled wholesale.
    pub threshold: f64,
    /// `true`: score `> threshold` means fake. `false`: score `< threshold` means fake.
    pub higher_is_fake: bool,
    pub p_miss: f64,
    pub p_fa: f64,
    pub p_err: f64,
}

impl Evaluation {
    pub fn is_fake(&self, score: f64) -> bool {
        if self.higher_is_fake {
            score > self.threshold
        } else {
            score < self.threshold
        }
    }
}

/// Exhaustive threshold scan: `−∞`, midpoints of adjacent distinct scores, `+∞`,
/// each in both directions.
///
/// Errors are compared as exact integer fractions. Ties go to the smallest
/// threshold, then to "higher score = original".
pub fn evaluate_scores(originals: &[f64], fakes: &[f64]) -> Result<Evaluation> {
    if originals.is_empty() || fakes.is_empty() {
        return Err(Error::EmptyInput("score evaluation needs both classes"));
    }
    if originals.iter().chain(fakes).any(|s| s.is_nan()) {
        return Err(Error::Domain("NaN score".into()));
    }
    let (n0, n1) = (originals.len() as u64, fakes.len() as u64);
    let mut all: Vec<(f64, bool)> = originals
        .iter()
        .map(|&s| (s, false))
        .chain(fakes.iter().map(|&s| (s, true)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    // With o originals and f fakes at or below the cut:
    //   higher fake:    misses = n0 − o, accepts = f
    //   higher original: misses = o,      accepts = n1 − f
    // and 2·n0·n1·P_err = misses·n1 + accepts·n0.
    let cost = |misses: u64, accepts: u64| misses * n1 + accepts * n0;
    let mut best: Option<(u64, f64, bool, u64, u64)> = None;
    let mut consider = |t: f64, o: u64, f: u64| {
        for higher_is_fake in [false, true] {
            let (m, a) = if higher_is_fake { (n0 - o, f) } else { (o, n1 - f) };
            let c = cost(m, a);
            if best.is_none_or(|b| c < b.0) {
                best = Some((c, t, higher_is_fake, m, a));
            }
        }
    };
    consider(f64::NEG_INFINITY, 0, 0);
    let (mut o, mut f) = (0u64, 0u64);
    let mut i = 0;
    while i < all.len() {
        let v = all[i].0;
        while i < all.len() && all[i].0 == v {
            if all[i].1 {
                f += 1;
            } else {
                o += 1;
            }
            i += 1;
        }
        let t = if i < all.len() {
            v + (all[i].0 - v) / 2.0
        } else {
            f64::INFINITY
        };
        consider(t, o, f);
    }
    let (c, threshold, higher_is_fake, m, a) = best.expect("at least one candidate");
    Ok(Evaluation {
        threshold,
        higher_is_fake,
        p_miss: m as f64 / n0 as f64,
        p_fa: a as f64 / n1 as f64,
        p_err: c as f64 / (2 * n0 * n1) as f64,
    })
}

/// One point of a best-k curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub eval: Evaluation,
}

/// Evaluate the plan restricted to its first `k` ranked channels for each `k`.
///
/// Inputs are dense per-channel values per probe (see `channel_inputs`).
/// `k` beyond the ranking is truncated with a warning; `k = 0` scores every
/// probe 0 and yields `P_err = 1/2`.
pub fn best_k_sweep(
    plan: &AggregationPlan,
    originals: &[Vec<Option<f64>>],
    fakes: &[Vec<Option<f64>>],
    k_values: &[usize],
) -> Result<Vec<SweepPoint>> {
    let r = plan.ranking.len();
    if let Some(&k) = k_values.iter().find(|&&k| k > r) {
        log::warn!("k = {k} exceeds the {r} ranked channels of {}; truncating", plan.spec.strategy);
    }
    let prefix = |inputs: &Vec<Option<f64>>| {
        let mut acc = Vec::with_capacity(r + 1);
        let mut s = 0.0;
        acc.push(s);
        for id in &plan.ranking {
            if let Some(x) = inputs[id.index()] {
                s += plan.weights[id.index()] * x;
            }
            acc.push(s);
        }
        acc
    };
    let pre0: Vec<Vec<f64>> = originals.par_iter().map(prefix).collect();
    let pre1: Vec<Vec<f64>> = fakes.par_iter().map(prefix).collect();
    k_values
        .par_iter()
        .map(|&k| {
            let kk = k.min(r);
            let s0: Vec<f64> = pre0.iter().map(|p| p[kk]).collect();
            let s1: Vec<f64> = pre1.iter().map(|p| p[kk]).collect();
            Ok(SweepPoint {
                k: kk,
                eval: evaluate_scores(&s0, &s1)?,
            })
        })
        .collect()
}

/// Lowest error on a curve, ties toward the smallest `k`.
pub fn best_k(curve: &[SweepPoint]) -> Option<SweepPoint> {
    curve
        .iter()
        .copied()
        .reduce(|a, b| if b.eval.p_err < a.eval.p_err { b } else { a })
}

pub const SWEEP_CSV_HEADER: &str = "strategy,ordering,k,threshold,p_err";

/// Rows `(label, curve)` as sweep CSV.
pub fn sweep_to_csv<'a>(curves: impl IntoIterator<Item = (&'a AggregationPlan, &'a [SweepPoint])>) -> String {
    let mut out = String::from("# cdp-bpc sweep v1\n");
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for (plan, curve) in curves {
        for pt in curve {
            writeln!(
                out,
                "{},{},{},{:e},{:e}",
                plan.spec.strategy, plan.spec.order, pt.k, pt.eval.threshold, pt.eval.p_err
            )
            .unwrap();
        }
    }
    out
}
