//! Single-probe verdicts with per-channel diagnostics.
//!
//! Without labeled scores to calibrate on, the threshold comes from the
//! codebooks: for the channels this probe actually exhibits, the score's mean
//! and variance under each class follow from the binomial model, and the
//! threshold sits where both classes are the same number of standard
//! deviations away.

use std::fmt;

use serde::Serialize;

use super::{AggregationPlan, Decider, Order};
use crate::error::Result;
use crate::observations::{ChannelObservations, ProbeFeatures};
use crate::stats::binomial::BinomialTails;
use crate::stats::entropy::pll_score;
use crate::stats::threshold::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Original,
    Fake,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Original => "original",
            Verdict::Fake => "fake",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelDiagnostic {
    pub pattern: u32,
    pub occurrences: u64,
    pub flips: u64,
    pub p_hat: f64,
    pub p_b: f64,
    pub q_b: f64,
    pub weight: f64,
    /// Per-channel vote (1 = fake); absent for non-informative channels.
    pub vote: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub strategy: String,
    pub ordering: String,
    pub rule: String,
    pub score: f64,
    pub threshold: f64,
    /// `true`: score above threshold means fake.
    pub higher_is_fake: bool,
    pub verdict: Verdict,
    /// Posterior log-likelihood against each codebook, in nats.
    pub pll_original: f64,
    pub pll_fake: f64,
    pub channels_used: usize,
    pub per_channel: Vec<ChannelDiagnostic>,
}

impl fmt::Display for VerdictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(
            f,
            "plan: {} / {} / {}, {} channels",
            self.strategy, self.ordering, self.rule, self.channels_used
        )?;
        let side = if self.higher_is_fake { "above" } else { "below" };
        writeln!(f, "score: {:.6} (threshold {:.6}, fake {side})", self.score, self.threshold)?;
        write!(
            f,
            "pll: {:.3} nats vs originals, {:.3} nats vs fakes",
            self.pll_original, self.pll_fake
        )
    }
}

/// Score a (possibly fused multi-shot) observation set and decide.
pub fn authenticate(
    obs: &ChannelObservations,
    plan: &AggregationPlan,
    decider: &Decider<'_>,
) -> Result<VerdictReport> {
    obs.config().ensure_same(&decider.c0.config)?;
    let mut per_channel = Vec::new();
    let (mut score, mut mean0, mut mean1, mut var0, mut var1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (id, count) in obs.supported() {
        let w = id.index();
        let (p, q) = decider.laws(w);
        let alpha = plan.weights[w];
        let vote = decider.vote(w, count);
        let p_hat = count.flips as f64 / count.occurrences as f64;
        if alpha != 0.0 {
            let l = count.occurrences as f64;
            let x = match plan.spec.order {
                Order::AD => {
                    mean0 += alpha * p;
                    mean1 += alpha * q;
                    var0 += alpha * alpha * p * (1.0 - p) / l;
                    var1 += alpha * alpha * q * (1.0 - q) / l;
                    Some(p_hat)
                }
                Order::DA => decider.cut(w, count.occurrences).map(|(cut, dir)| {
                    let fake_prob = |r: f64| {
                        let t = BinomialTails::new(count.occurrences, r);
                        match dir {
                            Direction::FakeAbove => t.above(cut),
                            Direction::FakeBelow => t.below(cut),
                        }
                    };
                    let (v0, v1) = (fake_prob(p), fake_prob(q));
                    mean0 += alpha * v0;
                    mean1 += alpha * v1;
                    var0 += alpha * alpha * v0 * (1.0 - v0);
                    var1 += alpha * alpha * v1 * (1.0 - v1);
                    f64::from(vote.unwrap_or(0))
                }),
            };
            if let Some(x) = x {
                score += alpha * x;
            }
        }
        per_channel.push(ChannelDiagnostic {
            pattern: id.0,
            occurrences: count.occurrences,
            flips: count.flips,
            p_hat,
            p_b: p,
            q_b: q,
            weight: alpha,
            vote,
        });
    }
    let (s0, s1) = (var0.sqrt(), var1.sqrt());
    let threshold = if s0 + s1 > 0.0 {
        (mean0 * s1 + mean1 * s0) / (s0 + s1)
    } else {
        0.5 * (mean0 + mean1)
    };
    let higher_is_fake = mean1 >= mean0;
    let fake = if higher_is_fake { score > threshold } else { score < threshold };
    let features = ProbeFeatures::from_observations(obs);
    Ok(VerdictReport {
        strategy: plan.spec.strategy.to_string(),
        ordering: plan.spec.order.to_string(),
        rule: decider.rule().to_string(),
        score,
        threshold,
        higher_is_fake,
        verdict: if fake { Verdict::Fake } else { Verdict::Original },
        pll_original: pll_score(&features, decider.c0)?,
        pll_fake: pll_score(&features, decider.c1)?,
        channels_used: per_channel.iter().filter(|c| c.weight != 0.0).count(),
        per_channel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::{build_plan, PlanSpec, Strategy};
    use crate::channel::extract_channels;
    use crate::codebook::Codebook;
    use crate::model::ModelConfig;
    use crate::sim::{default_codebooks, gen_template, make_dataset, SimSpec};
    use crate::stats::threshold::channel_profiles;

    fn setup() -> (Codebook, Codebook) {
        default_codebooks(ModelConfig::default(), 21).unwrap()
    }

    #[test]
    fn template_as_probe_is_original() {
        let (c0, c1) = setup();
        let t = gen_template(64, 64, 2);
        let obs = extract_channels(&t, &t, &c0.config).unwrap();
        let profiles = channel_profiles(&c0, &c1, &vec![8; 512]).unwrap();
        for order in [Order::AD, Order::DA] {
            let plan = build_plan(PlanSpec::new(Strategy::S1, order), &c0, &c1, &profiles, None).unwrap();
            let decider = Decider::new(&c0, &c1, plan.spec.rule).unwrap();
            let r = authenticate(&obs, &plan, &decider).unwrap();
            assert_eq!(r.verdict, Verdict::Original);
            assert_eq!(r.score, 0.0);
            assert!(r.higher_is_fake);
        }
    }

    #[test]
    fn simulated_probes_are_classified() {
        let (c0, c1) = setup();
        let spec = |cb: &Codebook, seed| SimSpec { width: 64, height: 64, codebook: cb.clone(), seed, shots: 1 };
        let ds = make_dataset(&spec(&c0, 5), &spec(&c1, 6), 20).unwrap();
        let profiles = channel_profiles(&c0, &c1, &vec![8; 512]).unwrap();
        for order in [Order::AD, Order::DA] {
            let plan = build_plan(PlanSpec::new(Strategy::S1, order), &c0, &c1, &profiles, None).unwrap();
            let decider = Decider::new(&c0, &c1, plan.spec.rule).unwrap();
            for tri in ds.all_observations() {
                let o = authenticate(&tri.originals[0], &plan, &decider).unwrap();
                let f = authenticate(&tri.fakes[0], &plan, &decider).unwrap();
                assert_eq!(o.verdict, Verdict::Original);
                assert_eq!(f.verdict, Verdict::Fake);
                assert!(o.pll_original > o.pll_fake);
                assert!(f.pll_fake > f.pll_original);
            }
        }
    }

    #[test]
    fn report_serializes() {
        let (c0, c1) = setup();
        let t = gen_template(16, 16, 2);
        let obs = extract_channels(&t, &t, &c0.config).unwrap();
        let plan = build_plan(PlanSpec::new(Strategy::S1, Order::AD), &c0, &c1, &[], None).unwrap();
        let decider = Decider::new(&c0, &c1, plan.spec.rule).unwrap();
        let r = authenticate(&obs, &plan, &decider).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["verdict"], "original");
        assert_eq!(json["per_channel"].as_array().unwrap().len(), r.per_channel.len());
        assert!(r.to_string().starts_with("verdict: original"));
    }
}
