//! Combining per-channel evidence into one score.
//!
//! A plan assigns a weight `α_ω` to each channel. With ordering AD the score is
//! `Σ α_ω p̂_ω` over the channels present in the probe; with DA each channel
//! first votes `Δ_ω ∈ {0, 1}` (1 = fake) and the score is `Σ α_ω Δ_ω`. Both
//! scores grow with flip rates, so higher means fake unless trained weights
//! say otherwise. Channel support `L^ω` never weights the sum.

pub mod evaluate;
pub mod svm;
pub mod verdict;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::model::PatternId;
use crate::observations::{ChannelCount, ChannelObservations, ProbeFeatures};
use crate::stats::threshold::{gamma_crit, optimal_threshold, ChannelErrorProfile, Direction};

pub use evaluate::{best_k, best_k_sweep, evaluate_scores, sweep_to_csv, Evaluation, SweepPoint};
pub use svm::{train_linear_classifier, LinearClassifier, Standardization, SvmConfig};
pub use verdict::{authenticate, ChannelDiagnostic, Verdict, VerdictReport};

macro_rules! named_enum {
    ($ty:ident { $($var:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$var),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($ty::$var => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($ty::$var),)+
                    _ => Err(Error::Plan(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"), s
                    ))),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Every informative channel, weight 1.
    S1,
    /// Reliable channels: `P_b(ω) ≤ μ`.
    S2,
    /// Low-error channels: optimal `P_err(ω) ≤ ν`.
    S3,
    /// Linear classifier coefficients.
    S4,
}

named_enum!(Strategy { S1 => "s1", S2 => "s2", S3 => "s3", S4 => "s4" });

/// AD: aggregate flip rates, then decide once. DA: decide per channel, then count votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    AD,
    DA,
}

named_enum!(Order { AD => "ad", DA => "da" });

/// Per-channel threshold used by DA votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRule {
    /// Equal-likelihood boundary `γ_crit`.
    GammaCrit,
    /// Error-minimizing integer cut for the observed `L^ω`.
    GammaOpt,
}

named_enum!(DecisionRule { GammaCrit => "gamma-crit", GammaOpt => "gamma-opt" });

/// Strategy parameters. `mu` and `nu` must lie in `[0, 1]`; `k` keeps the
/// first `k` ranked channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanParams {
    pub mu: f64,
    pub nu: f64,
    pub k: Option<usize>,
}

impl Default for PlanParams {
    /// No selection beyond informativeness: every channel passes `μ = 1` and `ν = 0.5`.
    fn default() -> Self {
        Self {
            mu: 1.0,
            nu: 0.5,
            k: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanSpec {
    pub strategy: Strategy,
    pub order: Order,
    pub rule: DecisionRule,
    pub params: PlanParams,
}

impl PlanSpec {
    pub fn new(strategy: Strategy, order: Order) -> Self {
        Self {
            strategy,
            order,
            rule: DecisionRule::GammaCrit,
            params: PlanParams::default(),
        }
    }
}

/// Channel weights plus the order in which best-k keeps channels.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationPlan {
    pub spec: PlanSpec,
    /// `α_ω` for all `M` channels; zero on non-informative channels.
    pub weights: Vec<f64>,
    /// Channels with non-zero weight, best first.
    pub ranking: Vec<PatternId>,
}

// Optimal per-channel errors are compared against ν with this slack; the
// optimum never exceeds 1/2 except by rounding.
const NU_SLACK: f64 = 1e-12;

/// Weights and ranking for a strategy.
///
/// Rankings: S1 ascending channel id, S2 ascending `P_b`, S3 ascending
/// optimal `P_err`, S4 descending `|α|`; ties break toward the lower id.
/// `μ` is compared after clamping, so `μ = 0` keeps the channels sitting at
/// the probability floor.
pub fn build_plan(
    spec: PlanSpec,
    c0: &Codebook,
    c1: &Codebook,
    profiles: &[ChannelErrorProfile],
    trained: Option<&[f64]>,
) -> Result<AggregationPlan> {
    c0.config.ensure_same(&c1.config)?;
    let m = c0.len();
    let PlanParams { mu, nu, k } = spec.params;
    for (name, v) in [("mu", mu), ("nu", nu)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Plan(format!("{name} = {v} must lie in [0, 1]")));
        }
    }
    let needs_profiles = spec.strategy == Strategy::S3;
    if needs_profiles && profiles.len() != m {
        return Err(Error::Dimension {
            expected: format!("{m} channel profiles"),
            actual: format!("{}", profiles.len()),
        });
    }
    let informative = |w: usize| c0.entries[w].p != c1.entries[w].p;
    let mut weights = vec![0.0; m];
    let mut ranking: Vec<usize> = (0..m).filter(|&w| informative(w)).collect();
    match spec.strategy {
        Strategy::S1 => {}
        Strategy::S2 => {
            let cap = c0.config.clamp(mu);
            ranking.retain(|&w| c0.entries[w].p <= cap);
            ranking.sort_by(|&a, &b| c0.entries[a].p.total_cmp(&c0.entries[b].p).then(a.cmp(&b)));
        }
        Strategy::S3 => {
            ranking.retain(|&w| profiles[w].p_err <= nu + NU_SLACK);
            ranking.sort_by(|&a, &b| profiles[a].p_err.total_cmp(&profiles[b].p_err).then(a.cmp(&b)));
        }
        Strategy::S4 => {
            let alpha = trained
                .ok_or_else(|| Error::Plan("strategy s4 needs trained classifier weights".into()))?;
            if alpha.len() != m {
                return Err(Error::Dimension {
                    expected: format!("{m} classifier weights"),
                    actual: format!("{}", alpha.len()),
                });
            }
            ranking.retain(|&w| alpha[w] != 0.0);
            ranking.sort_by(|&a, &b| alpha[b].abs().total_cmp(&alpha[a].abs()).then(a.cmp(&b)));
            for &w in &ranking {
                weights[w] = alpha[w];
            }
        }
    }
    if spec.strategy != Strategy::S4 {
        for &w in &ranking {
            weights[w] = 1.0;
        }
    }
    let plan = AggregationPlan {
        spec,
        weights,
        ranking: ranking.into_iter().map(|w| PatternId(w as u32)).collect(),
    };
    Ok(match k {
        Some(k) => plan.top_k(k),
        None => plan,
    })
}

impl AggregationPlan {
    /// Keep the first `k` ranked channels; larger `k` keeps all with a warning.
    pub fn top_k(&self, k: usize) -> Self {
        if k > self.ranking.len() {
            log::warn!(
                "k = {k} exceeds the {} ranked channels of {}; using all",
                self.ranking.len(),
                self.spec.strategy
            );
        }
        let kept = &self.ranking[..k.min(self.ranking.len())];
        let mut weights = vec![0.0; self.weights.len()];
        for id in kept {
            weights[id.index()] = self.weights[id.index()];
        }
        let mut spec = self.spec;
        spec.params.k = Some(k);
        Self {
            spec,
            weights,
            ranking: kept.to_vec(),
        }
    }

    pub fn weight(&self, pattern: PatternId) -> f64 {
        self.weights[pattern.index()]
    }

    /// `Σ α_ω x_ω` over defined inputs.
    pub fn score(&self, inputs: &[Option<f64>]) -> f64 {
        self.ranking
            .iter()
            .filter_map(|id| inputs[id.index()].map(|x| x * self.weights[id.index()]))
            .sum()
    }
}

/// One channel vote; `delta = 1` votes fake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDecision {
    pub pattern: PatternId,
    pub delta: u8,
}

/// Per-channel Hamming-distance voter for one codebook pair and rule.
///
/// Every vote reduces to an integer cut and a direction: with `γ_crit`,
/// `D > γL` is `D > ⌊γL⌋` and `D < γL` is `D < ⌈γL⌉`. Optimal cuts are cached
/// per `(ω, L)`.
#[derive(Debug)]
pub struct Decider<'a> {
    c0: &'a Codebook,
    c1: &'a Codebook,
    rule: DecisionRule,
    gammas: Vec<Option<f64>>,
    cuts: Mutex<HashMap<(usize, u64), u64>>,
}

impl<'a> Decider<'a> {
    pub fn new(c0: &'a Codebook, c1: &'a Codebook, rule: DecisionRule) -> Result<Self> {
        c0.config.ensure_same(&c1.config)?;
        let gammas = c0
            .entries
            .iter()
            .zip(&c1.entries)
            .map(|(a, b)| gamma_crit(a.p, b.p).ok())
            .collect();
        Ok(Self {
            c0,
            c1,
            rule,
            gammas,
            cuts: Mutex::new(HashMap::new()),
        })
    }

    pub fn rule(&self) -> DecisionRule {
        self.rule
    }

    pub fn laws(&self, w: usize) -> (f64, f64) {
        (self.c0.entries[w].p, self.c1.entries[w].p)
    }

    /// Cut and direction for channel `w` seen `l ≥ 1` times; `None` when non-informative.
    pub fn cut(&self, w: usize, l: u64) -> Option<(u64, Direction)> {
        let gamma = self.gammas[w]?;
        let (p, q) = self.laws(w);
        let direction = Direction::for_channel(p, q);
        let cut = match self.rule {
            DecisionRule::GammaCrit => {
                let x = gamma * l as f64;
                match direction {
                    Direction::FakeAbove => x.floor() as u64,
                    Direction::FakeBelow => x.ceil() as u64,
                }
            }
            DecisionRule::GammaOpt => {
                if let Some(&c) = self.cuts.lock().unwrap().get(&(w, l)) {
                    return Some((c, direction));
                }
                let c = optimal_threshold(l, p, q).cut;
                self.cuts.lock().unwrap().insert((w, l), c);
                c
            }
        };
        Some((cut, direction))
    }

    /// `Δ_ω`, or `None` for absent or non-informative channels.
    pub fn vote(&self, w: usize, count: ChannelCount) -> Option<u8> {
        if count.occurrences == 0 {
            return None;
        }
        let (cut, dir) = self.cut(w, count.occurrences)?;
        Some(u8::from(dir.votes_fake(count.flips, cut)))
    }
}

/// Votes of every supported informative channel.
pub fn per_channel_decision(
    obs: &ChannelObservations,
    c0: &Codebook,
    c1: &Codebook,
    rule: DecisionRule,
) -> Result<Vec<ChannelDecision>> {
    obs.config().ensure_same(&c0.config)?;
    let decider = Decider::new(c0, c1, rule)?;
    Ok(decisions_with(obs, &decider))
}

pub fn decisions_with(obs: &ChannelObservations, decider: &Decider<'_>) -> Vec<ChannelDecision> {
    obs.supported()
        .filter_map(|(id, count)| {
            decider
                .vote(id.index(), count)
                .map(|delta| ChannelDecision { pattern: id, delta })
        })
        .collect()
}

/// Input of [`aggregate`]; must match the plan's ordering.
#[derive(Debug, Clone, Copy)]
pub enum AggregateInput<'a> {
    Features(&'a ProbeFeatures),
    Decisions(&'a [ChannelDecision]),
}

/// `S_final = Σ α_ω x_ω`; absent channels contribute nothing.
pub fn aggregate(input: AggregateInput<'_>, plan: &AggregationPlan) -> Result<f64> {
    match (input, plan.spec.order) {
        (AggregateInput::Features(f), Order::AD) => {
            if f.len() != plan.weights.len() {
                return Err(Error::Dimension {
                    expected: format!("{} channels", plan.weights.len()),
                    actual: format!("{} channels", f.len()),
                });
            }
            Ok(plan.score(f.p_hat()))
        }
        (AggregateInput::Decisions(ds), Order::DA) => Ok(ds
            .iter()
            .map(|d| {
                plan.weights
                    .get(d.pattern.index())
                    .map_or(0.0, |a| a * f64::from(d.delta))
            })
            .sum()),
        (AggregateInput::Features(_), Order::DA) => Err(Error::Plan(
            "DA plans aggregate per-channel decisions, got features".into(),
        )),
        (AggregateInput::Decisions(_), Order::AD) => Err(Error::Plan(
            "AD plans aggregate features, got per-channel decisions".into(),
        )),
    }
}

/// Dense per-channel inputs for a plan ordering: flip rates for AD, votes for DA.
pub fn channel_inputs(obs: &ChannelObservations, order: Order, decider: &Decider<'_>) -> Vec<Option<f64>> {
    obs.counts()
        .iter()
        .enumerate()
        .map(|(w, c)| match order {
            Order::AD => c.rate(),
            Order::DA => decider.vote(w, *c).map(f64::from),
        })
        .collect()
}
