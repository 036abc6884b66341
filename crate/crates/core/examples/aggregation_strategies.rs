//! Compare the four channel-selection strategies under both orderings on a
//! simulated train/test split, sweeping the number of kept channels.

use cdp_bpc::aggregation::{
    best_k, best_k_sweep, build_plan, channel_inputs, train_linear_classifier, Decider, DecisionRule, Order,
    PlanSpec, Strategy, SvmConfig,
};
use cdp_bpc::pipeline::experiment::mean_occurrences;
use cdp_bpc::sim::{make_dataset, mixed_codebooks, MixedParams, SimSpec};
use cdp_bpc::stats::channel_profiles;
use cdp_bpc::{ModelConfig, ProbeFeatures};

fn main() -> cdp_bpc::Result<()> {
    let cfg = ModelConfig::default();
    let (c0, c1) = mixed_codebooks(cfg, MixedParams::default(), 5)?;
    let spec = |cb, seed| SimSpec { width: 64, height: 64, codebook: cb, seed, shots: 1 };
    let ds = make_dataset(&spec(c0.clone(), 50), &spec(c1.clone(), 51), 400)?;
    let train: Vec<usize> = (0..200).collect();
    let test: Vec<usize> = (200..400).collect();
    let train = ds.observations_for(&train);
    let test = ds.observations_for(&test);

    let single = |set: &[cdp_bpc::sim::TripleObservations], fake: bool| {
        set.iter()
            .map(|t| if fake { t.fakes[0].clone() } else { t.originals[0].clone() })
            .collect::<Vec<_>>()
    };
    let support = mean_occurrences(&single(&train, false));
    let profiles = channel_profiles(&c0, &c1, &support)?;
    let feats = |set, fake| single(set, fake).iter().map(ProbeFeatures::from_observations).collect::<Vec<_>>();
    let clf = train_linear_classifier(&feats(&train, false), &feats(&train, true), &SvmConfig::default())?;
    let alpha = clf.coefficients();

    let decider = Decider::new(&c0, &c1, DecisionRule::GammaCrit)?;
    let (orig, fake) = (single(&test, false), single(&test, true));
    println!("{:>8} {:>3} {:>6} {:>8}", "strategy", "ord", "best k", "P_err");
    for strategy in Strategy::ALL {
        for order in Order::ALL {
            let plan = build_plan(PlanSpec::new(*strategy, *order), &c0, &c1, &profiles, Some(&alpha))?;
            let inputs = |v: &[cdp_bpc::ChannelObservations]| {
                v.iter().map(|o| channel_inputs(o, *order, &decider)).collect::<Vec<_>>()
            };
            let ks: Vec<usize> = (1..=plan.ranking.len()).collect();
            let curve = best_k_sweep(&plan, &inputs(&orig), &inputs(&fake), &ks)?;
            let best = best_k(&curve).expect("non-empty ranking");
            println!("{:>8} {:>3} {:>6} {:>8.4}", strategy, order, best.k, best.eval.p_err);
        }
    }
    Ok(())
}
