//! The full workflow on disk: simulate a dataset, estimate codebooks from the
//! train split, evaluate every strategy, then authenticate single prints.

use cdp_bpc::aggregation::{Order, PlanSpec, Strategy};
use cdp_bpc::pipeline::dataset::{probe_path, template_path};
use cdp_bpc::pipeline::{
    cmd_authenticate, cmd_estimate, cmd_evaluate, cmd_simulate, split, AuthenticateConfig, EvaluateConfig,
    ExperimentConfig, Preset, SimulateConfig, SplitConfig,
};
use cdp_bpc::ModelConfig;

fn main() -> cdp_bpc::Result<()> {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();
    let ds = root.join("dataset");
    cmd_simulate(&SimulateConfig {
        out: ds.clone(),
        seed: 7,
        n_templates: 200,
        shots: 3,
        width: 64,
        height: 64,
        config: ModelConfig::default(),
        preset: Preset::Mixed,
    })?;

    let split_cfg = SplitConfig { dataset: ds.clone(), seed: 7, train_fraction: 0.5 };
    let (c0, c1) = (root.join("c0.json"), root.join("c1.json"));
    cmd_estimate(&split_cfg, &c0, &c1)?;

    let out = cmd_evaluate(&EvaluateConfig {
        split: split_cfg,
        codebook_orig: c0.clone(),
        codebook_fake: c1.clone(),
        experiment: ExperimentConfig::default(),
        fig2_probes: 200,
        out: root.join("reports"),
    })?;
    for c in out.cells() {
        println!("{:>2} {} {:<6} k={:<4} P_err={:.4}", c.strategy, c.ordering, c.shot_mode, c.best_k, c.p_err);
    }

    let (_, test) = split(7, 200, 0.5)?;
    let i = test[0];
    for fake in [false, true] {
        let report = cmd_authenticate(&AuthenticateConfig {
            template: template_path(&ds, i),
            probes: (0..3).map(|s| probe_path(&ds, i, fake, s)).collect(),
            reference: None,
            codebook_orig: c0.clone(),
            codebook_fake: c1.clone(),
            plan: PlanSpec::new(Strategy::S2, Order::AD),
            classifier: None,
        })?;
        println!("\n{} captures of template {i}:\n{report}", if fake { "fake" } else { "original" });
    }
    Ok(())
}
