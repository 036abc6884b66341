//! Single-shot versus fused multi-shot error for every strategy and ordering.

use cdp_bpc::aggregation::{Order, Strategy};
use cdp_bpc::pipeline::{cell, run_table, split, ExperimentConfig, ShotMode};
use cdp_bpc::sim::{make_dataset, mixed_codebooks, MixedParams, SimSpec};
use cdp_bpc::ModelConfig;

fn main() -> cdp_bpc::Result<()> {
    let cfg = ModelConfig::default();
    let (c0, c1) = mixed_codebooks(cfg, MixedParams::default(), 9)?;
    let spec = |cb, seed| SimSpec { width: 64, height: 64, codebook: cb, seed, shots: 6 };
    let ds = make_dataset(&spec(c0.clone(), 90), &spec(c1.clone(), 91), 300)?;
    let (train, test) = split(9, 300, 0.5)?;
    let rows = run_table(
        &c0,
        &c1,
        &ds.observations_for(&train),
        &ds.observations_for(&test),
        &ExperimentConfig::default(),
    )?;

    println!("{:>8} {:>3} {:>10} {:>10}", "strategy", "ord", "1 shot", "6 shots");
    for s in Strategy::ALL {
        for o in Order::ALL {
            let err = |m| cell(&rows, *s, *o, m).map(|r| r.best.eval.p_err).unwrap_or(f64::NAN);
            println!("{s:>8} {o:>3} {:>10.4} {:>10.4}", err(ShotMode::Single), err(ShotMode::Multi));
        }
    }
    Ok(())
}
