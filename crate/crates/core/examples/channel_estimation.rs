//! Estimate a codebook from simulated (template, probe) pairs and compare it
//! with the codebook that generated the probes.

use cdp_bpc::channel::{estimate_codebook, extract_channels};
use cdp_bpc::sim::{default_codebooks, make_dataset, SimSpec};
use cdp_bpc::ModelConfig;

fn main() -> cdp_bpc::Result<()> {
    let cfg = ModelConfig::default();
    let (truth, fake) = default_codebooks(cfg, 1)?;
    let spec = |cb, seed| SimSpec { width: 64, height: 64, codebook: cb, seed, shots: 1 };
    let ds = make_dataset(&spec(truth.clone(), 10), &spec(fake, 11), 200)?;

    let pairs: Vec<_> = (0..200)
        .map(|i| {
            let t = ds.triple(i);
            (t.template, t.originals[0].clone())
        })
        .collect();

    let one = extract_channels(&pairs[0].0, &pairs[0].1, &cfg)?;
    println!(
        "first pair: {} interior pixels, {} flips, {} distinct patterns",
        one.total_occurrences(),
        one.total_flips(),
        one.supported().count()
    );

    let est = estimate_codebook(&pairs, &cfg)?;
    println!("{:>7} {:>10} {:>10} {:>6}", "pattern", "true P_b", "estimate", "L");
    for w in [0usize, 7, 56, 170, 341, 511] {
        let (t, e) = (&truth.entries[w], &est.entries[w]);
        println!("{w:>7} {:>10.5} {:>10.5} {:>6}", t.p, e.p, e.occurrences);
    }
    let worst = est
        .entries
        .iter()
        .zip(&truth.entries)
        .filter(|(e, _)| e.occurrences >= 100)
        .map(|(e, t)| (e.p - t.p).abs() / (t.p * (1.0 - t.p) / e.occurrences as f64).sqrt())
        .fold(0.0, f64::max);
    println!("largest deviation among channels seen 100+ times: {worst:.2} standard errors");
    Ok(())
}
