//! Turn a gray capture into a binary probe: histogram matching against a
//! reference followed by Otsu binarization.

use cdp_bpc::imaging::{histogram_match, ingest_triple, otsu_binarize, PreprocessSpec};
use cdp_bpc::pnm::{write_pbm, write_pgm};
use cdp_bpc::sim::gen_template;
use cdp_bpc::GrayImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cdp_bpc::Result<()> {
    let template = gen_template(32, 32, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // a washed-out, noisy capture: black dots near 0.45, white near 0.75
    let capture: Vec<f64> = template
        .bits
        .iter()
        .map(|&b| {
            let base = if b == 1 { 0.45 } else { 0.75 };
            (base + rng.random_range(-0.1..0.1f64)).clamp(0.0, 1.0)
        })
        .collect();
    let capture = GrayImage::new(32, 32, capture)?;
    let reference = template.to_gray();

    let matched = histogram_match(&capture, &reference)?;
    let (probe, threshold) = otsu_binarize(&matched)?;
    let errors = probe.bits.iter().zip(&template.bits).filter(|(a, b)| a != b).count();
    println!("Otsu threshold {threshold:.3}; {errors} of {} pixels differ from the template", probe.bits.len());

    // the same path through files, as the command line uses it
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir = tmp.path();
    write_pbm(&dir.join("template.pbm"), &template)?;
    write_pgm(&dir.join("capture.pgm"), &capture)?;
    write_pgm(&dir.join("reference.pgm"), &reference)?;
    let spec = PreprocessSpec::load(&dir.join("reference.pgm"))?;
    let (_, from_files) = ingest_triple(&dir.join("template.pbm"), &dir.join("capture.pgm"), Some(&spec))?;
    println!("file round trip gives the same probe: {}", from_files == probe);
    Ok(())
}
