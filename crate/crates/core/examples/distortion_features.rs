//! The 16 distortion features of a WAV file, or of a synthetic recording.
//!
//! cargo run --release --example distortion_features -- [file.wav] [grid_n]

use lung_distortion::distortion::{extract_distortion_features, DistortionConfig};
use lung_distortion::pipeline::{synthetic_samples, SynthSpec};
use lung_distortion::signal::{read_wav, AudioRecording};
use rand::SeedableRng;

fn main() -> lung_distortion::Result<()> {
    let mut args = std::env::args().skip(1);
    let (samples, rate) = match args.next() {
        Some(p) => read_wav(std::path::Path::new(&p))?,
        None => {
            let spec = SynthSpec::default();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
            (synthetic_samples(1, &spec, &mut rng), spec.sample_rate)
        }
    };
    let config = DistortionConfig {
        grid_n: args.next().and_then(|a| a.parse().ok()).unwrap_or(48),
        ..DistortionConfig::default()
    };
    let features =
        extract_distortion_features(&AudioRecording::unlabeled(samples, rate)?, &config)?;
    for (name, v) in features.names().iter().zip(features.values()) {
        println!("{name:<15} {v:.6}");
    }
    Ok(())
}
