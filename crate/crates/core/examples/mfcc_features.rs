//! MFCC statistics of a WAV file, or of a synthetic tone when no path is given.

use lung_distortion::signal::{
    compute_mfcc, mfcc_statistics, read_wav, AudioRecording, MfccConfig,
};

fn main() -> lung_distortion::Result<()> {
    let (samples, rate) = match std::env::args().nth(1) {
        Some(p) => read_wav(std::path::Path::new(&p))?,
        None => (
            (0..8000).map(|i| (i as f64 * 0.35).sin() * 0.5).collect(),
            4000,
        ),
    };
    let rec = AudioRecording::unlabeled(samples, rate)?;
    let frames = compute_mfcc(&rec, &MfccConfig::default())?;
    let stats = mfcc_statistics(&frames)?;
    println!("{} frames", frames.len());
    for (name, v) in stats.names().iter().zip(stats.values()).take(12) {
        println!("{name:<20} {v:>10.4}");
    }
    println!("... {} values in total", stats.len());
    Ok(())
}
