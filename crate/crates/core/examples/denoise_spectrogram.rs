//! Smooths a noisy chirp and prints a coarse view of its spectrogram surface.

use lung_distortion::signal::{
    compute_spectrogram, savgol_filter, AudioRecording, SpectrogramConfig,
};
use rand::{Rng, SeedableRng};

fn main() -> lung_distortion::Result<()> {
    let rate = 4000;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let noisy: Vec<f64> = (0..rate)
        .map(|i| {
            let t = i as f64 / f64::from(rate);
            (std::f64::consts::TAU * (200.0 + 600.0 * t) * t).sin() + 0.3 * rng.gen_range(-1.0..1.0)
        })
        .collect();
    let smooth = savgol_filter(&noisy, 11, 3)?;
    let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    let diff: Vec<f64> = noisy.iter().zip(&smooth).map(|(a, b)| a - b).collect();
    println!("removed rms {:.3} of {:.3}", rms(&diff), rms(&noisy));

    let rec = AudioRecording::unlabeled(smooth, rate)?;
    let s = compute_spectrogram(&rec, &SpectrogramConfig::default())?;
    println!("{} frames x {} bins", s.n_frames(), s.n_bins());
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for b in (0..s.n_bins()).rev().step_by(s.n_bins().div_ceil(16)) {
        let row: String = (0..s.n_frames())
            .step_by(s.n_frames().div_ceil(60))
            .map(|f| shades[((s.power()[f][b] * 9.0).round() as usize).min(9)])
            .collect();
        println!("{row}");
    }
    Ok(())
}
