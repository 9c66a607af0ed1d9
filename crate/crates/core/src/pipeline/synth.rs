use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::signal::write_wav_pcm16;

/// Shape of a generated corpus of labeled tone mixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// One label per class; class `c` uses `PEAKS[c % PEAKS.len()]`.
    pub labels: Vec<String>,
    pub recordings_per_class: usize,
    pub recordings_per_patient: usize,
    pub sample_rate: u32,
    pub duration_secs: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            labels: vec!["Healthy".into(), "COPD".into(), "URTI".into()],
            recordings_per_class: 20,
            recordings_per_patient: 2,
            sample_rate: 4000,
            duration_secs: 1.0,
            noise: 0.05,
            seed: 0,
        }
    }
}

/// Peak frequencies in Hz of each class's partials.
const PEAKS: [&[f64]; 4] = [
    &[250.0, 700.0],
    &[500.0, 1300.0],
    &[900.0, 1700.0],
    &[350.0, 1100.0, 1500.0],
];

/// One recording of class `class`: jittered partials under a slow breathing
/// envelope, plus uniform noise.
pub fn synthetic_samples(class: usize, spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = (spec.duration_secs * f64::from(spec.sample_rate)).round() as usize;
    let partials: Vec<(f64, f64, f64)> = PEAKS[class % PEAKS.len()]
        .iter()
        .map(|&f| {
            (
                f * rng.gen_range(0.97..1.03),
                rng.gen_range(0.25..0.45),
                rng.gen_range(0.0..TAU),
            )
        })
        .collect();
    let breath = rng.gen_range(0.8..1.6);
    let phase = rng.gen_range(0.0..TAU);
    (0..n)
        .map(|i| {
            let t = i as f64 / f64::from(spec.sample_rate);
            let envelope = 0.6 + 0.4 * (TAU * breath * t + phase).sin();
            let tone: f64 = partials
                .iter()
                .map(|&(f, a, p)| a * (TAU * f * t + p).sin())
                .sum();
            (envelope * tone + spec.noise * rng.gen_range(-1.0..1.0)).clamp(-1.0, 1.0)
        })
        .collect()
}

/// Writes the corpus WAVs and `manifest.csv` under `dir`; returns the
/// manifest path.
pub fn write_synthetic_corpus(dir: &Path, spec: &SynthSpec) -> Result<PathBuf> {
    std::fs::create_dir_all(dir.join("wav"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let manifest = dir.join("manifest.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&manifest)?);
    writeln!(out, "wav_path,patient_id,label")?;
    for (c, label) in spec.labels.iter().enumerate() {
        for i in 0..spec.recordings_per_class {
            let samples = synthetic_samples(c, spec, &mut rng);
            let name = format!("wav/{label}_{i:03}.wav");
            write_wav_pcm16(&dir.join(&name), &samples, spec.sample_rate)?;
            let patient = format!("{label}-p{:02}", i / spec.recordings_per_patient.max(1));
            writeln!(out, "{name},{patient},{label}")?;
        }
    }
    out.flush()?;
    Ok(manifest)
}
