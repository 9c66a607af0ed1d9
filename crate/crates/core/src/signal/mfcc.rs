//! MFCC baseline: 12 cepstral coefficients per frame and their 6 summary statistics.

use std::f64::consts::PI;

use super::spectrogram::{stft_power, window_coefficients, WindowKind, LOG_EPS};
use super::AudioRecording;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub const MFCC_COEFFS: usize = 12;

const STAT_NAMES: [&str; 6] = ["mean", "std", "min", "max", "absdiff_mean", "absdiff_std"];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MfccConfig {
    pub n_mels: usize,
    pub window_len: usize,
    pub hop: usize,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            n_mels: 26,
            window_len: 256,
            hop: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfccFrames {
    frames: Vec<[f64; MFCC_COEFFS]>,
}

impl MfccFrames {
    pub fn new(frames: Vec<[f64; MFCC_COEFFS]>) -> Result<Self> {
        if frames.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Data("non-finite cepstral coefficient".into()));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[[f64; MFCC_COEFFS]] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular HTK-mel filters over `0..=sample_rate/2`, one row per filter,
/// one column per one-sided FFT bin. Weights are evaluated at each bin's exact
/// frequency, so narrow low-frequency filters never collapse to zero width.
pub fn mel_filterbank(n_mels: usize, window_len: usize, sample_rate: u32) -> Vec<Vec<f64>> {
    let n_bins = window_len / 2 + 1;
    let nyquist = sample_rate as f64 / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = sample_rate as f64 / window_len as f64;
    (0..n_mels)
        .map(|m| {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..n_bins)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= center {
                        (f - lo) / (center - lo)
                    } else {
                        (hi - f) / (hi - center)
                    }
                })
                .collect()
        })
        .collect()
}

/// Hann-windowed periodogram -> mel energies -> natural log -> orthonormal
/// DCT-II, keeping coefficients 1..=12 (the energy term 0 is dropped).
pub fn compute_mfcc(recording: &AudioRecording, config: &MfccConfig) -> Result<MfccFrames> {
    if config.n_mels < MFCC_COEFFS + 1 {
        return Err(Error::Parameter(format!(
            "need at least {} mel bands, got {}",
            MFCC_COEFFS + 1,
            config.n_mels
        )));
    }
    let window = window_coefficients(WindowKind::Hann, config.window_len);
    let power = stft_power(recording.samples(), &window, config.hop)?;
    let bank = mel_filterbank(config.n_mels, config.window_len, recording.sample_rate());
    let n_mels = config.n_mels;
    let norm = (2.0 / n_mels as f64).sqrt();
    let cosines: Vec<Vec<f64>> = (1..=MFCC_COEFFS)
        .map(|q| {
            (0..n_mels)
                .map(|m| (PI * q as f64 * (2 * m + 1) as f64 / (2 * n_mels) as f64).cos() * norm)
                .collect()
        })
        .collect();
    let scale = 1.0 / config.window_len as f64;
    let frames = power
        .iter()
        .map(|spec| {
            let log_energy: Vec<f64> = bank
                .iter()
                .map(|filter| {
                    let e: f64 = filter.iter().zip(spec).map(|(w, p)| w * p * scale).sum();
                    (e + LOG_EPS).ln()
                })
                .collect();
            let mut coeffs = [0.0; MFCC_COEFFS];
            for (c, row) in coeffs.iter_mut().zip(&cosines) {
                *c = row.iter().zip(&log_energy).map(|(a, b)| a * b).sum();
            }
            coeffs
        })
        .collect();
    MfccFrames::new(frames)
}

/// Feature names in output order: coefficient-major, statistic-minor.
pub fn mfcc_feature_names() -> Vec<String> {
    (1..=MFCC_COEFFS)
        .flat_map(|c| STAT_NAMES.iter().map(move |s| format!("mfcc{c:02}_{s}")))
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Six statistics per coefficient track; population standard deviations.
pub fn mfcc_statistics(frames: &MfccFrames) -> Result<FeatureVector> {
    if frames.len() < 2 {
        return Err(Error::InputSize(format!(
            "need at least 2 MFCC frames for difference statistics, got {}",
            frames.len()
        )));
    }
    let mut values = Vec::with_capacity(MFCC_COEFFS * STAT_NAMES.len());
    for c in 0..MFCC_COEFFS {
        let track: Vec<f64> = frames.frames().iter().map(|f| f[c]).collect();
        let diffs: Vec<f64> = track.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let (mean, std) = mean_std(&track);
        let (dmean, dstd) = mean_std(&diffs);
        let min = track.iter().copied().fold(f64::INFINITY, f64::min);
        let max = track.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        values.extend_from_slice(&[mean, std, min, max, dmean, dstd]);
    }
    FeatureVector::new(mfcc_feature_names(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames_from_track(track: &[f64]) -> MfccFrames {
        MfccFrames::new(track.iter().map(|&v| [v; MFCC_COEFFS]).collect()).unwrap()
    }

    #[test]
    fn constant_track_statistics() {
        let fv = mfcc_statistics(&frames_from_track(&[0.7; 5])).unwrap();
        assert_eq!(fv.len(), 72);
        assert_eq!(&fv.values()[..6], &[0.7, 0.0, 0.7, 0.7, 0.0, 0.0]);
    }

    #[test]
    fn two_point_track() {
        let fv = mfcc_statistics(&frames_from_track(&[1.0, 3.0])).unwrap();
        assert_eq!(&fv.values()[..6], &[2.0, 1.0, 1.0, 3.0, 2.0, 0.0]);
        assert_eq!(fv.names()[0], "mfcc01_mean");
        assert_eq!(fv.names()[71], "mfcc12_absdiff_std");
    }

    #[test]
    fn single_frame_rejected() {
        assert!(matches!(
            mfcc_statistics(&frames_from_track(&[1.0])),
            Err(Error::InputSize(_))
        ));
    }

    #[test]
    fn too_few_mels_rejected() {
        let rec = AudioRecording::unlabeled(vec![0.0; 1024], 4000).unwrap();
        let cfg = MfccConfig {
            n_mels: 12,
            ..MfccConfig::default()
        };
        assert!(matches!(compute_mfcc(&rec, &cfg), Err(Error::Parameter(_))));
    }

    #[test]
    fn silent_frames_are_identical() {
        let rec = AudioRecording::unlabeled(vec![0.0; 4096], 4000).unwrap();
        let frames = compute_mfcc(&rec, &MfccConfig::default()).unwrap();
        assert!(frames.len() > 2);
        assert!(frames.frames().iter().all(|f| f == &frames.frames()[0]));
    }

    #[test]
    fn filters_have_unit_peak_region() {
        let bank = mel_filterbank(26, 256, 4000);
        assert_eq!(bank.len(), 26);
        assert!(bank.iter().all(|f| f.iter().any(|&w| w > 0.0)));
        assert!(bank.iter().flatten().all(|&w| (0.0..=1.0).contains(&w)));
    }
}
