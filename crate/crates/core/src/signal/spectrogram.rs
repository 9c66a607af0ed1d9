use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::AudioRecording;
use crate::error::{Error, Result};

/// Floor added to power before taking logarithms.
pub(crate) const LOG_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
    Rectangular,
}

/// How the z coordinate of the surface is derived from spectral power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerScale {
    /// dB clamped to `[db_floor, 0]`, mapped affinely onto `[0, 1]`.
    Decibel,
    /// Normalized power divided by the recording's peak power.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramConfig {
    pub window_len: usize,
    pub hop: usize,
    pub db_floor: f64,
    pub window: WindowKind,
    pub scale: PowerScale,
}

impl Default for SpectrogramConfig {
    fn default() -> Self {
        Self {
            window_len: 256,
            hop: 128,
            db_floor: -80.0,
            window: WindowKind::Hann,
            scale: PowerScale::Decibel,
        }
    }
}

/// Periodic window of length `len`.
pub fn window_coefficients(kind: WindowKind, len: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rectangular => vec![1.0; len],
        WindowKind::Hann => (0..len)
            .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
            .collect(),
    }
}

/// One-sided STFT power `|X_k|^2` (unnormalized) for every hop-advanced frame.
///
/// Returns `frames x (window.len() / 2 + 1)`.
pub fn stft_power(samples: &[f64], window: &[f64], hop: usize) -> Result<Vec<Vec<f64>>> {
    let len = window.len();
    if len == 0 {
        return Err(Error::Parameter("window length must be positive".into()));
    }
    if hop == 0 {
        return Err(Error::Parameter("hop must be at least 1".into()));
    }
    if samples.len() < len {
        return Err(Error::InputSize(format!(
            "signal of {} samples is shorter than one {len}-sample window",
            samples.len()
        )));
    }
    let n_frames = 1 + (samples.len() - len) / hop;
    let n_bins = len / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    let mut frames = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * hop;
        for (b, (s, w)) in buf
            .iter_mut()
            .zip(samples[start..start + len].iter().zip(window))
        {
            *b = Complex::new(s * w, 0.0);
        }
        fft.process(&mut buf);
        frames.push(buf[..n_bins].iter().map(|c| c.norm_sqr()).collect());
    }
    Ok(frames)
}

/// Discrete spectrogram surface `z(x, y)` on normalized time/frequency axes.
///
/// `power[t][f]` holds the z value of time frame `t` and frequency bin `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrogramSurface {
    time_axis: Vec<f64>,
    freq_axis: Vec<f64>,
    power: Vec<Vec<f64>>,
}

impl SpectrogramSurface {
    pub fn new(time_axis: Vec<f64>, freq_axis: Vec<f64>, power: Vec<Vec<f64>>) -> Result<Self> {
        if time_axis.len() < 2 || freq_axis.len() < 2 {
            return Err(Error::InputSize(format!(
                "surface grid must be at least 2x2, got {}x{}",
                time_axis.len(),
                freq_axis.len()
            )));
        }
        for (name, axis) in [("time", &time_axis), ("frequency", &freq_axis)] {
            if axis.windows(2).any(|w| !(w[1] > w[0]))
                || axis.iter().any(|v| !(0.0..=1.0).contains(v))
            {
                return Err(Error::Data(format!(
                    "{name} axis must be strictly increasing inside [0, 1]"
                )));
            }
        }
        if power.len() != time_axis.len() || power.iter().any(|row| row.len() != freq_axis.len()) {
            return Err(Error::Data("power grid does not match the axes".into()));
        }
        if power.iter().flatten().any(|z| !(0.0..=1.0).contains(z)) {
            return Err(Error::Data("power values must lie in [0, 1]".into()));
        }
        Ok(Self {
            time_axis,
            freq_axis,
            power,
        })
    }

    /// Surface over uniformly spaced axes spanning `[0, 1]`.
    pub fn from_grid(power: Vec<Vec<f64>>) -> Result<Self> {
        let nt = power.len();
        let nf = power.first().map_or(0, Vec::len);
        let axis =
            |n: usize| -> Vec<f64> { (0..n).map(|i| i as f64 / (n.max(2) - 1) as f64).collect() };
        Self::new(axis(nt), axis(nf), power)
    }

    pub fn time_axis(&self) -> &[f64] {
        &self.time_axis
    }

    pub fn freq_axis(&self) -> &[f64] {
        &self.freq_axis
    }

    pub fn power(&self) -> &[Vec<f64>] {
        &self.power
    }

    pub fn n_frames(&self) -> usize {
        self.time_axis.len()
    }

    pub fn n_bins(&self) -> usize {
        self.freq_axis.len()
    }
}

pub fn compute_spectrogram(
    recording: &AudioRecording,
    config: &SpectrogramConfig,
) -> Result<SpectrogramSurface> {
    if !(config.db_floor < 0.0) {
        return Err(Error::Parameter(format!(
            "dB floor must be negative, got {}",
            config.db_floor
        )));
    }
    let window = window_coefficients(config.window, config.window_len);
    let frames = stft_power(recording.samples(), &window, config.hop)?;
    if frames.len() < 2 {
        return Err(Error::InputSize(
            "recording yields a single STFT frame; at least two are needed".into(),
        ));
    }
    // Full-scale sinusoid peaks at -6 dB after this normalization.
    let gain: f64 = window.iter().sum::<f64>().powi(2);
    let power: Vec<Vec<f64>> = match config.scale {
        PowerScale::Decibel => {
            let floor = config.db_floor;
            frames
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|p| {
                            let db = 10.0 * (p / gain + LOG_EPS).log10();
                            (db.clamp(floor, 0.0) - floor) / -floor
                        })
                        .collect()
                })
                .collect()
        }
        PowerScale::Linear => {
            let peak = frames.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
            frames
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|p| {
                            if peak > 0.0 {
                                (p / peak).clamp(0.0, 1.0)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect()
        }
    };
    SpectrogramSurface::from_grid(power)
}
