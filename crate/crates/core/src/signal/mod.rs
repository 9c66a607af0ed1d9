//! Audio-domain processing: denoising, spectrogram surfaces and the MFCC baseline.

mod mfcc;
mod savgol;
mod spectrogram;
pub mod wav;

pub use mfcc::{
    compute_mfcc, mel_filterbank, mfcc_feature_names, mfcc_statistics, MfccConfig, MfccFrames,
    MFCC_COEFFS,
};
pub use savgol::{savgol_filter, SavgolFilter};
pub use spectrogram::{
    compute_spectrogram, stft_power, window_coefficients, PowerScale, SpectrogramConfig,
    SpectrogramSurface, WindowKind,
};
pub use wav::{read_wav, write_wav_pcm16};

use crate::error::{Error, Result};

/// A mono recording with its patient and diagnosis metadata.
#[derive(Debug, Clone)]
pub struct AudioRecording {
    samples: Vec<f64>,
    sample_rate: u32,
    patient_id: String,
    label: String,
}

impl AudioRecording {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: u32,
        patient_id: impl Into<String>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InputSize("recording has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Parameter("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Data(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
            patient_id: patient_id.into(),
            label: label.into(),
        })
    }

    /// Convenience constructor for signals without metadata.
    pub fn unlabeled(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(samples, sample_rate, "", "")
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn patient_id(&self) -> &str {
        &self.patient_id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Same metadata, different samples (used after denoising).
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(
            samples,
            self.sample_rate,
            self.patient_id.clone(),
            self.label.clone(),
        )
    }
}
