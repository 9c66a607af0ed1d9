//! Savitzky-Golay smoothing.
//!
//! Every output sample is the value of the least-squares polynomial of degree
//! `degree` fitted over a window of `2 * half_width + 1` input samples. Interior
//! samples use the centered window; the first and last `half_width` samples reuse
//! the first/last full window and evaluate the fit off-center.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Precomputed Savitzky-Golay convolution weights for every evaluation offset.
#[derive(Debug, Clone)]
pub struct SavgolFilter {
    half_width: usize,
    degree: usize,
    // weights[m] evaluates the window fit at window position m (0..=2M).
    weights: Vec<Vec<f64>>,
}

impl SavgolFilter {
    pub fn new(half_width: usize, degree: usize) -> Result<Self> {
        let width = 2 * half_width + 1;
        if degree >= width {
            return Err(Error::Parameter(format!(
                "polynomial degree {degree} must be below the window width {width}"
            )));
        }
        // Positions are scaled to [-1, 1] for conditioning; the fit is unchanged.
        let scale = half_width.max(1) as f64;
        let positions: Vec<f64> = (0..width)
            .map(|m| (m as f64 - half_width as f64) / scale)
            .collect();
        let vander = DMatrix::from_fn(width, degree + 1, |r, c| positions[r].powi(c as i32));
        let normal = vander.transpose() * &vander;
        let chol = normal
            .cholesky()
            .ok_or_else(|| Error::Internal("singular Savitzky-Golay normal matrix".into()))?;
        // Rows of the hat matrix A (A^T A)^-1 A^T.
        let projector = chol.solve(&vander.transpose());
        let hat = &vander * projector;
        let weights = (0..width)
            .map(|m| hat.row(m).iter().copied().collect())
            .collect();
        Ok(Self {
            half_width,
            degree,
            weights,
        })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn apply(&self, signal: &[f64]) -> Result<Vec<f64>> {
        let width = 2 * self.half_width + 1;
        if signal.len() < width {
            return Err(Error::InputSize(format!(
                "signal of {} samples is shorter than the {width}-sample window",
                signal.len()
            )));
        }
        if let Some(i) = signal.iter().position(|s| !s.is_finite()) {
            return Err(Error::Data(format!("non-finite sample at index {i}")));
        }
        let m = self.half_width;
        let n = signal.len();
        let dot = |w: &[f64], start: usize| -> f64 {
            w.iter()
                .zip(&signal[start..start + width])
                .map(|(a, b)| a * b)
                .sum()
        };
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let value = if i < m {
                dot(&self.weights[i], 0)
            } else if i + m >= n {
                dot(&self.weights[i + width - n], n - width)
            } else {
                dot(&self.weights[m], i - m)
            };
            out.push(value);
        }
        Ok(out)
    }
}

/// One-shot filter; defaults used by the pipeline are `half_width = 11`, `degree = 3`.
pub fn savgol_filter(signal: &[f64], half_width: usize, degree: usize) -> Result<Vec<f64>> {
    SavgolFilter::new(half_width, degree)?.apply(signal)
}
