//! Local distortion measures and the two-band global distortion features.

mod measures;

pub use measures::{local_distortion, DistortionMeasure};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::flatten::{
    local_jacobian, minimize_distortion, tutte_embed, PlanarEmbedding, SolverConfig,
};
use crate::mesh::{sample_surface, triangulate, TriangleMesh};
use crate::signal::{
    compute_spectrogram, savgol_filter, AudioRecording, SpectrogramConfig, SpectrogramSurface,
};

/// Triangle indices at or below the median centroid frequency, and above it.
pub fn frequency_median_split(mesh: &TriangleMesh) -> (Vec<usize>, Vec<usize>) {
    median_split(&mesh.triangle_frequencies())
}

/// Splits indices of `values` into `<= median` and `> median`. An even count
/// uses the mean of the two middle values.
pub fn median_split(values: &[f64]) -> (Vec<usize>, Vec<usize>) {
    if values.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    (0..n).partition(|&i| values[i] <= median)
}

/// Area-weighted mean of `measure` over the triangles in `subset`, using
/// source (3D) triangle areas.
pub fn global_distortion(
    mesh: &TriangleMesh,
    embedding: &PlanarEmbedding,
    measure: DistortionMeasure,
    subset: &[usize],
) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::Parameter("empty triangle subset".into()));
    }
    let mut weighted = 0.0;
    let mut area = 0.0;
    for &t in subset {
        let j = local_jacobian(mesh, embedding, t)?;
        if !(j.det > 0.0) {
            return Err(Error::Domain(format!(
                "triangle {t} is folded (det {:e})",
                j.det
            )));
        }
        let a = mesh.triangle_area(t)?;
        weighted += a * local_distortion(measure, j.sigma1, j.sigma2)?;
        area += a;
    }
    if !(area > 0.0) {
        return Err(Error::Geometry("triangle subset has zero area".into()));
    }
    Ok(weighted / area)
}

/// Feature names in output order: each measure's `_low` then `_high` band.
pub fn distortion_feature_names() -> Vec<String> {
    DistortionMeasure::ALL
        .iter()
        .flat_map(|m| [format!("{m}_low"), format!("{m}_high")])
        .collect()
}

/// The 16 band features of an embedding of `mesh`.
pub fn distortion_features(
    mesh: &TriangleMesh,
    embedding: &PlanarEmbedding,
) -> Result<FeatureVector> {
    let (low, high) = frequency_median_split(mesh);
    let mut values = Vec::with_capacity(16);
    for m in DistortionMeasure::ALL {
        values.push(global_distortion(mesh, embedding, m, &low)?);
        values.push(global_distortion(mesh, embedding, m, &high)?);
    }
    FeatureVector::new(distortion_feature_names(), values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionConfig {
    pub savgol_half_width: usize,
    pub savgol_degree: usize,
    pub spectrogram: SpectrogramConfig,
    /// Vertices per side of the sampling grid.
    pub grid_n: usize,
    pub solver: SolverConfig,
}

impl Default for DistortionConfig {
    fn default() -> Self {
        Self {
            savgol_half_width: 11,
            savgol_degree: 3,
            spectrogram: SpectrogramConfig::default(),
            grid_n: 150,
            solver: SolverConfig::default(),
        }
    }
}

/// Mesh of a spectrogram surface together with its optimized planar map.
#[derive(Debug, Clone)]
pub struct FlattenedSurface {
    pub mesh: TriangleMesh,
    pub embedding: PlanarEmbedding,
}

pub fn flatten_surface(
    surface: &SpectrogramSurface,
    config: &DistortionConfig,
) -> Result<FlattenedSurface> {
    let mesh = triangulate(&sample_surface(surface, config.grid_n)?)?;
    let init = tutte_embed(&mesh)?;
    let embedding = minimize_distortion(&mesh, &init, &config.solver)?.embedding;
    Ok(FlattenedSurface { mesh, embedding })
}

pub fn surface_distortion_features(
    surface: &SpectrogramSurface,
    config: &DistortionConfig,
) -> Result<FeatureVector> {
    let flat = flatten_surface(surface, config)?;
    distortion_features(&flat.mesh, &flat.embedding)
}

/// Denoise, build the spectrogram surface, flatten it and measure it.
pub fn extract_distortion_features(
    recording: &AudioRecording,
    config: &DistortionConfig,
) -> Result<FeatureVector> {
    let smoothed = savgol_filter(
        recording.samples(),
        config.savgol_half_width,
        config.savgol_degree,
    )?;
    let surface = compute_spectrogram(&recording.with_samples(smoothed)?, &config.spectrogram)?;
    surface_distortion_features(&surface, config)
}
