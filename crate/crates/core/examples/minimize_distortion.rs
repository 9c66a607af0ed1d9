//! Runs the injective distortion minimizer from a Tutte start on a bumpy
//! surface and writes the energy trace.
//!
//! cargo run --release --example minimize_distortion -- [trace.csv]

use lung_distortion::distortion::DistortionMeasure;
use lung_distortion::flatten::{minimize_distortion, tutte_embed, BlockStrategy, SolverConfig};
use lung_distortion::mesh::{sample_surface, triangulate};
use lung_distortion::signal::SpectrogramSurface;

fn main() -> lung_distortion::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "trace.csv".into());
    let power: Vec<Vec<f64>> = (0..40)
        .map(|i| {
            (0..40)
                .map(|j| {
                    let (x, y) = (i as f64 / 39.0 - 0.5, j as f64 / 39.0 - 0.5);
                    (-(x * x + y * y) / 0.02).exp()
                })
                .collect()
        })
        .collect();
    let mesh = triangulate(&sample_surface(&SpectrogramSurface::from_grid(power)?, 32)?)?;
    let start = tutte_embed(&mesh)?;
    for strategy in [BlockStrategy::Global, BlockStrategy::SingleVertex] {
        let config = SolverConfig {
            energy: DistortionMeasure::SymmetricDirichlet,
            strategy,
            ..SolverConfig::default()
        };
        let run = minimize_distortion(&mesh, &start, &config)?;
        println!(
            "{strategy:?}: {:.6} -> {:.6} in {} iterations, min det {:.3e}",
            run.initial_energy(),
            run.final_energy(),
            run.trace.len() - 1,
            run.embedding.min_det(&mesh)
        );
        if strategy == BlockStrategy::Global {
            run.write_trace_csv(std::io::BufWriter::new(std::fs::File::create(&out)?))?;
        }
    }
    println!("wrote {out}");
    Ok(())
}
