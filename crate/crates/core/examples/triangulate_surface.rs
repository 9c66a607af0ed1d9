//! Samples a two-bump spectrogram on a grid, triangulates it and writes an OBJ.
//!
//! cargo run --example triangulate_surface -- [grid_n] [out.obj]

use lung_distortion::mesh::{sample_surface, triangulate};
use lung_distortion::signal::SpectrogramSurface;

fn main() -> lung_distortion::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(24);
    let out = args.next().unwrap_or_else(|| "surface.obj".into());
    let power: Vec<Vec<f64>> = (0..64)
        .map(|i| {
            (0..48)
                .map(|j| {
                    let (x, y) = (i as f64 / 63.0, j as f64 / 47.0);
                    let bump =
                        |cx: f64, cy: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / 0.01).exp();
                    0.7 * bump(0.3, 0.3) + 0.4 * bump(0.7, 0.6)
                })
                .collect()
        })
        .collect();
    let surface = SpectrogramSurface::from_grid(power)?;
    let mesh = triangulate(&sample_surface(&surface, n)?)?;
    println!(
        "{} vertices, {} triangles, {} boundary vertices, euler {}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.boundary().len(),
        mesh.euler_characteristic()
    );
    println!(
        "surface area {:.4}",
        mesh.triangle_areas().iter().sum::<f64>()
    );
    mesh.write_obj(std::io::BufWriter::new(std::fs::File::create(&out)?))?;
    println!("wrote {out}");
    Ok(())
}
