//! Renders noises with several damping rates on the sphere as 16-bit PGM images.

use std::path::PathBuf;

use spectral_noise::cli::config::RenderConfig;
use spectral_noise::cli::output::write_atomic;
use spectral_noise::cli::render_images;

fn main() -> spectral_noise::Result<()> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("sphere_renders"), PathBuf::from);
    let config = RenderConfig::figure_preset();
    for image in render_images(&config)? {
        let path = write_atomic(&out, &image.sidecar.image, &image.pgm)?;
        let side = serde_json::to_string_pretty(&image.sidecar)?;
        write_atomic(&out, &format!("render_{}.json", image.name), side.as_bytes())?;
        println!(
            "{}: range [{:.3}, {:.3}], grid L2 {:.6}, coefficient L2 {:.6} -> {}",
            image.name,
            image.sidecar.min,
            image.sidecar.max,
            image.sidecar.quadrature_l2,
            image.sidecar.coefficient_l2,
            path.display()
        );
    }
    Ok(())
}
