use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::spectral::PixelGrid;

/// Periodic dead-leaves scene: opaque discs with power-law radii
/// (density ∝ r⁻³) and uniform gray levels stacked until the canvas is
/// covered. Its power spectrum falls off roughly as 1/‖ω‖², like natural
/// images. Discs wrap around the borders, so the scene tiles seamlessly.
pub fn dead_leaves(height: usize, width: usize, seed: u64) -> Result<PixelGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_min = 1.0_f64;
    let r_max = 0.4 * height.min(width) as f64;
    let mut canvas = vec![f64::NAN; height * width];
    let mut uncovered = canvas.len();
    // Leaves are laid front to back: a pixel keeps the first leaf covering it.
    let mut leaves = 0;
    while uncovered > 0 && leaves < 20_000 {
        leaves += 1;
        // inverse CDF of p(r) ∝ r^-3 on [r_min, r_max]
        let u: f64 = rng.random();
        let inv = r_min.powi(-2) - u * (r_min.powi(-2) - r_max.powi(-2));
        let radius = inv.powf(-0.5);
        let cy = rng.random_range(0.0..height as f64);
        let cx = rng.random_range(0.0..width as f64);
        let level: f64 = rng.random();
        let reach = radius.ceil() as isize;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let py = (cy.floor() as isize + dy).rem_euclid(height as isize) as usize;
                let px = (cx.floor() as isize + dx).rem_euclid(width as isize) as usize;
                let ddy = cy.floor() + dy as f64 + 0.5 - cy;
                let ddx = cx.floor() + dx as f64 + 0.5 - cx;
                if ddx * ddx + ddy * ddy <= radius * radius {
                    let cell = &mut canvas[py * width + px];
                    if cell.is_nan() {
                        *cell = level;
                        uncovered -= 1;
                    }
                }
            }
        }
    }
    for v in canvas.iter_mut().filter(|v| v.is_nan()) {
        *v = 0.5;
    }
    PixelGrid::new(height, width, canvas)
}
