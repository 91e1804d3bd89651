//! Test images and the closed-form projections of the disc phantom.

use rayon::prelude::*;

use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::{AngleSet, DetectorGrid, ImageGrid};

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Argument(format!("disc radius must be positive, got {r}")));
    }
    Ok(())
}

/// Pixel averages of the indicator of the disc `B(0, r)`.
///
/// Each value is the exact area of the pixel/disc intersection divided by the
/// pixel area. Pixels entirely inside the disc are exactly 1, pixels entirely
/// outside exactly 0.
pub fn rasterize_disc(grid: &ImageGrid, r: f64) -> Result<Image> {
    check_radius(r)?;
    let h = grid.delta_x() / 2.0;
    let area = grid.pixel_area();
    Ok(rasterize_rows(grid, |x, y| match classify_pixel(x, y, h, r) {
        Coverage::Inside => 1.0,
        Coverage::Outside => 0.0,
        Coverage::Partial => {
            let a = quadrant_area(x + h, y + h, r) - quadrant_area(x - h, y + h, r)
                - quadrant_area(x + h, y - h, r)
                + quadrant_area(x - h, y - h, r);
            (a / area).clamp(0.0, 1.0)
        }
    }))
}

/// Disc pixel averages approximated by `k × k` midpoint supersampling.
pub fn rasterize_disc_supersampled(grid: &ImageGrid, r: f64, k: usize) -> Result<Image> {
    check_radius(r)?;
    if k == 0 {
        return Err(Error::Argument("supersampling factor must be at least 1".into()));
    }
    let dx = grid.delta_x();
    let h = dx / 2.0;
    let r2 = r * r;
    let step = dx / k as f64;
    Ok(rasterize_rows(grid, |x, y| match classify_pixel(x, y, h, r) {
        Coverage::Inside => 1.0,
        Coverage::Outside => 0.0,
        Coverage::Partial => {
            let mut hits = 0usize;
            for b in 0..k {
                let v = y - h + step * (b as f64 + 0.5);
                for a in 0..k {
                    let u = x - h + step * (a as f64 + 0.5);
                    if u * u + v * v <= r2 {
                        hits += 1;
                    }
                }
            }
            hits as f64 / (k * k) as f64
        }
    }))
}

fn rasterize_rows(grid: &ImageGrid, value: impl Fn(f64, f64) -> f64 + Sync) -> Image {
    let n = grid.n();
    let mut image = Image::zeros(*grid);
    image
        .values_mut()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, row)| {
            let y = grid.y(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = value(grid.x(i), y);
            }
        });
    image
}

enum Coverage {
    Inside,
    Outside,
    Partial,
}

fn classify_pixel(x: f64, y: f64, h: f64, r: f64) -> Coverage {
    let far_x = x.abs() + h;
    let far_y = y.abs() + h;
    if far_x * far_x + far_y * far_y <= r * r {
        return Coverage::Inside;
    }
    let near_x = (x.abs() - h).max(0.0);
    let near_y = (y.abs() - h).max(0.0);
    if near_x * near_x + near_y * near_y >= r * r {
        return Coverage::Outside;
    }
    Coverage::Partial
}

/// Signed area of `B(0, r) ∩ [0, x] × [0, y]` (odd in each argument).
fn quadrant_area(x: f64, y: f64, r: f64) -> f64 {
    let sign = x.signum() * y.signum();
    let x = x.abs().min(r);
    let y = y.abs().min(r);
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    if x * x + y * y <= r * r {
        return sign * x * y;
    }
    // The arc leaves the box's top edge at u = √(r² − y²).
    let u = (r * r - y * y).max(0.0).sqrt();
    sign * (u * y + disc_g(x, r) - disc_g(u, r))
}

// Modified Shepp–Logan table: intensity, semi-axes (a, b), center, rotation in degrees.
const SHEPP_LOGAN: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0],
    [-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0],
    [-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0],
    [0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0],
    [0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0],
    [0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0],
    [0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0],
];

/// Value of the modified Shepp–Logan phantom at `(x, y)`.
pub fn shepp_logan_value(x: f64, y: f64) -> f64 {
    SHEPP_LOGAN
        .iter()
        .filter(|e| {
            let (sin, cos) = e[5].to_radians().sin_cos();
            let dx = x - e[3];
            let dy = y - e[4];
            let u = (dx * cos + dy * sin) / e[1];
            let v = (-dx * sin + dy * cos) / e[2];
            u * u + v * v <= 1.0
        })
        .map(|e| e[0])
        .sum()
}

/// Modified Shepp–Logan phantom sampled at the pixel centers.
pub fn rasterize_shepp_logan(grid: &ImageGrid) -> Image {
    rasterize_rows(grid, shepp_logan_value)
}

/// `g(s) = √(r² − s²)` on `|s| ≤ r`, the projection at every angle of the
/// radius-`r` disc with height ½ (half the chord length).
pub fn disc_projection(s: f64, r: f64) -> f64 {
    if s.abs() <= r {
        (r * r - s * s).max(0.0).sqrt()
    } else {
        0.0
    }
}

/// Disc projection sampled at the detector offsets, identical for all angles.
pub fn analytic_disc_sinogram(detector: &DetectorGrid, angles: &AngleSet, r: f64) -> Result<Sinogram> {
    check_radius(r)?;
    let column: Vec<f64> = detector.offsets().iter().map(|&s| disc_projection(s, r)).collect();
    let values = column.iter().copied().cycle().take(column.len() * angles.len()).collect();
    Sinogram::from_values(*detector, angles.clone(), values)
}

/// Antiderivative of the disc projection,
/// `G(s) = ½ (Π(s) √(r² − Π(s)²) + r² arcsin(Π(s)/r))` with `Π` the clamp to `[−r, r]`.
pub fn disc_g(s: f64, r: f64) -> f64 {
    let c = s.clamp(-r, r);
    0.5 * (c * (r * r - c * c).max(0.0).sqrt() + r * r * (c / r).clamp(-1.0, 1.0).asin())
}

/// Detector-cell averages of the disc projection, `(G(s_p + δs/2) − G(s_p − δs/2))/δs`.
pub fn disc_cell_average_sinogram(detector: &DetectorGrid, angles: &AngleSet, r: f64) -> Result<Sinogram> {
    check_radius(r)?;
    let ds = detector.delta_s();
    let column: Vec<f64> = detector
        .offsets()
        .iter()
        .map(|&s| (disc_g(s + ds / 2.0, r) - disc_g(s - ds / 2.0, r)) / ds)
        .collect();
    let values = column.iter().copied().cycle().take(column.len() * angles.len()).collect();
    Sinogram::from_values(*detector, angles.clone(), values)
}
