//! Joseph-style ray-driven forward projector.
//!
//! Used only as the non-adjoint comparison baseline: its transpose is never
//! formed, it is paired with the pixel-driven backprojection instead.

use rayon::prelude::*;

use crate::data::{Image, Sinogram};
use crate::error::Result;
use crate::geometry::{AngleSet, DetectorGrid, Direction, ImageGrid};
use crate::radon_pixel::check_finite;

/// Line integrals along `s_p ϑ_q + t ϑ_q^⊥`, sampled once per pixel row or
/// column along the axis the ray is closer to, with linear interpolation
/// across the other axis. Samples outside the grid read as zero.
pub fn joseph_forward(image: &Image, detector: &DetectorGrid, angles: &AngleSet) -> Result<Sinogram> {
    check_finite(image.values(), "image")?;
    let grid = *image.grid();
    let directions = angles.directions();
    let count = detector.count();

    let mut sino = Sinogram::zeros(*detector, angles.clone());
    sino.values_mut()
        .par_iter_mut()
        .with_min_len(16)
        .enumerate()
        .for_each(|(k, out)| {
            let (p, q) = (k % count, k / count);
            *out = ray_sum(image, &grid, directions[q], detector.offset(p));
        });
    Ok(sino)
}

fn ray_sum(image: &Image, grid: &ImageGrid, dir: Direction, s: f64) -> f64 {
    let (c, sn) = (dir.cos, dir.sin);
    // The ray runs along ϑ^⊥ = (−sin, cos).
    if sn.abs() > c.abs() {
        // Mostly horizontal: one sample per column, x·ϑ = s solved for y.
        let mut acc = 0.0;
        for i in 0..grid.n() {
            let x = grid.x(i);
            let y = (s - c * x) / sn;
            let u = grid.row_position(y);
            acc += lerp(u, grid.m(), |j| image.get(i, j));
        }
        acc * grid.delta_x() / sn.abs()
    } else {
        let mut acc = 0.0;
        for j in 0..grid.m() {
            let y = grid.y(j);
            let x = (s - sn * y) / c;
            let u = grid.column_position(x);
            let row = image.row(j);
            acc += lerp(u, grid.n(), |i| row[i]);
        }
        acc * grid.delta_x() / c.abs()
    }
}

/// Linear interpolation at fractional index `u` with zero outside `0..len`.
#[inline]
fn lerp(u: f64, len: usize, value: impl Fn(usize) -> f64) -> f64 {
    if !(u > -1.0 && u < len as f64) {
        return 0.0;
    }
    let base = u.floor();
    let a = u - base;
    let k = base as isize;
    let at = |k: isize| {
        if k >= 0 && (k as usize) < len {
            value(k as usize)
        } else {
            0.0
        }
    };
    (1.0 - a) * at(k) + a * at(k + 1)
}
