//! Pixel-driven parallel-beam Radon transform and its exact adjoint.
//!
//! The forward operator anterpolates every pixel center onto the detector
//! with the hat weight `w_δs(t) = max(0, δs − |t|)`:
//!
//! ```text
//! [R f]_pq = δx²/δs² Σ_ij w_δs(x_ij·ϑ_q − s_p) f_ij
//! [R* g]_ij = Σ_q Δ_q/δs Σ_p w_δs(x_ij·ϑ_q − s_p) g_pq
//! ```
//!
//! Both are adjoint under `⟨f,u⟩_U = δx² Σ f u` and
//! `⟨g,v⟩_V = δs Σ Δ_q g v`. Weights are evaluated on the fly and each output
//! cell is accumulated by a single task in a fixed order, so results do not
//! depend on the thread count.

use rayon::prelude::*;

use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::{AngleSet, DetectorGrid, Direction, ImageGrid};

/// `max(0, δs − |t|)`.
#[inline]
pub fn hat_weight(t: f64, delta_s: f64) -> f64 {
    (delta_s - t.abs()).max(0.0)
}

/// Index window `[ceil(lo) − 1, floor(hi) + 1] ∩ [0, len)` for fractional
/// positions `lo ≤ hi`. The one-cell margin absorbs round-off in the bounds;
/// callers filter by the hat weight itself.
#[inline]
pub(crate) fn index_window(lo: f64, hi: f64, len: usize) -> Option<(usize, usize)> {
    let a = (lo.ceil() - 1.0).max(0.0);
    let b = (hi.floor() + 1.0).min(len as f64 - 1.0);
    if !(a <= b) {
        return None;
    }
    Some((a as usize, b as usize))
}

/// Detector cells that can receive a positive weight from offset `t`.
#[inline]
pub(crate) fn detector_window(detector: &DetectorGrid, t: f64) -> Option<(usize, usize)> {
    let u = detector.position(t);
    let base = u.floor();
    let frac = u - base;
    let lo = if frac < 1e-9 { base - 1.0 } else { base }.max(0.0);
    let hi = if frac > 1.0 - 1e-9 { base + 2.0 } else { base + 1.0 }.min(detector.count() as f64 - 1.0);
    if !(lo <= hi) {
        return None;
    }
    Some((lo as usize, hi as usize))
}

pub(crate) fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("{what} contains non-finite values")));
    }
    Ok(())
}

/// Pixel-driven forward projection of `image` onto `detector` at `angles`.
pub fn radon_forward(image: &Image, detector: &DetectorGrid, angles: &AngleSet) -> Result<Sinogram> {
    check_finite(image.values(), "image")?;
    let grid = *image.grid();
    let lines = GridLines::new(&grid);
    let directions = angles.directions();
    let count = detector.count();
    let ds = detector.delta_s();
    let scale = grid.pixel_area() / (ds * ds);

    let mut sino = Sinogram::zeros(*detector, angles.clone());
    sino.values_mut()
        .par_iter_mut()
        .with_min_len(16)
        .enumerate()
        .for_each(|(k, out)| {
            let (p, q) = (k % count, k / count);
            *out = scale * forward_cell(image, &lines, directions[q], detector.offset(p), ds);
        });
    Ok(sino)
}

/// Pixel-center coordinates along both axes, with the inverse map to
/// fractional indices.
pub(crate) struct GridLines {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    inv_dx: f64,
    half_n: f64,
    half_m: f64,
}

impl GridLines {
    pub fn new(grid: &ImageGrid) -> Self {
        Self {
            xs: (0..grid.n()).map(|i| grid.x(i)).collect(),
            ys: (0..grid.m()).map(|j| grid.y(j)).collect(),
            inv_dx: 1.0 / grid.delta_x(),
            half_n: (grid.n() as f64 - 1.0) * 0.5,
            half_m: (grid.m() as f64 - 1.0) * 0.5,
        }
    }

    #[inline]
    pub fn column_position(&self, x: f64) -> f64 {
        x * self.inv_dx + self.half_n
    }

    #[inline]
    pub fn row_position(&self, y: f64) -> f64 {
        y * self.inv_dx + self.half_m
    }
}

/// Unscaled sum `Σ_ij w(x_ij·ϑ − s) f_ij` for one detector cell.
///
/// Lines closer to vertical (`|ϑ_x| ≥ |ϑ_y|`) are scanned row by row solving for
/// the x range, the others column by column solving for the y range. The
/// divisor is then at least `1/√2`.
fn forward_cell(image: &Image, lines: &GridLines, dir: Direction, s: f64, ds: f64) -> f64 {
    let (c, sn) = (dir.cos, dir.sin);
    let (n, m) = (lines.xs.len(), lines.ys.len());
    let values = image.values();
    let mut acc = 0.0;
    if c.abs() >= sn.abs() {
        let inv = 1.0 / c;
        for (j, &y) in lines.ys.iter().enumerate() {
            let a = (s - ds - sn * y) * inv;
            let b = (s + ds - sn * y) * inv;
            let Some((i0, i1)) = index_window(
                lines.column_position(a.min(b)),
                lines.column_position(a.max(b)),
                n,
            ) else {
                continue;
            };
            let row = &values[j * n..(j + 1) * n];
            for i in i0..=i1 {
                acc += hat_weight(dir.project(lines.xs[i], y) - s, ds) * row[i];
            }
        }
    } else {
        let inv = 1.0 / sn;
        for (i, &x) in lines.xs.iter().enumerate() {
            let a = (s - ds - c * x) * inv;
            let b = (s + ds - c * x) * inv;
            let Some((j0, j1)) = index_window(
                lines.row_position(a.min(b)),
                lines.row_position(a.max(b)),
                m,
            ) else {
                continue;
            };
            for j in j0..=j1 {
                acc += hat_weight(dir.project(x, lines.ys[j]) - s, ds) * values[j * n + i];
            }
        }
    }
    acc
}

/// Pixel-driven backprojection of `sino` onto `grid`, the exact adjoint of
/// [`radon_forward`].
///
/// For each pixel and angle the projected offset `x_ij·ϑ_q` is located on the
/// detector and the two neighbouring values are linearly interpolated. Offsets
/// beyond the outermost cells by a full `δs` receive nothing.
pub fn radon_backproject(sino: &Sinogram, grid: &ImageGrid) -> Result<Image> {
    if sino.fan().is_some() {
        return Err(Error::Dimension(
            "fanbeam sinogram passed to the parallel-beam backprojection".into(),
        ));
    }
    check_finite(sino.values(), "sinogram")?;
    let detector = *sino.detector();
    let directions = sino.angles().directions();
    let weights = sino.angles().weights();
    let ds = detector.delta_s();
    let lines = GridLines::new(grid);
    let count = detector.count();

    let mut image = Image::zeros(*grid);
    image
        .values_mut()
        .par_chunks_mut(grid.n())
        .enumerate()
        .for_each(|(j, row)| {
            let y = lines.ys[j];
            for (q, dir) in directions.iter().enumerate() {
                let column = sino.projection(q);
                for (out, &x) in row.iter_mut().zip(&lines.xs) {
                    let t = dir.project(x, y);
                    let u = detector.position(t);
                    if !(u > -1.0 && u < count as f64) {
                        continue;
                    }
                    let base = u.floor();
                    let k = base as isize;
                    let mut acc = 0.0;
                    if k >= 0 {
                        acc += hat_weight(t - detector.offset(k as usize), ds) * column[k as usize];
                    }
                    if ((k + 1) as usize) < count {
                        acc += hat_weight(t - detector.offset((k + 1) as usize), ds) * column[(k + 1) as usize];
                    }
                    *out += weights[q] * acc;
                }
            }
            row.iter_mut().for_each(|v| *v /= ds);
        });
    Ok(image)
}
