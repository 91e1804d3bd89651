//! Pixel-driven fanbeam transform and its exact adjoint.
//!
//! A pixel center `x` seen from the source at angle `α_q` hits the detector at
//! `ξ(x) = x·ϑ_q R / (x·ϑ_q^⊥ + R_E)`. Its value is spread over the two nearest
//! detector cells with the hat weight and damped by the fan width
//! `x·ϑ_q^⊥ + R_E`:
//!
//! ```text
//! [F f]_pq  = δx²/δξ² √(ξ_p² + R²) Σ_ij w_δξ(ξ_ij − ξ_p) f_ij / (x_ij·ϑ_q^⊥ + R_E)
//! [F* g]_ij = Σ_q Δ_q/δξ Σ_p w_δξ(ξ_ij − ξ_p) √(ξ_p² + R²) / (x_ij·ϑ_q^⊥ + R_E) g_pq
//! ```
//!
//! Only pixels whose centers lie strictly inside `B(0, R_E)` take part.

use rayon::prelude::*;

use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::{AngleSet, Direction, FanGeometry, ImageGrid};
use crate::radon_pixel::{check_finite, detector_window, hat_weight, index_window};

/// Detector offset `ξ` and fan width `x·ϑ^⊥ + R_E` of the point `(x, y)`.
#[inline]
pub fn fan_offset(x: f64, y: f64, dir: Direction, geo: &FanGeometry) -> (f64, f64) {
    let width = dir.project_perp(x, y) + geo.source_radius();
    (dir.project(x, y) * geo.source_detector() / width, width)
}

fn check_pixel_size(grid: &ImageGrid, geo: &FanGeometry) -> Result<()> {
    if grid.delta_x() >= geo.max_pixel_size() {
        return Err(Error::Geometry(format!(
            "pixel size {} must be below √2 (R_E − 1) = {}",
            grid.delta_x(),
            geo.max_pixel_size()
        )));
    }
    Ok(())
}

fn check_support(image: &Image, geo: &FanGeometry) -> Result<()> {
    let grid = image.grid();
    for j in 0..grid.m() {
        let y = grid.y(j);
        for (i, &f) in image.row(j).iter().enumerate() {
            let x = grid.x(i);
            if f != 0.0 && !geo.contains(x, y) {
                return Err(Error::FanSupport {
                    i,
                    j,
                    distance: x.hypot(y),
                    source_radius: geo.source_radius(),
                });
            }
        }
    }
    Ok(())
}

fn amplitudes(geo: &FanGeometry) -> Vec<f64> {
    let r = geo.source_detector();
    geo.detector().offsets().iter().map(|xi| (xi * xi + r * r).sqrt()).collect()
}

/// Pixel-driven fanbeam projection of `image` at source angles `angles`.
pub fn fan_forward(image: &Image, geo: &FanGeometry, angles: &AngleSet) -> Result<Sinogram> {
    check_finite(image.values(), "image")?;
    let grid = *image.grid();
    check_pixel_size(&grid, geo)?;
    check_support(image, geo)?;

    let directions = angles.directions();
    let detector = *geo.detector();
    let count = detector.count();
    let dxi = detector.delta_s();
    let amp = amplitudes(geo);
    let scale = grid.pixel_area() / (dxi * dxi);

    let mut sino = Sinogram::fan_zeros(*geo, angles.clone());
    sino.values_mut()
        .par_iter_mut()
        .with_min_len(16)
        .enumerate()
        .for_each(|(k, out)| {
            let (p, q) = (k % count, k / count);
            let acc = forward_cell(image, &grid, geo, directions[q], detector.offset(p), dxi);
            *out = scale * amp[p] * acc;
        });
    Ok(sino)
}

/// `Σ_ij w(ξ_ij − ξ_p) f_ij / (x_ij·ϑ^⊥ + R_E)` for one detector cell.
///
/// Along a row (or column) inside the source ball `ξ` is a monotone Möbius
/// function of the free coordinate, so the pixels within `δξ` of `ξ_p` form one
/// interval bounded by the support ends and the two roots of `ξ = ξ_p ± δξ`.
fn forward_cell(image: &Image, grid: &ImageGrid, geo: &FanGeometry, dir: Direction, xi_p: f64, dxi: f64) -> f64 {
    let (c, s) = (dir.cos, dir.sin);
    let re = geo.source_radius();
    let r = geo.source_detector();
    let bands = [xi_p - dxi, xi_p + dxi];
    let in_band = |x: f64, y: f64| (fan_offset(x, y, dir, geo).0 - xi_p).abs() < dxi;
    let mut acc = 0.0;

    if c.abs() >= s.abs() {
        for j in 0..grid.m() {
            let y = grid.y(j);
            let support = support_window(y, re, grid.n(), |v| grid.column_position(v), |i| geo.contains(grid.x(i), y));
            let Some((i0, i1)) = support else {
                continue;
            };
            let roots = bands.map(|b| root(b * (c * y + re) - r * s * y, r * c + b * s));
            let Some((lo, hi)) = band_span(grid.x(i0), grid.x(i1), roots, |x| in_band(x, y)) else {
                continue;
            };
            let Some((a, b)) = index_window(grid.column_position(lo), grid.column_position(hi), grid.n()) else {
                continue;
            };
            let row = image.row(j);
            for i in a.max(i0)..=b.min(i1) {
                let (xi, width) = fan_offset(grid.x(i), y, dir, geo);
                acc += hat_weight(xi - xi_p, dxi) * row[i] / width;
            }
        }
    } else {
        for i in 0..grid.n() {
            let x = grid.x(i);
            let support = support_window(x, re, grid.m(), |v| grid.row_position(v), |j| geo.contains(x, grid.y(j)));
            let Some((j0, j1)) = support else {
                continue;
            };
            let roots = bands.map(|b| root(b * (re - s * x) - r * c * x, r * s - b * c));
            let Some((lo, hi)) = band_span(grid.y(j0), grid.y(j1), roots, |y| in_band(x, y)) else {
                continue;
            };
            let Some((a, b)) = index_window(grid.row_position(lo), grid.row_position(hi), grid.m()) else {
                continue;
            };
            for j in a.max(j0)..=b.min(j1) {
                let (xi, width) = fan_offset(x, grid.y(j), dir, geo);
                acc += hat_weight(xi - xi_p, dxi) * image.get(i, j) / width;
            }
        }
    }
    acc
}

#[inline]
fn root(num: f64, den: f64) -> Option<f64> {
    let v = num / den;
    v.is_finite().then_some(v)
}

/// Index range of a grid line at transverse coordinate `fixed` whose pixel
/// centers lie inside the source ball.
fn support_window(
    fixed: f64,
    re: f64,
    len: usize,
    position: impl Fn(f64) -> f64,
    inside: impl Fn(usize) -> bool,
) -> Option<(usize, usize)> {
    let h2 = re * re - fixed * fixed;
    if h2 <= 0.0 {
        return None;
    }
    let h = h2.sqrt();
    let (mut a, mut b) = index_window(position(-h), position(h), len)?;
    while a <= b && !inside(a) {
        a += 1;
    }
    while b > a && !inside(b) {
        b -= 1;
    }
    (a <= b && inside(a) && inside(b)).then_some((a, b))
}

/// Sub-interval of `[lo, hi]` on which the monotone map stays inside the band,
/// given the band-edge preimages `roots`.
fn band_span(lo: f64, hi: f64, roots: [Option<f64>; 2], in_band: impl Fn(f64) -> bool) -> Option<(f64, f64)> {
    let mut cuts = [lo, hi, hi, hi];
    let mut len = 1;
    for v in roots.into_iter().flatten() {
        if v > lo && v < hi {
            cuts[len] = v;
            len += 1;
        }
    }
    cuts[len] = hi;
    let cuts = &mut cuts[..=len];
    cuts.sort_by(f64::total_cmp);

    if lo == hi {
        return in_band(lo).then_some((lo, hi));
    }
    let mut span: Option<(f64, f64)> = None;
    for w in cuts.windows(2) {
        if w[1] > w[0] && in_band(0.5 * (w[0] + w[1])) {
            span = Some(match span {
                Some((a, _)) => (a, w[1]),
                None => (w[0], w[1]),
            });
        }
    }
    span
}

/// Pixel-driven fanbeam backprojection, the exact adjoint of [`fan_forward`].
/// Pixels centered outside the source ball are set to zero.
pub fn fan_backproject(sino: &Sinogram, geo: &FanGeometry, grid: &ImageGrid) -> Result<Image> {
    check_finite(sino.values(), "sinogram")?;
    check_pixel_size(grid, geo)?;
    if sino.detector() != geo.detector() {
        return Err(Error::Dimension(format!(
            "sinogram detector ({} cells, width {}) does not match the fan geometry ({} cells, width {})",
            sino.detector().count(),
            sino.detector().width(),
            geo.detector().count(),
            geo.width()
        )));
    }
    if let Some(own) = sino.fan() {
        if own != geo {
            return Err(Error::Dimension("sinogram was recorded with a different fan geometry".into()));
        }
    }

    let detector = *geo.detector();
    let directions = sino.angles().directions();
    let weights = sino.angles().weights();
    let dxi = detector.delta_s();
    let amp = amplitudes(geo);
    let n = grid.n();

    let mut image = Image::zeros(*grid);
    image
        .values_mut()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, row)| {
            let y = grid.y(j);
            for (i, out) in row.iter_mut().enumerate() {
                let x = grid.x(i);
                if !geo.contains(x, y) {
                    continue;
                }
                let mut val = 0.0;
                for (q, &dir) in directions.iter().enumerate() {
                    let (xi, width) = fan_offset(x, y, dir, geo);
                    let Some((p0, p1)) = detector_window(&detector, xi) else {
                        continue;
                    };
                    let column = sino.projection(q);
                    let mut acc = 0.0;
                    for p in p0..=p1 {
                        acc += hat_weight(xi - detector.offset(p), dxi) * amp[p] * column[p];
                    }
                    val += weights[q] * acc / width;
                }
                *out = val / dxi;
            }
        });
    Ok(image)
}

/// Parallel-beam coordinates `(s, φ)` of the fan ray `(ξ, α)`:
/// `s = ξ R_E / √(ξ² + R²)`, `φ = α − arctan(ξ/R)`.
pub fn fan_to_parallel_coords(xi: f64, alpha: f64, geo: &FanGeometry) -> (f64, f64) {
    let r = geo.source_detector();
    let s = xi * geo.source_radius() / (xi * xi + r * r).sqrt();
    (s, alpha - (xi / r).atan())
}

/// Inverse of [`fan_to_parallel_coords`]; requires `|s| < R_E`.
pub fn parallel_to_fan_coords(s: f64, phi: f64, geo: &FanGeometry) -> Result<(f64, f64)> {
    let re = geo.source_radius();
    if !(s.abs() < re) {
        return Err(Error::Argument(format!("offset {s} is not inside (−R_E, R_E)")));
    }
    let r = geo.source_detector();
    let xi = r * s / (re * re - s * s).sqrt();
    Ok((xi, phi + (xi / r).atan()))
}
