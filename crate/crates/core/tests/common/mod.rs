//! Direct-sum evaluations of the four pixel-driven operators, written straight
//! from their defining sums with no windowing or axis splitting.

#![allow(dead_code)]

use pixelproj::{AngleSet, DetectorGrid, FanGeometry, Image, ImageGrid, Sinogram};
use rand::Rng;

fn hat(t: f64, ds: f64) -> f64 {
    (ds - t.abs()).max(0.0)
}

fn center(grid: &ImageGrid, i: usize, j: usize) -> (f64, f64) {
    let h = grid.delta_x();
    (
        h * (i as f64 + 1.0 - (grid.n() as f64 + 1.0) / 2.0),
        h * (j as f64 + 1.0 - (grid.m() as f64 + 1.0) / 2.0),
    )
}

fn offset(det: &DetectorGrid, p: usize) -> f64 {
    det.delta_s() * (p as f64 + 1.0 - (det.count() as f64 + 1.0) / 2.0)
}

pub fn naive_radon(f: &Image, det: &DetectorGrid, angles: &AngleSet) -> Vec<f64> {
    let grid = f.grid();
    let ds = det.delta_s();
    let mut out = Vec::new();
    for &phi in angles.angles() {
        for p in 0..det.count() {
            let mut acc = 0.0;
            for j in 0..grid.m() {
                for i in 0..grid.n() {
                    let (x, y) = center(grid, i, j);
                    acc += hat(x * phi.cos() + y * phi.sin() - offset(det, p), ds) * f.get(i, j);
                }
            }
            out.push(acc * grid.delta_x().powi(2) / (ds * ds));
        }
    }
    out
}

pub fn naive_radon_adjoint(g: &Sinogram, grid: &ImageGrid) -> Vec<f64> {
    let det = g.detector();
    let ds = det.delta_s();
    let mut out = Vec::new();
    for j in 0..grid.m() {
        for i in 0..grid.n() {
            let (x, y) = center(grid, i, j);
            let mut acc = 0.0;
            for (q, (&phi, &w)) in g.angles().angles().iter().zip(g.angles().weights()).enumerate() {
                for p in 0..det.count() {
                    acc += w / ds * hat(x * phi.cos() + y * phi.sin() - offset(det, p), ds) * g.get(p, q);
                }
            }
            out.push(acc);
        }
    }
    out
}

fn fan_point(x: f64, y: f64, phi: f64, geo: &FanGeometry) -> (f64, f64) {
    let width = -x * phi.sin() + y * phi.cos() + geo.source_radius();
    ((x * phi.cos() + y * phi.sin()) * geo.source_detector() / width, width)
}

fn inside(x: f64, y: f64, geo: &FanGeometry) -> bool {
    x.hypot(y) < geo.source_radius()
}

pub fn naive_fan(f: &Image, geo: &FanGeometry, angles: &AngleSet) -> Vec<f64> {
    let grid = f.grid();
    let det = geo.detector();
    let dxi = det.delta_s();
    let r = geo.source_detector();
    let mut out = Vec::new();
    for &phi in angles.angles() {
        for p in 0..det.count() {
            let xi_p = offset(det, p);
            let mut acc = 0.0;
            for j in 0..grid.m() {
                for i in 0..grid.n() {
                    let (x, y) = center(grid, i, j);
                    if !inside(x, y, geo) {
                        continue;
                    }
                    let (xi, width) = fan_point(x, y, phi, geo);
                    acc += hat(xi - xi_p, dxi) * f.get(i, j) / width;
                }
            }
            out.push(acc * grid.delta_x().powi(2) / (dxi * dxi) * (xi_p * xi_p + r * r).sqrt());
        }
    }
    out
}

pub fn naive_fan_adjoint(g: &Sinogram, geo: &FanGeometry, grid: &ImageGrid) -> Vec<f64> {
    let det = geo.detector();
    let dxi = det.delta_s();
    let r = geo.source_detector();
    let mut out = Vec::new();
    for j in 0..grid.m() {
        for i in 0..grid.n() {
            let (x, y) = center(grid, i, j);
            let mut acc = 0.0;
            if inside(x, y, geo) {
                for (q, (&phi, &w)) in g.angles().angles().iter().zip(g.angles().weights()).enumerate() {
                    let (xi, width) = fan_point(x, y, phi, geo);
                    for p in 0..det.count() {
                        let xi_p = offset(det, p);
                        acc += w / dxi * hat(xi - xi_p, dxi) * (xi_p * xi_p + r * r).sqrt() / width * g.get(p, q);
                    }
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Largest absolute difference over the largest entry of `magnitude`, the
/// reference operator applied to the absolute input values. This bounds the
/// difference by the size of the summed terms, so cancellation in signed data
/// does not inflate it.
pub fn relative_max_diff(actual: &[f64], reference: &[f64], magnitude: &[f64]) -> f64 {
    assert_eq!(actual.len(), reference.len());
    let scale = magnitude.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = actual.iter().zip(reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn abs_image(f: &Image) -> Image {
    Image::from_fn(*f.grid(), |i, j| f.get(i, j).abs())
}

pub fn abs_sinogram(g: &Sinogram) -> Sinogram {
    let mut a = g.clone();
    a.values_mut().iter_mut().for_each(|v| *v = v.abs());
    a
}

/// Random angle set of the given kind; `None` when `q` is too small for it.
pub fn random_angles(kind: usize, q: usize, rng: &mut impl Rng) -> Option<AngleSet> {
    let mut angles: Vec<f64> = (0..q).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    if angles.len() != q {
        return None;
    }
    match kind {
        0 => Some(AngleSet::new(pixelproj::AngleKind::Full { period: std::f64::consts::PI }, angles).unwrap()),
        1 => (q >= 2).then(|| AngleSet::limited(angles).unwrap()),
        _ => Some(AngleSet::sparse(angles).unwrap()),
    }
}
