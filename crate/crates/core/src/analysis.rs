//! Inner products, adjointness and norm checks, the closed-form disc error,
//! and the convergence-study drivers.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::geometry::{AngleSet, DetectorGrid, ImageGrid};
use crate::phantoms::{disc_g, rasterize_disc};
use crate::projector::{ParallelPair, ProjectorPair};

/// `⟨a, b⟩_U = δx² Σ a_ij b_ij`.
pub fn image_inner(a: &Image, b: &Image) -> Result<f64> {
    b.check_grid(a.grid())?;
    Ok(a.grid().pixel_area() * dot(a.values(), b.values()))
}

/// `⟨a, b⟩_V = δs Σ_pq Δ_q a_pq b_pq`.
pub fn sino_inner(a: &Sinogram, b: &Sinogram) -> Result<f64> {
    a.check_layout(b)?;
    let count = a.detector().count();
    let sum: f64 = a
        .angles()
        .weights()
        .iter()
        .enumerate()
        .map(|(q, w)| w * dot(&a.values()[q * count..(q + 1) * count], b.projection(q)))
        .sum();
    Ok(a.detector().delta_s() * sum)
}

pub fn image_norm(a: &Image) -> f64 {
    (a.grid().pixel_area() * dot(a.values(), a.values())).sqrt()
}

pub fn sino_norm(a: &Sinogram) -> f64 {
    sino_inner(a, a).expect("same layout").sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Uniform(−1, 1) image on the pixels the pair accepts, zero elsewhere.
pub fn random_image<P: ProjectorPair + ?Sized>(pair: &P, rng: &mut impl Rng) -> Image {
    Image::from_fn(*pair.image_grid(), |i, j| {
        let v = rng.gen_range(-1.0..1.0);
        if pair.supports_pixel(i, j) {
            v
        } else {
            0.0
        }
    })
}

/// Uniform(−1, 1) sinogram in the pair's range layout.
pub fn random_sinogram<P: ProjectorPair + ?Sized>(pair: &P, rng: &mut impl Rng) -> Sinogram {
    let mut g = pair.empty_sinogram();
    g.values_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    g
}

/// Largest relative gap `|⟨Ff, g⟩_V − ⟨f, Bg⟩_U| / (‖f‖_U ‖g‖_V)` over
/// `trials` seeded random pairs.
pub fn adjointness_gap<P: ProjectorPair + ?Sized>(pair: &P, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Argument("at least one trial is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = random_image(pair, &mut rng);
        let g = random_sinogram(pair, &mut rng);
        let lhs = sino_inner(&pair.forward(&f)?, &g)?;
        let rhs = image_inner(&f, &pair.backward(&g)?)?;
        let denom = image_norm(&f) * sino_norm(&g);
        if denom > 0.0 {
            worst = worst.max((lhs - rhs).abs() / denom);
        }
    }
    Ok(worst)
}

/// Power iteration on `B F`, returning `√(‖F f_k‖²_V / ‖f_k‖²_U)` after each step.
pub fn operator_norm_history<P: ProjectorPair + ?Sized>(pair: &P, iterations: usize, seed: u64) -> Result<Vec<f64>> {
    check_iterations(iterations)?;
    let mut f = nonzero_start(seed, |rng| random_image(pair, rng), image_norm)?;
    let mut history = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let norm = image_norm(&f);
        let g = pair.forward(&f)?;
        history.push(sino_norm(&g) / norm);
        let mut next = pair.backward(&g)?;
        let next_norm = image_norm(&next);
        if next_norm == 0.0 {
            break;
        }
        next.scale(1.0 / next_norm);
        f = next;
    }
    Ok(history)
}

/// Estimate of `‖F‖` from `iterations` power-iteration steps.
pub fn estimate_operator_norm<P: ProjectorPair + ?Sized>(pair: &P, iterations: usize, seed: u64) -> Result<f64> {
    Ok(*operator_norm_history(pair, iterations, seed)?.last().expect("nonempty history"))
}

/// The same estimate computed on `F B`, starting from a random sinogram.
pub fn estimate_adjoint_norm<P: ProjectorPair + ?Sized>(pair: &P, iterations: usize, seed: u64) -> Result<f64> {
    check_iterations(iterations)?;
    let mut g = nonzero_start(seed, |rng| random_sinogram(pair, rng), sino_norm)?;
    let mut sigma = 0.0;
    for _ in 0..iterations {
        let norm = sino_norm(&g);
        let f = pair.backward(&g)?;
        sigma = image_norm(&f) / norm;
        let mut next = pair.forward(&f)?;
        let next_norm = sino_norm(&next);
        if next_norm == 0.0 {
            break;
        }
        next.scale(1.0 / next_norm);
        g = next;
    }
    Ok(sigma)
}

fn check_iterations(iterations: usize) -> Result<()> {
    if iterations == 0 {
        return Err(Error::Argument("at least one power iteration is required".into()));
    }
    Ok(())
}

/// Draws start vectors until one is nonzero, bumping the seed each time.
fn nonzero_start<T>(seed: u64, mut draw: impl FnMut(&mut ChaCha8Rng) -> T, norm: impl Fn(&T) -> f64) -> Result<T> {
    for attempt in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let v = draw(&mut rng);
        if norm(&v) > 0.0 {
            return Ok(v);
        }
    }
    Err(Error::Argument(
        "could not draw a nonzero start vector; the operator domain is empty".into(),
    ))
}

/// L2 distance between a sinogram and the exact disc projection.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscError {
    /// `‖g − g^δ‖` over the whole sinogram domain.
    pub full: f64,
    /// `‖g − g^δ(·, φ_q)‖` for each projection.
    pub per_angle: Vec<f64>,
}

impl DiscError {
    /// Largest per-projection error.
    pub fn worst_projection(&self) -> f64 {
        self.per_angle.iter().copied().fold(0.0, f64::max)
    }
}

/// Closed-form L2 error between the piecewise-constant sinogram `sino` and
/// the projection `g(s) = √(r² − s²)⁺` of a radius-`r` disc, restricted to the
/// detector span.
///
/// Per projection `‖g − g^δ‖² = ‖g‖² + δs Σ_p (g^δ_p)² − 2 Σ_p g^δ_p (G(s_p+δs/2) − G(s_p−δs/2))`
/// where `‖g‖²` is integrated exactly cell by cell.
pub fn disc_l2_error(sino: &Sinogram, r: f64) -> Result<DiscError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Argument(format!("disc radius must be positive, got {r}")));
    }
    let detector = sino.detector();
    let ds = detector.delta_s();
    let h = |s: f64| {
        let c = s.clamp(-r, r);
        c * r * r - c * c * c / 3.0
    };
    let offsets = detector.offsets();
    let exact_sq: f64 = offsets.iter().map(|&s| h(s + ds / 2.0) - h(s - ds / 2.0)).sum();
    let cell_integrals: Vec<f64> = offsets
        .iter()
        .map(|&s| disc_g(s + ds / 2.0, r) - disc_g(s - ds / 2.0, r))
        .collect();

    let per_angle: Vec<f64> = (0..sino.angles().len())
        .map(|q| {
            let column = sino.projection(q);
            let own: f64 = ds * dot(column, column);
            let cross: f64 = dot(column, &cell_integrals);
            (exact_sq + own - 2.0 * cross).max(0.0).sqrt()
        })
        .collect();
    let full = per_angle
        .iter()
        .zip(sino.angles().weights())
        .map(|(e, w)| w * e * e)
        .sum::<f64>()
        .sqrt();
    Ok(DiscError { full, per_angle })
}

/// How image size and angle count follow the detector count in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `N = P`, `Q = P/10`.
    Linear,
    /// `N = P²/90 + P`, `Q = P²/900 + P/10`.
    Quadratic,
}

impl Coupling {
    /// `(N, Q)` for detector count `p`.
    pub fn dims(self, p: usize) -> (usize, usize) {
        let pf = p as f64;
        let tenth = (pf / 10.0).round() as usize;
        match self {
            Coupling::Linear => (p, tenth.max(1)),
            Coupling::Quadratic => {
                let n = (pf * pf / 90.0).round() as usize + p;
                let q = (pf * pf / 900.0).round() as usize + tenth;
                (n, q.max(1))
            }
        }
    }
}

/// One configuration of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub detectors: usize,
    pub size: usize,
    pub angles: usize,
    pub delta_s: f64,
    pub l2_error_full: f64,
    pub l2_error_worst_projection: f64,
    pub wall_time: f64,
}

/// Records of a study with the log-log slopes of the full error against `δs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub records: Vec<ConvergenceRecord>,
    /// Least-squares slope over all records; `None` with fewer than two.
    pub fitted_slope: Option<f64>,
    /// Slope between each consecutive pair of records.
    pub pair_slopes: Vec<f64>,
}

/// Disc radius, angular period and cost ceiling shared by the study drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub radius: f64,
    pub period: f64,
    /// Upper bound on `N·M·Q` for any single configuration.
    pub budget: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            radius: 0.6,
            period: std::f64::consts::PI,
            budget: 1e10,
        }
    }
}

/// Disc errors for each `P` in `p_list` with `N` and `Q` set by `coupling`.
///
/// The phantom is the disc of radius `options.radius` at height ½, whose
/// projection is the function measured by [`disc_l2_error`].
pub fn convergence_study(p_list: &[usize], coupling: Coupling, options: &StudyOptions) -> Result<ConvergenceStudy> {
    check_ascending(p_list, "detector counts")?;
    let configs: Vec<(usize, usize, usize)> = p_list
        .iter()
        .map(|&p| {
            let (n, q) = coupling.dims(p);
            (p, n, q)
        })
        .collect();
    run_study(&configs, options)
}

/// Disc errors at fixed detector count `p` for image sizes `n_list`, with
/// `Q = N/10`.
pub fn fixed_detector_study(p: usize, n_list: &[usize], options: &StudyOptions) -> Result<ConvergenceStudy> {
    check_ascending(n_list, "image sizes")?;
    let configs: Vec<(usize, usize, usize)> = n_list
        .iter()
        .map(|&n| (p, n, ((n as f64 / 10.0).round() as usize).max(1)))
        .collect();
    run_study(&configs, options)
}

fn check_ascending(list: &[usize], what: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Argument(format!("{what} must not be empty")));
    }
    if list.contains(&0) || list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument(format!("{what} must be positive and strictly ascending")));
    }
    Ok(())
}

fn run_study(configs: &[(usize, usize, usize)], options: &StudyOptions) -> Result<ConvergenceStudy> {
    if !(options.radius.is_finite() && options.radius > 0.0) {
        return Err(Error::Argument(format!("disc radius must be positive, got {}", options.radius)));
    }
    for &(_, n, q) in configs {
        let cost = (n as f64) * (n as f64) * (q as f64);
        if cost > options.budget {
            return Err(Error::Budget {
                cost,
                budget: options.budget,
            });
        }
    }

    let mut records = Vec::with_capacity(configs.len());
    for &(p, n, q) in configs {
        let start = Instant::now();
        let grid = ImageGrid::square(n, 2.0)?;
        let detector = DetectorGrid::unit(p)?;
        let angles = AngleSet::full_uniform(q, 0.0, options.period)?;
        // Height ½ so that the projection is exactly √(r² − s²)⁺, the oracle
        // of `disc_l2_error`; the unit disc projects to twice that.
        let mut image = rasterize_disc(&grid, options.radius)?;
        image.scale(0.5);
        let sino = ParallelPair::new(grid, detector, angles).forward(&image)?;
        let error = disc_l2_error(&sino, options.radius)?;
        records.push(ConvergenceRecord {
            detectors: p,
            size: n,
            angles: q,
            delta_s: detector.delta_s(),
            l2_error_full: error.full,
            l2_error_worst_projection: error.worst_projection(),
            wall_time: start.elapsed().as_secs_f64(),
        });
    }

    let xs: Vec<f64> = records.iter().map(|r| r.delta_s).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.l2_error_full).collect();
    Ok(ConvergenceStudy {
        fitted_slope: log_log_slope(&xs, &ys),
        pair_slopes: xs
            .windows(2)
            .zip(ys.windows(2))
            .filter_map(|(x, y)| log_log_slope(x, y))
            .collect(),
        records,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable (positive) points or no spread in `x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FanGeometry;
    use crate::phantoms::{analytic_disc_sinogram, disc_cell_average_sinogram, disc_projection};
    use crate::projector::{FanPair, JosephPair};
    use std::f64::consts::PI;

    fn parallel(n: usize, p: usize, q: usize) -> ParallelPair {
        ParallelPair::new(
            ImageGrid::square(n, 2.0).unwrap(),
            DetectorGrid::unit(p).unwrap(),
            AngleSet::half_turn(q).unwrap(),
        )
    }

    #[test]
    fn image_inner_examples() {
        let grid = ImageGrid::new(2, 2, 1.0).unwrap();
        let ones = Image::from_fn(grid, |_, _| 1.0);
        assert_eq!(image_inner(&ones, &ones).unwrap(), 4.0);
        let a = Image::from_fn(grid, |i, _| (i == 0) as u8 as f64);
        let b = Image::from_fn(grid, |i, _| (i == 1) as u8 as f64);
        assert_eq!(image_inner(&a, &b).unwrap(), 0.0);

        let grid = ImageGrid::square(200, 2.0).unwrap();
        let disc = rasterize_disc(&grid, 0.6).unwrap();
        assert!((image_inner(&disc, &disc).unwrap() - PI * 0.36).abs() < 1e-2);
    }

    #[test]
    fn image_inner_rejects_other_grid() {
        let a = Image::zeros(ImageGrid::square(3, 2.0).unwrap());
        let b = Image::zeros(ImageGrid::square(4, 2.0).unwrap());
        assert!(image_inner(&a, &b).is_err());
    }

    #[test]
    fn sino_inner_examples() {
        let det = DetectorGrid::new(1, 2.0).unwrap();
        let angles = AngleSet::full_uniform(1, 0.0, PI).unwrap();
        let g = Sinogram::from_values(det, angles.clone(), vec![1.0]).unwrap();
        assert!((sino_inner(&g, &g).unwrap() - 2.0 * PI).abs() < 1e-15);

        let det = DetectorGrid::unit(4).unwrap();
        let angles = AngleSet::half_turn(2).unwrap();
        let a = Sinogram::from_values(det, angles.clone(), vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        let b = Sinogram::from_values(det, angles, vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(sino_inner(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn disc_sinogram_norm_tends_to_closed_form() {
        // ∫ (r² − s²) ds = 4r³/3 per angle, times the period.
        let r: f64 = 0.6;
        for (period, expected) in [(PI, 4.0 * PI * r.powi(3) / 3.0), (2.0 * PI, 8.0 * PI * r.powi(3) / 3.0)] {
            let det = DetectorGrid::unit(4000).unwrap();
            let angles = AngleSet::full_uniform(3, 0.0, period).unwrap();
            let g = analytic_disc_sinogram(&det, &angles, r).unwrap();
            assert!((sino_inner(&g, &g).unwrap() - expected).abs() < 1e-5 * expected);
        }
        assert!((8.0 * PI * r.powi(3) / 3.0 - 1.809557).abs() < 1e-6);
    }

    #[test]
    fn pixel_driven_pairs_are_adjoint() {
        assert!(adjointness_gap(&parallel(12, 15, 7), 5, 42).unwrap() < 1e-12);
        let geo = FanGeometry::new(3.0, 6.0, 17).unwrap();
        let fan = FanPair::new(ImageGrid::square(12, 4.0).unwrap(), geo, AngleSet::full_uniform(9, 0.0, 2.0 * PI).unwrap());
        assert!(adjointness_gap(&fan, 5, 42).unwrap() < 1e-12);
    }

    #[test]
    fn joseph_pair_is_visibly_not_adjoint() {
        let pair = JosephPair::new(
            ImageGrid::square(32, 2.0).unwrap(),
            DetectorGrid::unit(32).unwrap(),
            AngleSet::half_turn(16).unwrap(),
        );
        assert!(adjointness_gap(&pair, 20, 42).unwrap() >= 1e-3);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(adjointness_gap(&parallel(4, 4, 2), 0, 1).is_err());
    }

    /// Scalar multiple of the identity on a one-pixel image with a one-cell
    /// detector and a single unit-weight angle.
    #[test]
    fn toy_operator_norm() {
        // δx = δs = 1: F f = f · w(0)/1 = f, B g = g · 1/1 · w(0) = g.
        let pair = ParallelPair::new(
            ImageGrid::new(1, 1, 1.0).unwrap(),
            DetectorGrid::new(1, 1.0).unwrap(),
            AngleSet::sparse(vec![0.3]).unwrap(),
        );
        let sigma = estimate_operator_norm(&pair, 3, 9).unwrap();
        assert!((sigma - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_estimate_plateaus() {
        let pair = parallel(100, 100, 10);
        let history = operator_norm_history(&pair, 60, 5).unwrap();
        let (a, b) = (history[49], history[59]);
        assert!((b - a).abs() / b <= 1e-3);
        for w in history.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn norm_estimate_agrees_on_both_sides() {
        let pair = parallel(24, 20, 9);
        let a = estimate_operator_norm(&pair, 200, 3).unwrap();
        let b = estimate_adjoint_norm(&pair, 200, 3).unwrap();
        assert!((a - b).abs() / a < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn empty_fan_domain_is_reported() {
        // Every pixel center sits outside the source ball.
        let geo = FanGeometry::new(1.5, 4.0, 5).unwrap();
        let pair = FanPair::new(ImageGrid::new(2, 2, 4.0).unwrap(), geo, AngleSet::half_turn(3).unwrap());
        assert!(matches!(estimate_operator_norm(&pair, 5, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_sinogram_error_is_the_norm() {
        let r: f64 = 0.6;
        for period in [PI, 2.0 * PI] {
            let det = DetectorGrid::unit(64).unwrap();
            let angles = AngleSet::full_uniform(5, 0.0, period).unwrap();
            let err = disc_l2_error(&Sinogram::zeros(det, angles), r).unwrap();
            let expected = (period * 4.0 * r.powi(3) / 3.0).sqrt();
            assert!((err.full - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn cell_average_error_is_positive_and_shrinks() {
        let r = 0.6;
        let angles = AngleSet::half_turn(4).unwrap();
        let mut last = f64::INFINITY;
        for p in [20, 40, 80, 160] {
            let det = DetectorGrid::unit(p).unwrap();
            let err = disc_l2_error(&disc_cell_average_sinogram(&det, &angles, r).unwrap(), r).unwrap();
            assert!(err.full > 0.0 && err.full < last);
            let first = err.per_angle[0];
            assert!(err.per_angle.iter().all(|&e| e == first));
            last = err.full;
        }
    }

    #[test]
    fn closed_form_matches_trapezoid_quadrature() {
        let r = 0.6;
        for p in [7, 20, 50] {
            let det = DetectorGrid::unit(p).unwrap();
            let angles = AngleSet::half_turn(3).unwrap();
            let values: Vec<f64> = (0..p * 3).map(|k| ((k * 37 % 11) as f64) / 10.0).collect();
            let sino = Sinogram::from_values(det, angles, values).unwrap();
            let err = disc_l2_error(&sino, r).unwrap();
            let ds = det.delta_s();
            for q in 0..3 {
                let mut total = 0.0;
                for pp in 0..p {
                    let (a, b) = (det.offset(pp) - ds / 2.0, det.offset(pp) + ds / 2.0);
                    let c = sino.get(pp, q);
                    let f = |s: f64| (disc_projection(s, r) - c).powi(2);
                    // Split at ±r and grade the nodes towards both ends of each
                    // piece so the square-root endpoint behaviour is resolved.
                    let mut nodes = vec![a, b];
                    for k in [-r, r] {
                        if k > a && k < b {
                            nodes.push(k);
                        }
                    }
                    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
                    for w in nodes.windows(2) {
                        let steps = 20000;
                        let len = w[1] - w[0];
                        let g = |t: f64| f(w[0] + len * t * t * (3.0 - 2.0 * t)) * len * 6.0 * t * (1.0 - t);
                        let h = 1.0 / steps as f64;
                        let mut acc = 0.5 * (g(0.0) + g(1.0));
                        for k in 1..steps {
                            acc += g(h * k as f64);
                        }
                        total += acc * h;
                    }
                }
                let expected = err.per_angle[q].powi(2);
                assert!((total - expected).abs() <= 1e-8 * expected, "p={p} {total} vs {expected}");
            }
        }
    }

    #[test]
    fn unit_disc_projects_to_twice_the_oracle() {
        let grid = ImageGrid::square(400, 2.0).unwrap();
        let det = DetectorGrid::unit(50).unwrap();
        let angles = AngleSet::half_turn(3).unwrap();
        let disc = rasterize_disc(&grid, 0.6).unwrap();
        let sino = ParallelPair::new(grid, det, angles.clone()).forward(&disc).unwrap();
        let mut exact = analytic_disc_sinogram(&det, &angles, 0.6).unwrap();
        exact.scale(2.0);
        let diff: f64 = sino.values().iter().zip(exact.values()).map(|(a, b)| (a - b).powi(2)).sum();
        let norm: f64 = exact.values().iter().map(|b| b * b).sum();
        assert!((diff / norm).sqrt() < 0.02);
    }

    #[test]
    fn nonpositive_radius_rejected() {
        let sino = Sinogram::zeros(DetectorGrid::unit(3).unwrap(), AngleSet::half_turn(1).unwrap());
        assert!(disc_l2_error(&sino, 0.0).is_err());
        assert!(disc_l2_error(&sino, -1.0).is_err());
    }

    #[test]
    fn coupling_dims() {
        assert_eq!(Coupling::Linear.dims(100), (100, 10));
        assert_eq!(Coupling::Quadratic.dims(50), (78, 8));
        assert_eq!(Coupling::Quadratic.dims(400), (2178, 218));
    }

    #[test]
    fn single_entry_study_has_no_slopes() {
        let study = convergence_study(&[40], Coupling::Linear, &StudyOptions::default()).unwrap();
        assert_eq!(study.records.len(), 1);
        assert!(study.pair_slopes.is_empty());
        assert!(study.fitted_slope.is_none());
        let rec = &study.records[0];
        assert_eq!((rec.detectors, rec.size, rec.angles), (40, 40, 4));
        assert!(rec.l2_error_full > 0.0);
    }

    #[test]
    fn study_guards() {
        let tight = StudyOptions {
            budget: 100.0,
            ..StudyOptions::default()
        };
        assert!(matches!(
            convergence_study(&[20], Coupling::Linear, &tight),
            Err(Error::Budget { .. })
        ));
        assert!(convergence_study(&[], Coupling::Linear, &StudyOptions::default()).is_err());
        assert!(convergence_study(&[40, 20], Coupling::Linear, &StudyOptions::default()).is_err());
    }

    #[test]
    fn fixed_detector_driver() {
        let study = fixed_detector_study(30, &[20, 40], &StudyOptions::default()).unwrap();
        assert_eq!(study.records[1].size, 40);
        assert_eq!(study.records[1].angles, 4);
        assert!(study.records.iter().all(|r| r.detectors == 30));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 1.5).abs() < 1e-12);
        assert!(log_log_slope(&xs[..1], &ys[..1]).is_none());
    }
}
