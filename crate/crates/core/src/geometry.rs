//! Discretization lattices: image pixels, detector cells, projection angles
//! and the fanbeam source/detector arrangement.
//!
//! Formulas index pixels and detectors from 1, storage indexes from 0. The
//! accessors here take storage indices and are the only place the shift
//! happens.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular `n × m` pixel lattice centered on the origin with square pixels of
/// side `delta_x`. Pixel values are stored with `i` (the x index) fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageGrid {
    n: usize,
    m: usize,
    delta_x: f64,
}

impl ImageGrid {
    pub fn new(n: usize, m: usize, delta_x: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Geometry(format!("image grid must be non-empty, got {n}x{m}")));
        }
        if !(delta_x.is_finite() && delta_x > 0.0) {
            return Err(Error::Geometry(format!("pixel size must be positive, got {delta_x}")));
        }
        Ok(Self { n, m, delta_x })
    }

    /// Square `n × n` grid covering `[-width/2, width/2]²`.
    pub fn square(n: usize, width: f64) -> Result<Self> {
        Self::fitted(n, n, width)
    }

    /// `n × m` grid whose longer side spans `width`.
    pub fn fitted(n: usize, m: usize, width: f64) -> Result<Self> {
        Self::new(n, m, width / n.max(m).max(1) as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }

    pub fn len(&self) -> usize {
        self.n * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pixel_area(&self) -> f64 {
        self.delta_x * self.delta_x
    }

    /// x coordinate of column `i`, i.e. `δx (i+1 − (N+1)/2)`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.delta_x * (i as f64 - (self.n as f64 - 1.0) * 0.5)
    }

    /// y coordinate of row `j`.
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.delta_x * (j as f64 - (self.m as f64 - 1.0) * 0.5)
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x(i), self.y(j)]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Fractional column coordinate of `x`, so that `x(i)` maps to `i`.
    #[inline]
    pub fn column_position(&self, x: f64) -> f64 {
        x / self.delta_x + (self.n as f64 - 1.0) * 0.5
    }

    #[inline]
    pub fn row_position(&self, y: f64) -> f64 {
        y / self.delta_x + (self.m as f64 - 1.0) * 0.5
    }
}

/// Equispaced line detector with `count` cells of width `delta_s = width / count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorGrid {
    count: usize,
    width: f64,
    delta_s: f64,
}

impl DetectorGrid {
    pub fn new(count: usize, width: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Geometry("detector needs at least one cell".into()));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Geometry(format!("detector width must be positive, got {width}")));
        }
        Ok(Self {
            count,
            width,
            delta_s: width / count as f64,
        })
    }

    /// Parallel-beam default: width 2, so that `δs = 2/P`.
    pub fn unit(count: usize) -> Result<Self> {
        Self::new(count, 2.0)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_s
    }

    /// Offset of cell `p`, `δs (p+1 − (P+1)/2)`.
    #[inline]
    pub fn offset(&self, p: usize) -> f64 {
        self.delta_s * (p as f64 - (self.count as f64 - 1.0) * 0.5)
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.count).map(|p| self.offset(p)).collect()
    }

    /// Fractional cell coordinate of `t`, so that `offset(p)` maps to `p`.
    #[inline]
    pub fn position(&self, t: f64) -> f64 {
        t / self.delta_s + (self.count as f64 - 1.0) * 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AngleKind {
    /// Angles cover a whole period; cell widths wrap around it.
    Full { period: f64 },
    /// Angles cover `[φ_1, φ_Q]`; the outermost cells are cut at the endpoints.
    Limited,
    /// Finitely many angles under the counting measure.
    Sparse,
}

/// Projection angles `φ_1 < … < φ_Q` with their quadrature weights `Δ_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSet {
    angles: Vec<f64>,
    weights: Vec<f64>,
    kind: AngleKind,
}

impl AngleSet {
    /// Builds the set for `kind`, deriving the weights from the angle list.
    pub fn new(kind: AngleKind, angles: Vec<f64>) -> Result<Self> {
        check_increasing(&angles)?;
        let q = angles.len();
        let weights = match kind {
            AngleKind::Full { period } => {
                check_period(period)?;
                let span = angles[q - 1] - angles[0];
                if span >= period {
                    return Err(Error::Angles(format!(
                        "angles span {span} which is not less than the period {period}"
                    )));
                }
                (0..q)
                    .map(|k| {
                        let prev = if k == 0 { angles[q - 1] - period } else { angles[k - 1] };
                        let next = if k + 1 == q { angles[0] + period } else { angles[k + 1] };
                        (next - prev) / 2.0
                    })
                    .collect()
            }
            AngleKind::Limited => {
                if q < 2 {
                    return Err(Error::Angles(
                        "a limited-angle set needs at least two angles to have positive measure".into(),
                    ));
                }
                (0..q)
                    .map(|k| {
                        let prev = angles[k.saturating_sub(1)];
                        let next = angles[(k + 1).min(q - 1)];
                        (next - prev) / 2.0
                    })
                    .collect()
            }
            AngleKind::Sparse => vec![1.0; q],
        };
        Ok(Self { angles, weights, kind })
    }

    /// `q` equispaced angles `start + k·period/q`; every weight is `period/q`.
    pub fn full_uniform(q: usize, start: f64, period: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Angles("angle set must not be empty".into()));
        }
        check_period(period)?;
        let step = period / q as f64;
        let angles = (0..q).map(|k| start + step * k as f64).collect();
        Ok(Self {
            angles,
            weights: vec![step; q],
            kind: AngleKind::Full { period },
        })
    }

    /// Uniform half-turn `[0, π)`, the setting of most experiments.
    pub fn half_turn(q: usize) -> Result<Self> {
        Self::full_uniform(q, 0.0, PI)
    }

    /// `q ≥ 2` equispaced angles from `start` to `end` inclusive.
    pub fn limited_uniform(q: usize, start: f64, end: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Angles("a limited-angle set needs at least two angles".into()));
        }
        let step = (end - start) / (q - 1) as f64;
        let mut angles: Vec<f64> = (0..q).map(|k| start + step * k as f64).collect();
        angles[q - 1] = end;
        Self::new(AngleKind::Limited, angles)
    }

    pub fn limited(angles: Vec<f64>) -> Result<Self> {
        Self::new(AngleKind::Limited, angles)
    }

    pub fn sparse(angles: Vec<f64>) -> Result<Self> {
        Self::new(AngleKind::Sparse, angles)
    }

    /// Reassembles a set from stored angles and weights without recomputing them.
    pub fn from_parts(kind: AngleKind, angles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_increasing(&angles)?;
        if weights.len() != angles.len() {
            return Err(Error::Angles(format!(
                "{} weights for {} angles",
                weights.len(),
                angles.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Angles("weights must be finite and nonnegative".into()));
        }
        if let AngleKind::Full { period } = kind {
            check_period(period)?;
        }
        Ok(Self { angles, weights, kind })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> AngleKind {
        self.kind
    }

    /// Total angular measure `Σ Δ_q`.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.angles.iter().map(|&phi| Direction::new(phi)).collect()
    }
}

fn check_increasing(angles: &[f64]) -> Result<()> {
    if angles.is_empty() {
        return Err(Error::Angles("angle set must not be empty".into()));
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::Angles("angles must be finite".into()));
    }
    if let Some(w) = angles.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Angles(format!(
            "angles must be strictly increasing, found {} followed by {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn check_period(period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::Angles(format!("period must be positive, got {period}")));
    }
    Ok(())
}

/// Projection direction `ϑ(φ) = (cos φ, sin φ)` and its rotation
/// `ϑ(φ)^⊥ = (−sin φ, cos φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub cos: f64,
    pub sin: f64,
}

impl Direction {
    pub fn new(phi: f64) -> Self {
        let (sin, cos) = phi.sin_cos();
        Self { cos, sin }
    }

    pub fn theta(&self) -> [f64; 2] {
        [self.cos, self.sin]
    }

    pub fn theta_perp(&self) -> [f64; 2] {
        [-self.sin, self.cos]
    }

    /// `x · ϑ`.
    #[inline]
    pub fn project(&self, x: f64, y: f64) -> f64 {
        x * self.cos + y * self.sin
    }

    /// `x · ϑ^⊥`.
    #[inline]
    pub fn project_perp(&self, x: f64, y: f64) -> f64 {
        y * self.cos - x * self.sin
    }
}

/// Returns `(ϑ(φ), ϑ(φ)^⊥)`.
pub fn angle_to_direction(phi: f64) -> ([f64; 2], [f64; 2]) {
    let d = Direction::new(phi);
    (d.theta(), d.theta_perp())
}

/// Flat-detector fanbeam arrangement: point source at distance `R_E` from the
/// origin, detector line at distance `R` from the source, detector width
/// `W = 2R/√(R_E² − 1)` so that every ray through the unit ball is recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanGeometry {
    source_radius: f64,
    source_detector: f64,
    detector: DetectorGrid,
}

impl FanGeometry {
    pub fn new(source_radius: f64, source_detector: f64, count: usize) -> Result<Self> {
        if !(source_radius.is_finite() && source_radius > 1.0) {
            return Err(Error::Geometry(format!(
                "source radius R_E must exceed 1, got {source_radius}"
            )));
        }
        if !(source_detector.is_finite() && source_detector > source_radius + 1.0) {
            return Err(Error::Geometry(format!(
                "source-detector distance R must exceed R_E + 1 = {}, got {source_detector}",
                source_radius + 1.0
            )));
        }
        let width = 2.0 * source_detector / (source_radius * source_radius - 1.0).sqrt();
        let detector = DetectorGrid::new(count, width)?;
        Ok(Self {
            source_radius,
            source_detector,
            detector,
        })
    }

    /// `R_E`.
    pub fn source_radius(&self) -> f64 {
        self.source_radius
    }

    /// `R`.
    pub fn source_detector(&self) -> f64 {
        self.source_detector
    }

    /// `W`.
    pub fn width(&self) -> f64 {
        self.detector.width()
    }

    pub fn detector(&self) -> &DetectorGrid {
        &self.detector
    }

    /// Largest admissible pixel size, `√2 (R_E − 1)`.
    pub fn max_pixel_size(&self) -> f64 {
        std::f64::consts::SQRT_2 * (self.source_radius - 1.0)
    }

    /// Whether a pixel centered at `(x, y)` lies strictly inside the source ball.
    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x * x + y * y < self.source_radius * self.source_radius
    }
}
