//! Value arrays that carry their discretization.

use crate::error::{Error, Result};
use crate::geometry::{AngleSet, DetectorGrid, FanGeometry, ImageGrid};

/// Pixel values `f_ij`, stored with `i` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    grid: ImageGrid,
    values: Vec<f64>,
}

impl Image {
    pub fn zeros(grid: ImageGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: ImageGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} values for a {}x{} image",
                values.len(),
                grid.n(),
                grid.m()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("image values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: ImageGrid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.m() {
            for i in 0..grid.n() {
                values.push(f(i, j));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.grid.index(i, j);
        self.values[k] = value;
    }

    /// Row `j` as a slice over `i`.
    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.grid.n();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn check_grid(&self, grid: &ImageGrid) -> Result<()> {
        if &self.grid != grid {
            return Err(Error::Dimension(format!(
                "image grid {}x{} (δx={}) does not match {}x{} (δx={})",
                self.grid.n(),
                self.grid.m(),
                self.grid.delta_x(),
                grid.n(),
                grid.m(),
                grid.delta_x()
            )));
        }
        Ok(())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Image) -> Result<()> {
        other.check_grid(&self.grid)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }
}

/// Projection values `g_pq`, stored with the detector index `p` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    detector: DetectorGrid,
    angles: AngleSet,
    fan: Option<FanGeometry>,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(detector: DetectorGrid, angles: AngleSet) -> Self {
        let len = detector.count() * angles.len();
        Self {
            detector,
            angles,
            fan: None,
            values: vec![0.0; len],
        }
    }

    /// Empty sinogram on the detector of a fanbeam geometry.
    pub fn fan_zeros(geometry: FanGeometry, angles: AngleSet) -> Self {
        let mut sino = Self::zeros(*geometry.detector(), angles);
        sino.fan = Some(geometry);
        sino
    }

    pub fn from_values(detector: DetectorGrid, angles: AngleSet, values: Vec<f64>) -> Result<Self> {
        let mut sino = Self::zeros(detector, angles);
        sino.set_values(values)?;
        Ok(sino)
    }

    pub fn fan_from_values(geometry: FanGeometry, angles: AngleSet, values: Vec<f64>) -> Result<Self> {
        let mut sino = Self::fan_zeros(geometry, angles);
        sino.set_values(values)?;
        Ok(sino)
    }

    fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::Dimension(format!(
                "{} values for a {}x{} sinogram",
                values.len(),
                self.detector.count(),
                self.angles.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("sinogram values must be finite".into()));
        }
        self.values = values;
        Ok(())
    }

    pub fn detector(&self) -> &DetectorGrid {
        &self.detector
    }

    pub fn angles(&self) -> &AngleSet {
        &self.angles
    }

    pub fn fan(&self) -> Option<&FanGeometry> {
        self.fan.as_ref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[q * self.detector.count() + p]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, value: f64) {
        let k = q * self.detector.count() + p;
        self.values[k] = value;
    }

    /// Projection at angle index `q`.
    pub fn projection(&self, q: usize) -> &[f64] {
        let p = self.detector.count();
        &self.values[q * p..(q + 1) * p]
    }

    /// Whether `other` lives on the same detector and angle set.
    pub fn same_layout(&self, other: &Sinogram) -> bool {
        self.detector == other.detector && self.angles == other.angles
    }

    pub fn check_layout(&self, other: &Sinogram) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::Dimension(format!(
                "sinogram layouts differ: {}x{} vs {}x{}",
                self.detector.count(),
                self.angles.len(),
                other.detector.count(),
                other.angles.len()
            )));
        }
        Ok(())
    }

    /// Copy with the same layout and all values zero.
    pub fn zeros_like(&self) -> Self {
        Self {
            detector: self.detector,
            angles: self.angles.clone(),
            fan: self.fan,
            values: vec![0.0; self.values.len()],
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Sinogram) -> Result<()> {
        self.check_layout(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }
}
