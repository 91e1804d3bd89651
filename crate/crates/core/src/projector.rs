//! Forward/backward operator pairs on fixed grids, the common currency of the
//! analysis tools and the Landweber solver.

use crate::baseline_ray::joseph_forward;
use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::fanbeam_pixel::{fan_backproject, fan_forward};
use crate::geometry::{AngleSet, DetectorGrid, FanGeometry, ImageGrid};
use crate::radon_pixel::{radon_backproject, radon_forward};

/// A linear map from images to sinograms together with a map back.
///
/// The backward map is meant to be the adjoint under the weighted inner
/// products, but nothing enforces it; [`crate::analysis::adjointness_gap`]
/// measures how far off it is.
pub trait ProjectorPair: Sync {
    fn image_grid(&self) -> &ImageGrid;

    /// Zero sinogram in the range layout.
    fn empty_sinogram(&self) -> Sinogram;

    fn forward(&self, image: &Image) -> Result<Sinogram>;

    fn backward(&self, sino: &Sinogram) -> Result<Image>;

    fn empty_image(&self) -> Image {
        Image::zeros(*self.image_grid())
    }

    /// Whether pixel `(i, j)` may carry a nonzero value.
    fn supports_pixel(&self, _i: usize, _j: usize) -> bool {
        true
    }

    fn check_image(&self, image: &Image) -> Result<()> {
        image.check_grid(self.image_grid())
    }

    fn check_sinogram(&self, sino: &Sinogram) -> Result<()> {
        let expected = self.empty_sinogram();
        if !expected.same_layout(sino) || expected.fan() != sino.fan() {
            return Err(Error::Dimension(format!(
                "sinogram {}x{} does not match the operator range {}x{}",
                sino.detector().count(),
                sino.angles().len(),
                expected.detector().count(),
                expected.angles().len()
            )));
        }
        Ok(())
    }
}

/// Pixel-driven parallel-beam transform with its adjoint (PD/PD*).
#[derive(Debug, Clone)]
pub struct ParallelPair {
    pub grid: ImageGrid,
    pub detector: DetectorGrid,
    pub angles: AngleSet,
}

impl ParallelPair {
    pub fn new(grid: ImageGrid, detector: DetectorGrid, angles: AngleSet) -> Self {
        Self { grid, detector, angles }
    }
}

impl ProjectorPair for ParallelPair {
    fn image_grid(&self) -> &ImageGrid {
        &self.grid
    }

    fn empty_sinogram(&self) -> Sinogram {
        Sinogram::zeros(self.detector, self.angles.clone())
    }

    fn forward(&self, image: &Image) -> Result<Sinogram> {
        self.check_image(image)?;
        radon_forward(image, &self.detector, &self.angles)
    }

    fn backward(&self, sino: &Sinogram) -> Result<Image> {
        self.check_sinogram(sino)?;
        radon_backproject(sino, &self.grid)
    }
}

/// Pixel-driven fanbeam transform with its adjoint.
#[derive(Debug, Clone)]
pub struct FanPair {
    pub grid: ImageGrid,
    pub geometry: FanGeometry,
    pub angles: AngleSet,
}

impl FanPair {
    pub fn new(grid: ImageGrid, geometry: FanGeometry, angles: AngleSet) -> Self {
        Self { grid, geometry, angles }
    }
}

impl ProjectorPair for FanPair {
    fn image_grid(&self) -> &ImageGrid {
        &self.grid
    }

    fn empty_sinogram(&self) -> Sinogram {
        Sinogram::fan_zeros(self.geometry, self.angles.clone())
    }

    fn forward(&self, image: &Image) -> Result<Sinogram> {
        self.check_image(image)?;
        fan_forward(image, &self.geometry, &self.angles)
    }

    fn backward(&self, sino: &Sinogram) -> Result<Image> {
        self.check_sinogram(sino)?;
        fan_backproject(sino, &self.geometry, &self.grid)
    }

    fn supports_pixel(&self, i: usize, j: usize) -> bool {
        self.geometry.contains(self.grid.x(i), self.grid.y(j))
    }
}

/// Joseph ray-driven forward with the pixel-driven backprojection (JO/PD*),
/// deliberately not adjoint.
#[derive(Debug, Clone)]
pub struct JosephPair {
    pub grid: ImageGrid,
    pub detector: DetectorGrid,
    pub angles: AngleSet,
}

impl JosephPair {
    pub fn new(grid: ImageGrid, detector: DetectorGrid, angles: AngleSet) -> Self {
        Self { grid, detector, angles }
    }
}

impl ProjectorPair for JosephPair {
    fn image_grid(&self) -> &ImageGrid {
        &self.grid
    }

    fn empty_sinogram(&self) -> Sinogram {
        Sinogram::zeros(self.detector, self.angles.clone())
    }

    fn forward(&self, image: &Image) -> Result<Sinogram> {
        self.check_image(image)?;
        joseph_forward(image, &self.detector, &self.angles)
    }

    fn backward(&self, sino: &Sinogram) -> Result<Image> {
        self.check_sinogram(sino)?;
        radon_backproject(sino, &self.grid)
    }
}
