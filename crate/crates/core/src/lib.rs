//! Pixel-driven Radon and fanbeam projectors with exactly adjoint
//! backprojections, plus the tooling to check and use them: phantoms, a
//! ray-driven baseline, convergence studies, Landweber iteration and file I/O.
//!
//! ```
//! use pixelproj::{AngleSet, DetectorGrid, ImageGrid, ParallelPair, ProjectorPair};
//! use pixelproj::analysis::adjointness_gap;
//!
//! let pair = ParallelPair::new(
//!     ImageGrid::square(32, 2.0).unwrap(),
//!     DetectorGrid::unit(40).unwrap(),
//!     AngleSet::half_turn(16).unwrap(),
//! );
//! let gap = adjointness_gap(&pair, 3, 7).unwrap();
//! assert!(gap < 1e-12);
//! ```

pub mod analysis;
pub mod baseline_ray;
pub mod data;
pub mod error;
pub mod fanbeam_pixel;
pub mod geometry;
pub mod io_formats;
pub mod phantoms;
pub mod projector;
pub mod radon_pixel;
pub mod solvers;

pub use data::{Image, Sinogram};
pub use error::{Error, Result};
pub use geometry::{AngleKind, AngleSet, DetectorGrid, Direction, FanGeometry, ImageGrid};
pub use projector::{FanPair, JosephPair, ParallelPair, ProjectorPair};
