use std::path::PathBuf;

use thiserror::Error;

use crate::solvers::LandweberTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid angle set: {0}")]
    Angles(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A nonzero pixel whose center lies outside the source ball of a fanbeam geometry.
    #[error("pixel ({i}, {j}) at distance {distance} from the origin is outside the source radius {source_radius}")]
    FanSupport {
        i: usize,
        j: usize,
        distance: f64,
        source_radius: f64,
    },

    #[error("predicted cost {cost:.3e} exceeds the configured budget {budget:.3e}")]
    Budget { cost: f64, budget: f64 },

    #[error("Landweber iteration diverged at step {iteration}")]
    Diverged {
        iteration: usize,
        trace: Box<LandweberTrace>,
    },

    #[error("data file {path} has {actual} bytes, expected {expected}")]
    Length {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("malformed sidecar {path}: {reason}")]
    Sidecar { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
