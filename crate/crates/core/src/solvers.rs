//! Landweber iteration `f_{k+1} = f_k − ω B(F f_k − g)`.

use crate::analysis::{estimate_operator_norm, sino_norm};
use crate::data::{Image, Sinogram};
use crate::error::{Error, Result};
use crate::projector::ProjectorPair;

/// Residual history of a Landweber run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandweberTrace {
    /// `(k, f_k)` for the kept iterates.
    pub snapshots: Vec<(usize, Image)>,
    /// `‖F f_k − g‖_V` for `k = 0..=iterations`.
    pub residual_norms: Vec<f64>,
    pub omega: f64,
    pub iterations: usize,
}

/// Run parameters besides the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandweberOptions {
    pub omega: f64,
    pub iterations: usize,
    /// Keep every `n`-th iterate (and the last one) in the trace.
    pub snapshot_every: Option<usize>,
}

impl LandweberOptions {
    pub fn new(omega: f64, iterations: usize) -> Self {
        Self {
            omega,
            iterations,
            snapshot_every: None,
        }
    }
}

/// `0.9/σ²` with `σ` estimated by 50 power iterations.
pub fn default_step_size<P: ProjectorPair + ?Sized>(pair: &P, seed: u64) -> Result<f64> {
    let sigma = estimate_operator_norm(pair, 50, seed)?;
    if sigma <= 0.0 {
        return Err(Error::Argument("operator norm estimate is zero".into()));
    }
    Ok(0.9 / (sigma * sigma))
}

/// Runs `options.iterations` Landweber steps from `initial` (zero if `None`).
///
/// A non-finite residual aborts with [`Error::Diverged`] carrying the trace so far.
pub fn landweber<P: ProjectorPair + ?Sized>(
    pair: &P,
    data: &Sinogram,
    options: &LandweberOptions,
    initial: Option<&Image>,
) -> Result<(Image, LandweberTrace)> {
    if !(options.omega.is_finite() && options.omega > 0.0) {
        return Err(Error::Argument(format!("step size must be positive, got {}", options.omega)));
    }
    if options.snapshot_every == Some(0) {
        return Err(Error::Argument("snapshot interval must be positive".into()));
    }
    pair.check_sinogram(data)?;
    let mut f = match initial {
        Some(image) => {
            pair.check_image(image)?;
            image.clone()
        }
        None => pair.empty_image(),
    };

    let mut trace = LandweberTrace {
        omega: options.omega,
        iterations: options.iterations,
        residual_norms: Vec::with_capacity(options.iterations + 1),
        snapshots: Vec::new(),
    };
    for k in 0..=options.iterations {
        let blown_up = f.values().iter().any(|v| !v.is_finite());
        let residual = if blown_up {
            None
        } else {
            let mut residual = pair.forward(&f)?;
            residual.axpy(-1.0, data)?;
            Some(residual)
        };
        let norm = residual.as_ref().map_or(f64::NAN, sino_norm);
        let Some(residual) = residual.filter(|_| norm.is_finite()) else {
            return Err(Error::Diverged {
                iteration: k,
                trace: Box::new(trace),
            });
        };
        trace.residual_norms.push(norm);
        if let Some(every) = options.snapshot_every {
            if k % every == 0 || k == options.iterations {
                trace.snapshots.push((k, f.clone()));
            }
        }
        if k == options.iterations {
            break;
        }
        f.axpy(-options.omega, &pair.backward(&residual)?)?;
    }
    Ok((f, trace))
}
