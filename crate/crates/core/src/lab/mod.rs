//! Experiments: strict `L^1` contraction, exponential convergence to the
//! bounded trajectory, and synchronization under random forcing.

pub mod attractor;
pub mod contraction;
pub mod decay;
pub mod sync;

pub use attractor::{pullback_bounded_solution, uniqueness_probe, ProbeResult, PullbackOptions, PullbackReport};
pub use contraction::{contraction_experiment, mean_shift_check, Branch, ContractionOptions, ContractionReport, MeanShiftReport};
pub use decay::{decay_rate_fit, interpolation_check, DecayFit, FitWindow, InterpolationCheck};
pub use sync::{stochastic_sync_experiment, sync_ensemble, SyncOptions, SyncReport};

use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::forcing::ForcingModel;
use crate::grid::{Field, NormKind};
use crate::solver::{base_times, check_window, BurgersStepper, SolverConfig};

pub(crate) fn check_equal_means(u0: &Field, v0: &Field, tol: f64) -> Result<()> {
    u0.same_grid(v0)?;
    let (a, b) = (u0.mean(), v0.mean());
    if (a - b).abs() > tol {
        return Err(LabError::MeanMismatch { left: a, right: b });
    }
    Ok(())
}

/// `(t, |u(t) - v(t)|)` in the chosen norm at every base time, with the two
/// solutions advanced in lockstep.
pub fn pair_difference_series(
    u0: &Field,
    v0: &Field,
    forcing: &ForcingModel,
    flux: &FluxModel,
    cfg: &SolverConfig,
    t0: f64,
    t_end: f64,
    kind: NormKind,
) -> Result<Vec<(f64, f64)>> {
    check_window(t0, t_end)?;
    let mut u = BurgersStepper::new(u0, forcing, flux, cfg, t0)?;
    let mut v = BurgersStepper::new(v0, forcing, flux, cfg, t0)?;
    base_times(t0, t_end, cfg.dt)
        .into_iter()
        .map(|t| {
            u.advance_to(t)?;
            v.advance_to(t)?;
            Ok((t, (&u.state() - &v.state()).norm(kind)))
        })
        .collect()
}

pub fn pair_l1_series(
    u0: &Field,
    v0: &Field,
    forcing: &ForcingModel,
    flux: &FluxModel,
    cfg: &SolverConfig,
    t0: f64,
    t_end: f64,
) -> Result<Vec<(f64, f64)>> {
    pair_difference_series(u0, v0, forcing, flux, cfg, t0, t_end, NormKind::L1)
}
