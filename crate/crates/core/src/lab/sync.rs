use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_equal_means, pair_l1_series};
use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::forcing::{forcing_budget, make_stochastic_forcing, StochasticSpec};
use crate::grid::{Field, NormKind};
use crate::linear::{l1_series_check, L1_TOLERANCE};
use crate::solver::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncOptions {
    /// Scan spacing for the forcing budget and the event search.
    #[serde(default = "default_scan")]
    pub dt_scan: f64,
    /// `q_k` is left undefined when `|w(t_k + 1)|_1` is below this fraction
    /// of `|w0|_1`.
    #[serde(default = "default_floor")]
    pub relative_floor: f64,
}

fn default_scan() -> f64 {
    0.01
}
fn default_floor() -> f64 {
    1e-12
}

impl Default for SyncOptions {
    fn default() -> Self {
        Self {
            dt_scan: default_scan(),
            relative_floor: default_floor(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyncReport {
    pub seed: u64,
    pub t_end: f64,
    pub k_estimate: f64,
    /// Event condition: `sup_{[t, t + 2]} ||h||_{H2} <= 2 K + 1`.
    pub threshold: f64,
    pub event_times: Vec<f64>,
    /// `|w(t_k + 2)|_1 / |w(t_k + 1)|_1` per event.
    pub q_factors: Vec<Option<f64>>,
    /// `|u(T_end) - v(T_end)|_1 / |u0 - v0|_1`; zero when `u0 = v0`.
    pub final_ratio: f64,
    pub zero_difference: bool,
    pub l1_worst_increase: f64,
    pub nonincreasing: bool,
    /// Running average of the windowed forcing supremum, one point per time unit.
    pub k_running_average: Vec<(f64, f64)>,
    pub l1_series: Vec<(f64, f64)>,
}

/// Runs `u` and `v` under one stochastic forcing path and tracks `|u - v|_1`.
#[allow(clippy::too_many_arguments)]
pub fn stochastic_sync_experiment(
    u0: &Field,
    v0: &Field,
    spec: &StochasticSpec,
    seed: u64,
    cfg: &SolverConfig,
    flux: &FluxModel,
    t_end: f64,
    opts: &SyncOptions,
) -> Result<SyncReport> {
    if !(flux.sigma_floor() > 0.0) {
        return Err(LabError::ConvexityRequired(flux.sigma_floor()));
    }
    check_equal_means(u0, v0, 1e-12)?;
    let grid = cfg.validate()?;
    let forcing = make_stochastic_forcing(&spec.clone().with_horizon(t_end), seed)?;
    let budget = forcing_budget(&forcing, &grid, t_end, opts.dt_scan)?;
    let threshold = 2.0 * budget.k_estimate + 1.0;

    let mut event_times = Vec::new();
    let mut t = 0.0;
    while t + 2.0 <= t_end + 1e-9 {
        if budget.sup_over(t, t + 2.0) <= threshold {
            event_times.push(t);
            t += 2.0;
        } else {
            t += opts.dt_scan;
        }
    }

    let l1_series = pair_l1_series(u0, v0, &forcing, flux, cfg, 0.0, t_end)?;
    let w0 = (u0 - v0).norm(NormKind::L1);
    let at = |s: f64| -> f64 {
        let i = l1_series.partition_point(|p| p.0 < s - 1e-9).min(l1_series.len() - 1);
        l1_series[i].1
    };
    let floor = opts.relative_floor * w0;
    let q_factors = event_times
        .iter()
        .map(|&tk| {
            let den = at(tk + 1.0);
            (w0 > 0.0 && den > floor).then(|| at(tk + 2.0) / den)
        })
        .collect();
    let last = l1_series.last().expect("nonempty").1;
    let check = l1_series_check(&l1_series, L1_TOLERANCE);
    let per_unit = (1.0 / opts.dt_scan).round() as usize;
    let k_running_average = budget
        .running_average
        .iter()
        .enumerate()
        .filter(|(i, _)| (i + 1) % per_unit == 0)
        .map(|(i, v)| ((i + 1) as f64 * opts.dt_scan, *v))
        .collect();
    Ok(SyncReport {
        seed,
        t_end,
        k_estimate: budget.k_estimate,
        threshold,
        event_times,
        q_factors,
        final_ratio: if w0 > 0.0 { last / w0 } else { 0.0 },
        zero_difference: w0 == 0.0,
        l1_worst_increase: check.worst_violation,
        nonincreasing: check.holds,
        k_running_average,
        l1_series,
    })
}

/// [`stochastic_sync_experiment`] for several seeds in parallel.
#[allow(clippy::too_many_arguments)]
pub fn sync_ensemble(
    u0: &Field,
    v0: &Field,
    spec: &StochasticSpec,
    seeds: &[u64],
    cfg: &SolverConfig,
    flux: &FluxModel,
    t_end: f64,
    opts: &SyncOptions,
) -> Result<Vec<SyncReport>> {
    seeds
        .par_iter()
        .map(|&seed| stochastic_sync_experiment(u0, v0, spec, seed, cfg, flux, t_end, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::grid::PeriodicGrid;

    #[test]
    fn identical_data_never_separate() {
        let g = PeriodicGrid::new(32).unwrap();
        let cfg = SolverConfig::new(0.1, 32, 1e-2);
        let u0 = Field::sample(&g, |x| (2.0 * PI * x).sin()).unwrap();
        let spec = StochasticSpec::new(4, 3.0, 1.0);
        let r = stochastic_sync_experiment(&u0, &u0, &spec, 1, &cfg, &FluxModel::quadratic(), 4.0, &Default::default())
            .unwrap();
        assert!(r.zero_difference);
        assert!(r.l1_series.iter().all(|p| p.1 == 0.0));
        assert!(r.q_factors.iter().all(Option::is_none));
    }

    #[test]
    fn convexity_is_required() {
        let g = PeriodicGrid::new(32).unwrap();
        let cfg = SolverConfig::new(0.1, 32, 1e-2);
        let u0 = Field::sample(&g, |x| (2.0 * PI * x).sin()).unwrap();
        let spec = StochasticSpec::new(4, 3.0, 1.0);
        let flux = FluxModel::linear(1.0).unwrap();
        let err = stochastic_sync_experiment(&u0, &Field::zeros(&g), &spec, 1, &cfg, &flux, 4.0, &Default::default());
        assert!(matches!(err, Err(LabError::ConvexityRequired(_))));
    }
}
