use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decay::{decay_rate_fit, DecayFit, FitWindow};
use super::pair_difference_series;
use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::forcing::ForcingModel;
use crate::grid::{Field, NormKind};
use crate::solver::{solve_recording, BurgersStepper, SolverConfig, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PullbackOptions {
    pub n_max: usize,
    pub t_view: f64,
    /// Gaps `g_n` with `fit_from <= n <= fit_to` enter the geometric fit.
    #[serde(default = "two")]
    pub fit_from: usize,
    #[serde(default)]
    pub fit_to: Option<usize>,
    #[serde(default = "default_floor")]
    pub noise_floor: f64,
}

fn two() -> usize {
    2
}
fn default_floor() -> f64 {
    1e-13
}

impl PullbackOptions {
    pub fn new(n_max: usize, t_view: f64) -> Self {
        Self {
            n_max,
            t_view,
            fit_from: 2,
            fit_to: None,
            noise_floor: default_floor(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PullbackReport {
    pub c: f64,
    pub n_max: usize,
    pub t_view: f64,
    /// `(n, g_n)` with `g_n = sup_{|t| <= T_view} ||u^n(t) - u^{n+1}(t)||_{H1}`.
    pub gaps: Vec<(usize, f64)>,
    /// `g_{n+1} / g_n`, absent when `g_n` is at the noise floor.
    pub ratios: Vec<(usize, Option<f64>)>,
    /// Geometric fit of the gaps against `n`; `gamma` is the log-rate.
    pub gap_fit: Option<DecayFit>,
    pub fit_note: Option<String>,
    /// Largest ratio inside the fit range.
    pub max_ratio: Option<f64>,
    /// `sup_{|t| <= T_view} ||v_t||_{H2}` along the deepest solution.
    pub steady_residual_h2: f64,
    #[serde(skip)]
    pub v_traj: Trajectory,
}

/// Solves from `u^n(-n) = c` for `n = 1..=n_max` and measures how fast the
/// solutions approach each other on `[-T_view, T_view]`.
pub fn pullback_bounded_solution(
    c: f64,
    forcing: &ForcingModel,
    flux: &FluxModel,
    cfg: &SolverConfig,
    opts: &PullbackOptions,
) -> Result<PullbackReport> {
    if opts.n_max < 3 {
        return Err(LabError::Precondition(format!("n_max must be >= 3, got {}", opts.n_max)));
    }
    if !(opts.t_view > 0.0 && opts.t_view.is_finite()) {
        return Err(LabError::Precondition(format!("T_view must be positive, got {}", opts.t_view)));
    }
    let (start, end) = forcing.domain();
    if start > -(opts.n_max as f64) || end < opts.t_view {
        return Err(LabError::Precondition(format!(
            "forcing window too short: need [{}, {}], forcing covers [{start}, {end}]",
            -(opts.n_max as f64),
            opts.t_view
        )));
    }
    let grid = cfg.validate()?;
    let cfg = cfg.clone().with_stride(1);
    let u0 = Field::constant(&grid, c);
    let runs = (1..=opts.n_max)
        .into_par_iter()
        .map(|n| solve_recording(&u0, forcing, flux, &cfg, -(n as f64), opts.t_view, -opts.t_view))
        .collect::<Result<Vec<_>>>()?;

    let gaps: Vec<(usize, f64)> = (1..opts.n_max)
        .map(|n| (n, sup_gap(&runs[n - 1], &runs[n], cfg.dt)))
        .collect();
    let ratios: Vec<(usize, Option<f64>)> = gaps
        .windows(2)
        .map(|w| (w[0].0, (w[0].1 > opts.noise_floor).then(|| w[1].1 / w[0].1)))
        .collect();
    let fit_to = opts.fit_to.unwrap_or(opts.n_max - 1);
    let in_range = |n: usize| n >= opts.fit_from && n <= fit_to;
    let series: Vec<(f64, f64)> = gaps.iter().filter(|(n, _)| in_range(*n)).map(|&(n, g)| (n as f64, g)).collect();
    let window = FitWindow::new(opts.fit_from as f64, fit_to as f64).with_floor(opts.noise_floor);
    let (gap_fit, fit_note) = match decay_rate_fit(&series, window) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let max_ratio = ratios
        .iter()
        .filter(|(n, _)| in_range(*n) && in_range(n + 1))
        .filter_map(|(_, r)| *r)
        .reduce(f64::max);

    let v_traj = runs.into_iter().last().expect("n_max >= 3");
    let mut steady_residual_h2: f64 = 0.0;
    for (t, s) in v_traj.snapshot_times().iter().zip(v_traj.snapshots()) {
        let mut probe = BurgersStepper::new(s, forcing, flux, &cfg, *t)?;
        steady_residual_h2 = steady_residual_h2.max(probe.time_derivative()?.norm(NormKind::H2));
    }
    Ok(PullbackReport {
        c,
        n_max: opts.n_max,
        t_view: opts.t_view,
        gaps,
        ratios,
        gap_fit,
        fit_note,
        max_ratio,
        steady_residual_h2,
        v_traj,
    })
}

/// `sup_t ||a(t) - b(t)||_{H1}` over snapshot times present in both runs.
fn sup_gap(a: &Trajectory, b: &Trajectory, dt: f64) -> f64 {
    let mut sup: f64 = 0.0;
    for (t, s) in a.snapshot_times().iter().zip(a.snapshots()) {
        if let Some((tb, sb)) = b.snapshot_near(*t) {
            if (tb - t).abs() <= 1e-6 * dt {
                sup = sup.max((s - sb).norm(NormKind::H1));
            }
        }
    }
    sup
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    /// `||p||_{H1}`.
    pub size_h1: f64,
    /// Set for `p = 0`; no fit is attempted.
    pub zero_difference: bool,
    pub fit: Option<DecayFit>,
    /// `(t - t0, ||u(t) - v(t)||_{H1})`.
    #[serde(skip)]
    pub series: Vec<(f64, f64)>,
}

/// Perturbs `v` at the snapshot nearest `t = 0` by each `p` and fits the
/// decay of `||u - v||_{H1}` over `window` (times relative to that snapshot).
pub fn uniqueness_probe(
    v_traj: &Trajectory,
    perturbations: &[Field],
    cfg: &SolverConfig,
    flux: &FluxModel,
    forcing: &ForcingModel,
    horizon: f64,
    window: FitWindow,
) -> Result<Vec<ProbeResult>> {
    for p in perturbations {
        let mean = p.mean();
        if mean.abs() > 1e-12 * p.norm(NormKind::Linf).max(1.0) {
            return Err(LabError::NonzeroMean(mean));
        }
    }
    let (t0, v0) = v_traj
        .snapshot_near(0.0)
        .ok_or_else(|| LabError::Precondition("trajectory has no snapshots".into()))?;
    perturbations
        .par_iter()
        .map(|p| {
            if p.is_zero() {
                return Ok(ProbeResult {
                    size_h1: 0.0,
                    zero_difference: true,
                    fit: None,
                    series: Vec::new(),
                });
            }
            let u0 = v0 + p;
            let series: Vec<(f64, f64)> = pair_difference_series(&u0, v0, forcing, flux, cfg, t0, t0 + horizon, NormKind::H1)?
                .into_iter()
                .map(|(t, d)| (t - t0, d))
                .collect();
            Ok(ProbeResult {
                size_h1: p.norm(NormKind::H1),
                zero_difference: false,
                fit: Some(decay_rate_fit(&series, window)?),
                series,
            })
        })
        .collect()
}
