use serde::{Deserialize, Serialize};

use super::{check_equal_means, pair_l1_series};
use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::forcing::ForcingModel;
use crate::grid::{Field, NormKind};
use crate::linear::{l1_series_check, CoefficientPath, LinearStepper, L1_TOLERANCE};
use crate::solver::{base_times, solve, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionOptions {
    /// The case split compares `max w+(T/2)` with this fraction of `|w0|_1`.
    #[serde(default = "quarter")]
    pub threshold_fraction: f64,
    /// Time of the case split as a fraction of `T`.
    #[serde(default = "half")]
    pub midpoint_fraction: f64,
    #[serde(default)]
    pub quad_points: Option<usize>,
}

fn quarter() -> f64 {
    0.25
}
fn half() -> f64 {
    0.5
}

impl Default for ContractionOptions {
    fn default() -> Self {
        Self {
            threshold_fraction: quarter(),
            midpoint_fraction: half(),
            quad_points: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    SmallPlusPart,
    SmallMinusPart,
    HarnackBranch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitSample {
    pub t: f64,
    pub plus_l1: f64,
    pub minus_l1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionReport {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub w0_l1: f64,
    /// `|u(T) - v(T)|_1 / |u0 - v0|_1`.
    pub q_observed: f64,
    /// Minimum over both parts of `min w(T) / max w(T/2)`.
    pub theta_observed: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub branch: Branch,
    pub max_plus_at_mid: f64,
    pub max_minus_at_mid: f64,
    pub threshold: f64,
    /// `max(1/2, 1 - theta/2)`.
    pub q_bound_from_theta: f64,
    /// The bound that applies on the active branch.
    pub q_bound: f64,
    pub certificate_holds: bool,
    /// `max_t | |w+(t)|_1 - |w-(t)|_1 |`.
    pub balance_error: f64,
    /// `max_t |(w+ - w-) - w|_inf`, all three from the linear solver.
    pub split_error: f64,
    /// `max_t |w - (u - v)|_inf`, linear solution against nonlinear difference.
    pub consistency_error: f64,
    pub split_consistent: bool,
    /// Largest increase of `|u - v|_1` over its running minimum.
    pub l1_worst_increase: f64,
    pub nonexpansive: bool,
    pub split_series: Vec<SplitSample>,
    pub l1_series: Vec<(f64, f64)>,
}

/// Runs the proof of strict `L^1` contraction on a concrete pair: the two
/// nonlinear solutions, the averaged coefficient `a(t, x)`, the linear
/// evolution of `w0+` and `w0-`, and the case split at the midpoint.
pub fn contraction_experiment(
    u0: &Field,
    v0: &Field,
    forcing: &ForcingModel,
    flux: &FluxModel,
    cfg: &SolverConfig,
    t_end: f64,
    opts: &ContractionOptions,
) -> Result<ContractionReport> {
    check_equal_means(u0, v0, 1e-12)?;
    let w0 = u0 - v0;
    if w0.is_zero() {
        return Err(LabError::ZeroDifference);
    }
    if !(opts.midpoint_fraction > 0.0 && opts.midpoint_fraction < 1.0) {
        return Err(LabError::Precondition("midpoint fraction must lie in (0, 1)".into()));
    }
    let nonlinear = cfg.clone().with_stride(1);
    let u = solve(u0, forcing, flux, &nonlinear, 0.0, t_end)?;
    let v = solve(v0, forcing, flux, &nonlinear, 0.0, t_end)?;
    let coeff = CoefficientPath::from_pair(flux, &u, &v, opts.quad_points)?;

    // Twice the nonlinear step puts every RK3 stage on a stored coefficient.
    let mut linear = cfg.clone().with_dt(2.0 * cfg.dt);
    linear.positivity_safe = false;
    let (w0p, w0m) = w0.pos_neg_split();
    let mut whole = LinearStepper::new(&w0, &coeff, &linear, 0.0)?;
    let mut plus = LinearStepper::new(&w0p, &coeff, &linear, 0.0)?;
    let mut minus = LinearStepper::new(&w0m, &coeff, &linear, 0.0)?;

    let t_mid = opts.midpoint_fraction * t_end;
    let mut times = base_times(0.0, t_end, linear.dt);
    if !times.iter().any(|&t| (t - t_mid).abs() <= 1e-12) {
        times.push(t_mid);
        times.sort_by(f64::total_cmp);
    }
    let mut split_series = Vec::with_capacity(times.len());
    let (mut split_error, mut consistency_error, mut balance_error) = (0.0f64, 0.0f64, 0.0f64);
    let (mut max_plus_at_mid, mut max_minus_at_mid) = (f64::NAN, f64::NAN);
    for &t in &times {
        whole.advance_to(t)?;
        plus.advance_to(t)?;
        minus.advance_to(t)?;
        let (w, wp, wm) = (whole.state(), plus.state(), minus.state());
        split_error = split_error.max((&wp - &wm).sup_distance(&w));
        if let (Some((tu, us)), Some((tv, vs))) = (u.snapshot_near(t), v.snapshot_near(t)) {
            if (tu - t).abs() <= 1e-9 && (tv - t).abs() <= 1e-9 {
                consistency_error = consistency_error.max((us - vs).sup_distance(&w));
            }
        }
        let (pl, ml) = (wp.norm(NormKind::L1), wm.norm(NormKind::L1));
        balance_error = balance_error.max((pl - ml).abs());
        split_series.push(SplitSample {
            t,
            plus_l1: pl,
            minus_l1: ml,
        });
        if (t - t_mid).abs() <= 1e-12 {
            max_plus_at_mid = wp.max();
            max_minus_at_mid = wm.max();
        }
    }
    let (wp_end, wm_end) = (plus.state(), minus.state());
    let theta_plus = wp_end.min() / max_plus_at_mid;
    let theta_minus = wm_end.min() / max_minus_at_mid;
    let theta_observed = theta_plus.min(theta_minus);

    let w0_l1 = w0.norm(NormKind::L1);
    let threshold = opts.threshold_fraction * w0_l1;
    let branch = if max_plus_at_mid <= threshold {
        Branch::SmallPlusPart
    } else if max_minus_at_mid <= threshold {
        Branch::SmallMinusPart
    } else {
        Branch::HarnackBranch
    };
    let w_end = u.final_state().expect("nonempty") - v.final_state().expect("nonempty");
    let q_observed = w_end.norm(NormKind::L1) / w0_l1;
    let q_bound_from_theta = 0.5f64.max(1.0 - 0.5 * theta_observed);
    let q_bound = if branch == Branch::HarnackBranch { q_bound_from_theta } else { 0.5 };

    let l1_series: Vec<(f64, f64)> = u
        .snapshots()
        .iter()
        .zip(v.snapshots())
        .zip(u.snapshot_times())
        .map(|((a, b), t)| (*t, (a - b).norm(NormKind::L1)))
        .collect();
    let l1 = l1_series_check(&l1_series, L1_TOLERANCE);
    Ok(ContractionReport {
        t_end,
        w0_l1,
        q_observed,
        theta_observed,
        theta_plus,
        theta_minus,
        branch,
        max_plus_at_mid,
        max_minus_at_mid,
        threshold,
        q_bound_from_theta,
        q_bound,
        certificate_holds: q_observed <= q_bound + 1e-6,
        balance_error,
        split_error,
        consistency_error,
        split_consistent: split_error < 1e-6 && consistency_error < 1e-6,
        l1_worst_increase: l1.worst_violation,
        nonexpansive: l1.holds,
        split_series,
        l1_series,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanShiftReport {
    pub shift: f64,
    /// `max_t | |u - v|_1 - |u' - v'|_1 |` over base times.
    pub max_difference: f64,
    pub original: Vec<(f64, f64)>,
    pub shifted: Vec<(f64, f64)>,
}

/// Compares the pair `(u0, v0, f)` with `(u0 + c, v0 + c, f(. - c))`.
pub fn mean_shift_check(
    u0: &Field,
    v0: &Field,
    forcing: &ForcingModel,
    flux: &FluxModel,
    cfg: &SolverConfig,
    t_end: f64,
    shift: f64,
) -> Result<MeanShiftReport> {
    let original = pair_l1_series(u0, v0, forcing, flux, cfg, 0.0, t_end)?;
    let translated = flux.translated(shift)?;
    let us = u0.map(|x| x + shift)?;
    let vs = v0.map(|x| x + shift)?;
    let shifted = pair_l1_series(&us, &vs, forcing, &translated, cfg, 0.0, t_end)?;
    let max_difference = original
        .iter()
        .zip(&shifted)
        .fold(0.0f64, |m, (a, b)| m.max((a.1 - b.1).abs()));
    Ok(MeanShiftReport {
        shift,
        max_difference,
        original,
        shifted,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::grid::PeriodicGrid;

    #[test]
    fn heat_mode_contracts_by_the_mode_factor() {
        let g = PeriodicGrid::new(64).unwrap();
        let cfg = SolverConfig::new(0.1, 64, 1e-3);
        let u0 = Field::sample(&g, |x| (2.0 * PI * x).sin()).unwrap();
        let v0 = Field::zeros(&g);
        let r = contraction_experiment(&u0, &v0, &ForcingModel::Zero, &FluxModel::zero(), &cfg, 1.0, &Default::default())
            .unwrap();
        let expected = (-4.0 * PI * PI * 0.1f64).exp();
        assert!((r.q_observed - expected).abs() < 1e-4, "{}", r.q_observed);
        assert!(r.certificate_holds && r.nonexpansive);
        assert!(r.split_error < 1e-12);
    }

    #[test]
    fn preconditions() {
        let g = PeriodicGrid::new(32).unwrap();
        let cfg = SolverConfig::new(0.1, 32, 1e-2);
        let u0 = Field::sample(&g, |x| (2.0 * PI * x).sin()).unwrap();
        let same = contraction_experiment(&u0, &u0, &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 1.0, &Default::default());
        assert!(matches!(same, Err(LabError::ZeroDifference)));
        let shifted = u0.map(|x| x + 0.1).unwrap();
        let err = contraction_experiment(&u0, &shifted, &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 1.0, &Default::default());
        assert!(matches!(err, Err(LabError::MeanMismatch { .. })));
    }
}
