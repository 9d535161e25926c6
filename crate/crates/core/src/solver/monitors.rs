//! Checks of the a priori estimates against a computed trajectory.

use serde::Serialize;

use super::Trajectory;
use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::forcing::ForcingModel;
use crate::grid::NormKind;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinfBoundCheck {
    pub holds: bool,
    /// `max_t |u(t)|_inf` over the recorded times.
    pub lhs: f64,
    /// `|u(t_start)|_inf + (t_end - t_start) h_linf`.
    pub rhs: f64,
    pub margin: f64,
}

/// Maximum-principle bound `|u|_inf <= |u0|_inf + T sup|h|`.
pub fn check_linf_bound(traj: &Trajectory, h_linf: f64, tol: f64) -> LinfBoundCheck {
    let lhs = traj.norms.iter().fold(0.0, |m: f64, r| m.max(r.linf));
    let first = traj.norms.first().map_or(0.0, |r| r.linf);
    let rhs = first + (traj.t_end - traj.t_start) * h_linf;
    LinfBoundCheck {
        holds: lhs <= rhs + tol,
        lhs,
        rhs,
        margin: rhs - lhs,
    }
}

/// Discrete residual of `d/dt |u|_2^2 + 2 nu |u_x|_2^2 - 2 (h, u)` at every
/// interior snapshot, using centred differences in time.
pub fn energy_identity_residual(traj: &Trajectory, forcing: &ForcingModel) -> Result<Vec<(f64, f64)>> {
    let times = traj.snapshot_times();
    let snaps = traj.snapshots();
    if snaps.len() < 3 {
        return Err(LabError::RunTooShort(format!(
            "energy residual needs 3 snapshots, trajectory has {}",
            snaps.len()
        )));
    }
    let nu = traj.config.nu;
    let energy: Vec<f64> = snaps.iter().map(|s| s.norm(NormKind::L2).powi(2)).collect();
    let mut out = Vec::with_capacity(snaps.len() - 2);
    for i in 1..snaps.len() - 1 {
        let de = (energy[i + 1] - energy[i - 1]) / (times[i + 1] - times[i - 1]);
        let ux = snaps[i].derivative(1)?.norm(NormKind::L2);
        let hu = if forcing.is_zero() {
            0.0
        } else {
            forcing.eval(times[i], traj.grid())?.inner(&snaps[i])
        };
        out.push((times[i], de + 2.0 * nu * ux * ux - 2.0 * hu));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DissipativityReport {
    /// Earliest time after which `Q` stays below `ceiling`.
    pub entry_time: f64,
    /// Observed ceiling: 1.25 times the maximum of `Q` over the tail.
    pub ceiling: f64,
    /// `ceiling / (1 + h_linf^2)`.
    pub bound_const: f64,
    /// `Q(t) = ||u(t)||_{H1}^2 + int_t^{t+1} (||u||_{H2}^2 + |u_t|_2^2) ds`.
    pub series: Vec<(f64, f64)>,
}

pub fn dissipativity_report(traj: &Trajectory, h_linf: f64) -> Result<DissipativityReport> {
    let duration = traj.t_end - traj.t_start;
    if !(duration >= 3.0) {
        return Err(LabError::RunTooShort(format!(
            "dissipativity needs a run of length >= 3, got {duration}"
        )));
    }
    let recs = &traj.norms;
    let integrand: Vec<f64> = recs.iter().map(|r| r.h2 * r.h2 + r.dudt_l2 * r.dudt_l2).collect();
    // Cumulative trapezoid integral of the integrand.
    let mut cumulative = vec![0.0; recs.len()];
    for i in 1..recs.len() {
        cumulative[i] = cumulative[i - 1] + 0.5 * (recs[i].t - recs[i - 1].t) * (integrand[i] + integrand[i - 1]);
    }
    let at = |t: f64| -> f64 {
        let j = recs.partition_point(|r| r.t < t).min(recs.len() - 1);
        if j == 0 || recs[j].t == t {
            return cumulative[j];
        }
        let (a, b) = (&recs[j - 1], &recs[j]);
        let s = (t - a.t) / (b.t - a.t);
        let value = integrand[j - 1] + s * (integrand[j] - integrand[j - 1]);
        cumulative[j - 1] + 0.5 * (t - a.t) * (integrand[j - 1] + value)
    };
    let last = traj.t_end - 1.0;
    let series: Vec<(f64, f64)> = recs
        .iter()
        .take_while(|r| r.t <= last + 1e-12)
        .map(|r| (r.t, r.h1 * r.h1 + at(r.t + 1.0) - at(r.t)))
        .collect();
    let span = series.last().map_or(0.0, |s| s.0) - traj.t_start;
    let tail_start = series.last().map_or(0.0, |s| s.0) - (0.25 * span).max(1.0);
    let tail_max = series
        .iter()
        .filter(|(t, _)| *t >= tail_start)
        .fold(0.0, |m: f64, (_, q)| m.max(*q));
    let ceiling = 1.25 * tail_max;
    let mut entry_time = traj.t_start;
    for (t, q) in series.iter().rev() {
        if *q > ceiling {
            entry_time = *t;
            break;
        }
    }
    Ok(DissipativityReport {
        entry_time,
        ceiling,
        bound_const: ceiling / (1.0 + h_linf * h_linf),
        series,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KruzhkovCheck {
    pub t: f64,
    /// `|u(t_start + 1/2)|_inf`.
    pub linf_at_half: f64,
    /// `|u - <u>|_inf` at the same time.
    pub zero_mean_linf_at_half: f64,
}

/// Reads `|u|_inf` half a time unit into the run.
pub fn kruzhkov_check(traj: &Trajectory, flux: &FluxModel) -> Result<KruzhkovCheck> {
    if !(flux.sigma_floor() > 0.0) {
        return Err(LabError::ConvexityRequired(flux.sigma_floor()));
    }
    let target = traj.t_start + 0.5;
    if traj.t_end < target - 1e-12 {
        return Err(LabError::RunTooShort(format!("run ends at {} before t = {target}", traj.t_end)));
    }
    let r = traj
        .record_near(target)
        .ok_or_else(|| LabError::RunTooShort("empty trajectory".into()))?;
    Ok(KruzhkovCheck {
        t: r.t,
        linf_at_half: r.linf,
        zero_mean_linf_at_half: (r.max - r.mean).abs().max((r.min - r.mean).abs()),
    })
}

/// Ratio `max / min` of a family of positive values.
pub fn family_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct H2BoundCheck {
    pub after: f64,
    pub sup_h2_after_entry: f64,
    pub final_h2: f64,
    /// Set when the second half of the window exceeds the first by over 5%.
    pub growing: bool,
}

pub fn h2_bound_check(traj: &Trajectory, after: f64) -> Result<H2BoundCheck> {
    let recs: Vec<_> = traj.norms.iter().filter(|r| r.t >= after - 1e-12).collect();
    if recs.len() < 2 {
        return Err(LabError::RunTooShort(format!("no records after t = {after}")));
    }
    let mid = 0.5 * (after + traj.t_end);
    let sup = |pred: &dyn Fn(f64) -> bool| recs.iter().filter(|r| pred(r.t)).fold(0.0, |m: f64, r| m.max(r.h2));
    let first = sup(&|t| t <= mid);
    let second = sup(&|t| t > mid);
    Ok(H2BoundCheck {
        after,
        sup_h2_after_entry: first.max(second),
        final_h2: recs.last().expect("nonempty").h2,
        growing: second > 1.05 * first,
    })
}
