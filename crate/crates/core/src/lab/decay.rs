use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{Field, NormKind};

pub const MIN_FIT_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
    /// Values at or below this are excluded from the fit.
    pub noise_floor: f64,
}

impl FitWindow {
    pub fn new(t_min: f64, t_max: f64) -> Self {
        Self {
            t_min,
            t_max,
            noise_floor: 10.0 * f64::EPSILON,
        }
    }

    pub fn with_floor(mut self, noise_floor: f64) -> Self {
        self.noise_floor = noise_floor.max(10.0 * f64::EPSILON);
        self
    }
}

/// Least-squares fit of `value ~ C exp(-gamma t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub gamma: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub r_squared: f64,
    pub window: FitWindow,
    pub points: usize,
    /// Time of the last point above the noise floor.
    pub t_last: f64,
}

pub fn decay_rate_fit(series: &[(f64, f64)], window: FitWindow) -> Result<DecayFit> {
    let in_window: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.t_min && *t <= window.t_max)
        .collect();
    let usable: Vec<(f64, f64)> = in_window
        .iter()
        .copied()
        .filter(|(_, v)| v.is_finite() && *v > window.noise_floor)
        .map(|(t, v)| (t, v.ln()))
        .collect();
    if usable.is_empty() && !in_window.is_empty() {
        return Err(LabError::UnderflowedDecay(window.noise_floor));
    }
    if usable.len() < MIN_FIT_POINTS {
        return Err(LabError::TooFewPoints {
            got: usable.len(),
            need: MIN_FIT_POINTS,
        });
    }
    let n = usable.len() as f64;
    let mt = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = usable.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = usable.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let residual: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n {
        1.0
    } else {
        (1.0 - residual / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        gamma: -slope,
        c: intercept.exp(),
        r_squared,
        window,
        points: usable.len(),
        t_last: usable.last().expect("nonempty").0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpolationCheck {
    /// `||u||_{H1}`.
    pub lhs: f64,
    pub h2: f64,
    pub l1: f64,
    /// `||u||_{H1} / (||u||_{H2}^{3/5} |u|_1^{2/5})`.
    pub rhs_ratio: f64,
}

pub fn interpolation_check(u: &Field) -> Result<InterpolationCheck> {
    if u.is_zero() {
        return Err(LabError::ZeroData);
    }
    let norms = u.norms();
    Ok(InterpolationCheck {
        lhs: norms.h1,
        h2: norms.h2,
        l1: norms.l1,
        rhs_ratio: norms.h1 / (norms.h2.powf(0.6) * norms.get(NormKind::L1).powf(0.4)),
    })
}
