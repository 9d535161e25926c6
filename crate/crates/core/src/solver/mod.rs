//! Pseudo-spectral solver for `u_t - nu u_xx + (f(u))_x = h` on the circle.

mod integrator;
pub mod monitors;
mod trajectory;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub(crate) use integrator::{conservative_derivative, product_mask, Core, Explicit};
pub use trajectory::{read_snapshots, NormRecord, Trajectory};

use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::forcing::ForcingModel;
use crate::grid::{self, Field, PeriodicGrid};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Integrating factor for diffusion, explicit RK3 for the rest.
    #[default]
    #[serde(rename = "IMEX_IF_RK3")]
    ImexIfRk3,
    /// Crank–Nicolson diffusion with Adams–Bashforth 2 for the rest.
    #[serde(rename = "CN_AB2")]
    CnAb2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub nu: f64,
    pub n: usize,
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_blowup")]
    pub blowup_linf: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    /// Linear equation only: use the upwind finite-volume scheme.
    #[serde(default)]
    pub positivity_safe: bool,
}

fn default_true() -> bool {
    true
}
fn default_cfl() -> f64 {
    0.5
}
fn default_blowup() -> f64 {
    1e6
}
fn default_stride() -> usize {
    1
}

impl SolverConfig {
    pub fn new(nu: f64, n: usize, dt: f64) -> Self {
        Self {
            nu,
            n,
            dt,
            scheme: Scheme::default(),
            dealias: true,
            cfl_safety: default_cfl(),
            blowup_linf: default_blowup(),
            snapshot_stride: 1,
            positivity_safe: false,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<PeriodicGrid> {
        let bad = |msg: String| Err(LabError::InvalidConfig(msg));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety must be in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.blowup_linf > 0.0) {
            return bad(format!("blowup_linf must be positive, got {}", self.blowup_linf));
        }
        if self.snapshot_stride == 0 {
            return bad("snapshot_stride must be at least 1".into());
        }
        PeriodicGrid::new(self.n).map_err(|e| LabError::InvalidConfig(e.to_string()))
    }
}

struct BurgersTerm<'a> {
    grid: PeriodicGrid,
    mask: Vec<f64>,
    flux: &'a FluxModel,
    forcing: &'a ForcingModel,
    steady: Option<Vec<Complex64>>,
}

impl Explicit for BurgersTerm<'_> {
    fn rhs(&mut self, t: f64, values: &[f64]) -> Result<Vec<Complex64>> {
        let mut out = conservative_derivative(&self.grid, &self.mask, &self.flux.apply(values));
        if self.forcing.is_zero() {
            return Ok(out);
        }
        let h = match &self.steady {
            Some(h) => h.clone(),
            None => self.forcing.spectrum(t, &self.grid)?,
        };
        for (o, hk) in out.iter_mut().zip(&h).skip(1) {
            *o += hk;
        }
        Ok(out)
    }

    fn max_speed(&mut self, _t: f64, values: &[f64]) -> Result<f64> {
        Ok(self.flux.max_speed(values))
    }
}

/// Incremental Burgers solver, for running several trajectories in lockstep.
pub struct BurgersStepper<'a> {
    core: Core<BurgersTerm<'a>>,
}

impl<'a> BurgersStepper<'a> {
    pub fn new(u0: &Field, forcing: &'a ForcingModel, flux: &'a FluxModel, cfg: &SolverConfig, t0: f64) -> Result<Self> {
        let grid = cfg.validate()?;
        if u0.grid() != &grid {
            return Err(LabError::GridMismatch {
                left: u0.len(),
                right: grid.n(),
            });
        }
        let steady = if forcing.is_steady() && !forcing.is_zero() {
            Some(forcing.spectrum(t0, &grid)?)
        } else {
            None
        };
        let term = BurgersTerm {
            mask: product_mask(&grid, cfg.dealias),
            grid: grid.clone(),
            flux,
            forcing,
            steady,
        };
        Ok(Self {
            core: Core::new(grid, cfg.clone(), term, t0, u0.values().to_vec()),
        })
    }

    pub fn time(&self) -> f64 {
        self.core.time()
    }

    pub fn state(&self) -> Field {
        Field::from_trusted(&self.core.grid, self.core.values().to_vec())
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        self.core.advance_to(t)
    }

    /// `u_t = nu u_xx - (f(u))_x + h` at the current time.
    pub fn time_derivative(&mut self) -> Result<Field> {
        let spec = self.core.time_derivative_spectrum()?;
        Ok(Field::from_trusted(&self.core.grid, self.core.grid.inverse(spec)))
    }

    pub fn record(&mut self) -> Result<NormRecord> {
        record(&mut self.core)
    }
}

pub(crate) fn record<E: Explicit>(core: &mut Core<E>) -> Result<NormRecord> {
    let dudt = core.time_derivative_spectrum()?;
    let n = core.grid.n() as f64;
    let dudt_l2 = (dudt.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt() / n;
    let values = core.values();
    let norms = grid::norms_with_spectrum(&core.grid, values, core.spectrum());
    Ok(NormRecord {
        t: core.time(),
        mean: values.iter().sum::<f64>() / n,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        l1: norms.l1,
        l2: norms.l2,
        linf: norms.linf,
        h1: norms.h1,
        h2: norms.h2,
        dudt_l2,
    })
}

/// Base times `t0 + k dt`, with the last one clamped to `t_end`.
pub(crate) fn base_times(t0: f64, t_end: f64, dt: f64) -> Vec<f64> {
    let steps = ((t_end - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    (0..=steps)
        .map(|k| if k == steps { t_end } else { t0 + k as f64 * dt })
        .collect()
}

pub(crate) fn check_window(t0: f64, t_end: f64) -> Result<()> {
    if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
        return Err(LabError::InvalidConfig(format!(
            "time window [{t0}, {t_end}] must be finite with end after start"
        )));
    }
    Ok(())
}

/// Solves from `t0` to `t_end`, recording every base step.
pub fn solve(
    u0: &Field,
    forcing: &ForcingModel,
    flux: &FluxModel,
    cfg: &SolverConfig,
    t0: f64,
    t_end: f64,
) -> Result<Trajectory> {
    solve_recording(u0, forcing, flux, cfg, t0, t_end, t0)
}

/// Like [`solve`], but norms and snapshots are kept only from `record_from` on.
pub fn solve_recording(
    u0: &Field,
    forcing: &ForcingModel,
    flux: &FluxModel,
    cfg: &SolverConfig,
    t0: f64,
    t_end: f64,
    record_from: f64,
) -> Result<Trajectory> {
    check_window(t0, t_end)?;
    let (start, end) = forcing.domain();
    if t0 < start || t_end > end {
        return Err(LabError::ForcingOutOfRange {
            t: if t0 < start { t0 } else { t_end },
            start,
            end,
        });
    }
    let mut stepper = BurgersStepper::new(u0, forcing, flux, cfg, t0)?;
    let mut traj = Trajectory::empty(&stepper.core.grid, cfg, t0.max(record_from));
    let times = base_times(t0, t_end, cfg.dt);
    let last = times.len() - 1;
    let eps = 1e-9 * cfg.dt;
    let mut kept = 0usize;
    for (k, &t) in times.iter().enumerate() {
        if let Err(e) = stepper.advance_to(t) {
            return Err(attach(e, traj));
        }
        if t < record_from - eps {
            continue;
        }
        traj.push_norms(stepper.record()?);
        if kept % cfg.snapshot_stride == 0 || k == last {
            traj.push_snapshot(t, stepper.state());
        }
        kept += 1;
    }
    Ok(traj)
}

pub(crate) fn attach(e: LabError, traj: Trajectory) -> LabError {
    match e {
        LabError::Blowup { t, linf, .. } => LabError::Blowup {
            t,
            linf,
            trajectory: Box::new(traj),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::grid::NormKind;

    fn sine(g: &PeriodicGrid, a: f64) -> Field {
        Field::sample(g, |x| a * (2.0 * PI * x).sin()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.1, 64, 1e-3).validate().is_ok());
        let err = SolverConfig::new(-1.0, 64, 1e-3).validate().unwrap_err();
        assert!(err.to_string().contains("nu must be positive"));
        assert!(SolverConfig::new(0.1, 63, 1e-3).validate().is_err());
        assert!(SolverConfig::new(0.1, 64, 0.0).validate().is_err());
        let mut c = SolverConfig::new(0.1, 64, 1e-3);
        c.cfl_safety = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_serde_defaults() {
        let c: SolverConfig = serde_json::from_str(r#"{"nu":0.1,"n":64,"dt":0.001,"scheme":"CN_AB2"}"#).unwrap();
        assert_eq!(c.scheme, Scheme::CnAb2);
        assert!(c.dealias);
        assert_eq!(c.cfl_safety, 0.5);
        assert_eq!(c.blowup_linf, 1e6);
        assert!(serde_json::from_str::<SolverConfig>(r#"{"nu":0.1,"n":64,"dt":0.001,"bogus":1}"#).is_err());
    }

    #[test]
    fn base_times_land_on_end() {
        let t = base_times(0.0, 1.0, 0.3);
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
        let t = base_times(0.0, 1.0, 1e-3);
        assert_eq!(t.len(), 1001);
    }

    #[test]
    fn heat_decay_of_a_single_mode() {
        let g = PeriodicGrid::new(64).unwrap();
        let cfg = SolverConfig::new(0.1, 64, 1e-2);
        let traj = solve(&sine(&g, 1.0), &ForcingModel::Zero, &FluxModel::zero(), &cfg, 0.0, 1.0).unwrap();
        let exact = sine(&g, (-4.0 * PI * PI * 0.1_f64).exp());
        assert!(traj.final_state().unwrap().sup_distance(&exact) < 1e-13);
        assert_eq!(traj.snapshot_times().len(), 101);
    }

    #[test]
    fn constants_are_steady() {
        let g = PeriodicGrid::new(32).unwrap();
        let cfg = SolverConfig::new(0.05, 32, 1e-2);
        let u0 = Field::constant(&g, 2.5);
        let traj = solve(&u0, &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 0.0, 0.5).unwrap();
        for s in traj.snapshots() {
            assert!(s.sup_distance(&u0) < 1e-14);
        }
        assert!(traj.norms.iter().all(|r| r.dudt_l2 < 1e-13));
    }

    #[test]
    fn stride_and_recording_window() {
        let g = PeriodicGrid::new(32).unwrap();
        let cfg = SolverConfig::new(0.1, 32, 0.1).with_stride(3);
        let traj = solve(&sine(&g, 1.0), &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 0.0, 1.0).unwrap();
        assert_eq!(traj.norms.len(), 11);
        let times: Vec<f64> = traj.snapshot_times().to_vec();
        assert_eq!(times.len(), 5);
        assert_eq!(*times.last().unwrap(), 1.0);
        let late = solve_recording(&sine(&g, 1.0), &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, -1.0, 1.0, 0.0)
            .unwrap();
        assert_eq!(late.norms.len(), 11);
        assert!(late.norms[0].t.abs() < 1e-12);
    }

    #[test]
    fn blowup_is_reported_with_partial_trajectory() {
        let g = PeriodicGrid::new(32).unwrap();
        let mut cfg = SolverConfig::new(0.1, 32, 1e-2);
        cfg.blowup_linf = 1.5;
        let forcing = ForcingModel::steady(sine(&g, 50.0));
        let err = solve(&sine(&g, 1.0), &forcing, &FluxModel::zero(), &cfg, 0.0, 1.0).unwrap_err();
        match err {
            LabError::Blowup { t, linf, trajectory } => {
                assert!(linf > 1.5 && t < 1.0);
                assert!(!trajectory.norms.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cfl_substeps_keep_base_times() {
        let g = PeriodicGrid::new(64).unwrap();
        let cfg = SolverConfig::new(0.05, 64, 0.05);
        let traj = solve(&sine(&g, 1.0), &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 0.0, 0.5).unwrap();
        assert_eq!(traj.norms.len(), 11);
        let fine = solve(&sine(&g, 1.0), &ForcingModel::Zero, &FluxModel::quadratic(), &cfg.clone().with_dt(1e-3), 0.0, 0.5)
            .unwrap();
        let d = traj.final_state().unwrap() - fine.final_state().unwrap();
        assert!(d.norm(NormKind::Linf) < 1e-3, "{}", d.norm(NormKind::Linf));
    }

    #[test]
    fn stepper_time_derivative_of_heat_mode() {
        let g = PeriodicGrid::new(32).unwrap();
        let cfg = SolverConfig::new(0.1, 32, 1e-3);
        let forcing = ForcingModel::Zero;
        let flux = FluxModel::zero();
        let mut s = BurgersStepper::new(&sine(&g, 1.0), &forcing, &flux, &cfg, 0.0).unwrap();
        let d = s.time_derivative().unwrap();
        let expected = sine(&g, -4.0 * PI * PI * 0.1);
        assert!(d.sup_distance(&expected) < 1e-12);
        s.advance_to(0.01).unwrap();
        assert_eq!(s.time(), 0.01);
    }
}
