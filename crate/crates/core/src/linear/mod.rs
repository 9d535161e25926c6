//! The linear equation `w_t - nu w_xx + (a(t, x) w)_x = 0` satisfied by the
//! difference of two Burgers solutions, and the positivity, `L^1`
//! non-expansion and Harnack properties of its solutions.

mod fv;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::flux::FluxModel;
use crate::grid::{self, Field, NormKind, PeriodicGrid};
use crate::profiles::random_band_limited;
use crate::solver::{self, attach, base_times, check_window, conservative_derivative, product_mask, Core, Explicit};
use crate::solver::{NormRecord, SolverConfig, Trajectory};

/// Coefficient `a(t, .)` stored at increasing times and interpolated
/// linearly in between.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPath {
    times: Vec<f64>,
    fields: Vec<Field>,
    rho_bound: f64,
    speed_bound: f64,
}

impl CoefficientPath {
    pub fn new(times: Vec<f64>, fields: Vec<Field>) -> Result<Self> {
        if times.len() < 2 || times.len() != fields.len() {
            return Err(LabError::InvalidConfig(format!(
                "coefficient path needs >= 2 times with one field each, got {} times and {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidConfig("coefficient times must increase strictly".into()));
        }
        for f in &fields[1..] {
            fields[0].same_grid(f)?;
        }
        let mut rho_bound: f64 = 0.0;
        let mut speed_bound: f64 = 0.0;
        for f in &fields {
            let linf = f.norm(NormKind::Linf);
            speed_bound = speed_bound.max(linf);
            rho_bound = rho_bound.max(linf + f.derivative(1)?.norm(NormKind::Linf));
        }
        Ok(Self {
            times,
            fields,
            rho_bound,
            speed_bound,
        })
    }

    /// Time-independent coefficient on `[t0, t1]`.
    pub fn constant(a: Field, t0: f64, t1: f64) -> Result<Self> {
        Self::new(vec![t0, t1], vec![a.clone(), a])
    }

    /// `a = int_0^1 f'(v + s w) ds` with `w = u - v`, from two trajectories
    /// sharing their snapshot times.
    pub fn from_pair(flux: &FluxModel, u: &Trajectory, v: &Trajectory, quad_points: Option<usize>) -> Result<Self> {
        let (tu, tv) = (u.snapshot_times(), v.snapshot_times());
        if tu.len() != tv.len() || tu.iter().zip(tv).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
            return Err(LabError::InvalidConfig("trajectories do not share snapshot times".into()));
        }
        let q = quad_points.unwrap_or_else(|| flux.default_quad_points());
        let fields = u
            .snapshots()
            .iter()
            .zip(v.snapshots())
            .map(|(us, vs)| flux.advection_coefficient(vs, &(us - vs), q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tu.to_vec(), fields)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.fields[0].grid()
    }

    pub fn window(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("nonempty"))
    }

    /// `max (|a|_inf + |a_x|_inf)` over the stored times.
    pub fn rho_bound(&self) -> f64 {
        self.rho_bound
    }

    /// `max |a|_inf` over the stored times.
    pub fn speed_bound(&self) -> f64 {
        self.speed_bound
    }

    pub fn covers(&self, t0: f64, t1: f64) -> Result<()> {
        let (start, end) = self.window();
        let tol = 1e-12 * start.abs().max(end.abs()).max(1.0);
        for t in [t0, t1] {
            if t < start - tol || t > end + tol {
                return Err(LabError::CoefficientGap { t, start, end });
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Result<Field> {
        self.covers(t, t)?;
        let tol = 1e-12 * t.abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t);
        if i < self.times.len() && (self.times[i] - t).abs() <= tol {
            return Ok(self.fields[i].clone());
        }
        if i > 0 && (t - self.times[i - 1]).abs() <= tol {
            return Ok(self.fields[i - 1].clone());
        }
        let i = i.clamp(1, self.times.len() - 1);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let (a, b) = (self.fields[i - 1].values(), self.fields[i].values());
        Ok(Field::from_trusted(
            self.grid(),
            a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect(),
        ))
    }
}

struct LinearTerm<'a> {
    grid: PeriodicGrid,
    mask: Vec<f64>,
    coeff: &'a CoefficientPath,
}

impl Explicit for LinearTerm<'_> {
    fn rhs(&mut self, t: f64, values: &[f64]) -> Result<Vec<Complex64>> {
        let a = self.coeff.at(t)?;
        let product: Vec<f64> = a.values().iter().zip(values).map(|(a, w)| a * w).collect();
        Ok(conservative_derivative(&self.grid, &self.mask, &product))
    }

    fn max_speed(&mut self, _t: f64, _values: &[f64]) -> Result<f64> {
        Ok(self.coeff.speed_bound())
    }
}

enum Inner<'a> {
    Spectral(Core<LinearTerm<'a>>),
    Volume(fv::FiniteVolume<'a>),
}

/// Incremental solver for the linear equation. Uses the spectral scheme of
/// the Burgers solver, or the finite-volume scheme when
/// `cfg.positivity_safe` is set.
pub struct LinearStepper<'a> {
    grid: PeriodicGrid,
    inner: Inner<'a>,
}

impl<'a> LinearStepper<'a> {
    pub fn new(w0: &Field, coeff: &'a CoefficientPath, cfg: &SolverConfig, t0: f64) -> Result<Self> {
        let grid = cfg.validate()?;
        if w0.grid() != &grid || coeff.grid() != &grid {
            return Err(LabError::GridMismatch {
                left: w0.len(),
                right: coeff.grid().n(),
            });
        }
        coeff.covers(t0, t0)?;
        let inner = if cfg.positivity_safe {
            Inner::Volume(fv::FiniteVolume::new(
                grid.clone(),
                cfg.nu,
                cfg.blowup_linf,
                coeff,
                t0,
                w0.values().to_vec(),
            ))
        } else {
            let term = LinearTerm {
                grid: grid.clone(),
                mask: product_mask(&grid, cfg.dealias),
                coeff,
            };
            Inner::Spectral(Core::new(grid.clone(), cfg.clone(), term, t0, w0.values().to_vec()))
        };
        Ok(Self { grid, inner })
    }

    pub fn time(&self) -> f64 {
        match &self.inner {
            Inner::Spectral(c) => c.time(),
            Inner::Volume(f) => f.time(),
        }
    }

    fn values(&self) -> &[f64] {
        match &self.inner {
            Inner::Spectral(c) => c.values(),
            Inner::Volume(f) => f.values(),
        }
    }

    pub fn state(&self) -> Field {
        Field::from_trusted(&self.grid, self.values().to_vec())
    }

    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        match &mut self.inner {
            Inner::Spectral(c) => c.advance_to(t),
            Inner::Volume(f) => f.advance_to(t),
        }
    }

    pub fn record(&mut self) -> Result<NormRecord> {
        match &mut self.inner {
            Inner::Spectral(c) => solver::record(c),
            Inner::Volume(f) => {
                let values = f.values();
                let dudt = f.rhs(f.time(), values)?;
                let norms = grid::norms_with_spectrum(&self.grid, values, &self.grid.forward(values));
                let n = values.len() as f64;
                Ok(NormRecord {
                    t: f.time(),
                    mean: values.iter().sum::<f64>() / n,
                    min: values.iter().copied().fold(f64::INFINITY, f64::min),
                    max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    l1: norms.l1,
                    l2: norms.l2,
                    linf: norms.linf,
                    h1: norms.h1,
                    h2: norms.h2,
                    dudt_l2: grid::l2(&dudt),
                })
            }
        }
    }
}

/// Solves the linear equation on `[t0, t_end]`, recording every base step.
pub fn solve_linear(w0: &Field, coeff: &CoefficientPath, cfg: &SolverConfig, t0: f64, t_end: f64) -> Result<Trajectory> {
    check_window(t0, t_end)?;
    coeff.covers(t0, t_end)?;
    let mut stepper = LinearStepper::new(w0, coeff, cfg, t0)?;
    let mut traj = Trajectory::empty(&stepper.grid, cfg, t0);
    let times = base_times(t0, t_end, cfg.dt);
    let last = times.len() - 1;
    for (k, &t) in times.iter().enumerate() {
        if let Err(e) = stepper.advance_to(t) {
            return Err(attach(e, traj));
        }
        traj.push_norms(stepper.record()?);
        if k % cfg.snapshot_stride == 0 || k == last {
            traj.push_snapshot(t, stepper.state());
        }
    }
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct L1Check {
    pub holds: bool,
    /// `max_t (|w(t)|_1 - min_{s <= t} |w(s)|_1)`.
    pub worst_violation: f64,
}

pub const L1_TOLERANCE: f64 = 1e-9;

/// `|w(t)|_1 <= |w(s)|_1 + 1e-9` for all recorded `s <= t`.
pub fn l1_nonexpansion_check(traj: &Trajectory) -> L1Check {
    let series: Vec<(f64, f64)> = traj.norms.iter().map(|r| (r.t, r.l1)).collect();
    l1_series_check(&series, L1_TOLERANCE)
}

pub fn l1_series_check(series: &[(f64, f64)], tol: f64) -> L1Check {
    let mut best = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for &(_, v) in series {
        worst = worst.max(v - best);
        best = best.min(v);
    }
    L1Check {
        holds: worst <= tol,
        worst_violation: worst,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarnackReport {
    pub t_prime: f64,
    pub t: f64,
    pub max_at_t_prime: f64,
    pub min_at_t: f64,
    pub theta_observed: f64,
    /// Smallest nodal value seen during the run, for the positivity check.
    pub min_over_run: f64,
}

/// Solves from time 0 and measures `min w(T) / max w(T')`.
pub fn harnack_ratio(w0: &Field, coeff: &CoefficientPath, cfg: &SolverConfig, t_prime: f64, t: f64) -> Result<HarnackReport> {
    let min0 = w0.min();
    if min0 < 0.0 {
        return Err(LabError::NegativeData(min0));
    }
    if w0.is_zero() {
        return Err(LabError::ZeroData);
    }
    if !(t_prime > 0.0 && t > t_prime) {
        return Err(LabError::Precondition(format!("need 0 < T' < T, got T' = {t_prime}, T = {t}")));
    }
    coeff.covers(0.0, t)?;
    let mut stepper = LinearStepper::new(w0, coeff, cfg, 0.0)?;
    let mut times = base_times(0.0, t, cfg.dt);
    if !times.iter().any(|&s| (s - t_prime).abs() <= 1e-12) {
        times.push(t_prime);
        times.sort_by(f64::total_cmp);
    }
    let mut min_over_run = min0;
    let mut max_at_t_prime = f64::NAN;
    for &s in &times {
        stepper.advance_to(s)?;
        let state = stepper.state();
        min_over_run = min_over_run.min(state.min());
        if (s - t_prime).abs() <= 1e-12 {
            max_at_t_prime = state.max();
        }
    }
    let min_at_t = stepper.state().min();
    Ok(HarnackReport {
        t_prime,
        t,
        max_at_t_prime,
        min_at_t,
        theta_observed: min_at_t / max_at_t_prime,
        min_over_run,
    })
}

/// Random coefficient with `|a|_inf + |a_x|_inf = rho` at its stored times:
/// a three-mode trigonometric polynomial whose coefficients oscillate in time.
pub fn random_coefficient(grid: &PeriodicGrid, rho: f64, t_end: f64, dt_store: f64, rng: &mut impl Rng) -> Result<CoefficientPath> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(LabError::Precondition(format!("rho must be finite and >= 0, got {rho}")));
    }
    let times = base_times(0.0, t_end, dt_store);
    if rho == 0.0 {
        return CoefficientPath::new(times.clone(), vec![Field::zeros(grid); times.len()]);
    }
    let modes = 3usize;
    // (static, oscillating amplitude, frequency, phase) per coefficient.
    let params: Vec<(f64, f64, f64, f64)> = (0..=2 * modes)
        .map(|i| {
            let scale = 1.0 / (i.div_ceil(2)).max(1) as f64;
            let a: f64 = rng.sample(rand_distr::StandardNormal);
            let b: f64 = rng.sample(rand_distr::StandardNormal);
            (a * scale, b * scale, rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    let raw: Vec<Field> = times
        .iter()
        .map(|&t| {
            let c: Vec<f64> = params
                .iter()
                .map(|(a, b, w, p)| a + b * (2.0 * PI * w * t + p).sin())
                .collect();
            let values = (0..grid.n())
                .map(|j| {
                    (1..=modes).fold(c[0], |acc, m| {
                        let (cos, sin) = grid.trig(m, j);
                        acc + c[2 * m - 1] * cos + c[2 * m] * sin
                    })
                })
                .collect();
            Field::from_trusted(grid, values)
        })
        .collect();
    let raw = CoefficientPath::new(times.clone(), raw)?;
    let scale = rho / raw.rho_bound();
    CoefficientPath::new(times, raw.fields.iter().map(|f| f.scaled(scale)).collect())
}

/// Random nonnegative initial datum: either strictly positive and smooth,
/// or the positive part of a trigonometric polynomial.
pub fn random_nonnegative(grid: &PeriodicGrid, rng: &mut impl Rng) -> Result<Field> {
    let f = random_band_limited(grid, 4, rng)?;
    let f = f.scaled(1.0 / f.norm(NormKind::Linf));
    if rng.random_bool(0.5) {
        f.map(|v| 1.0 + 0.9 * v)
    } else {
        f.map(|v| v.max(0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub rho: f64,
    pub theta_min: f64,
    pub theta_median: f64,
    pub theta_max: f64,
    pub trials: usize,
    pub thetas: Vec<f64>,
}

fn trial_seed(seed: u64, stream: u64, trial: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (stream << 32) ^ trial
}

/// Empirical distribution of the Harnack ratio over random data, for each
/// `rho`. Trial `i` uses the same initial datum for every `rho`.
pub fn theta_sweep(
    rho_values: &[f64],
    cfg: &SolverConfig,
    t_prime: f64,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if trials == 0 {
        return Err(LabError::Precondition("theta sweep needs at least one trial".into()));
    }
    let grid = cfg.validate()?;
    rho_values
        .iter()
        .enumerate()
        .map(|(r, &rho)| {
            let thetas = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut data_rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 0, i as u64));
                    let mut coeff_rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, r as u64 + 1, i as u64));
                    let w0 = random_nonnegative(&grid, &mut data_rng)?;
                    let coeff = random_coefficient(&grid, rho, t, 0.01, &mut coeff_rng)?;
                    Ok(harnack_ratio(&w0, &coeff, cfg, t_prime, t)?.theta_observed)
                })
                .collect::<Result<Vec<f64>>>()?;
            let mut sorted = thetas.clone();
            sorted.sort_by(f64::total_cmp);
            let mid = sorted.len() / 2;
            let median = if sorted.len() % 2 == 1 {
                sorted[mid]
            } else {
                0.5 * (sorted[mid - 1] + sorted[mid])
            };
            Ok(SweepRow {
                rho,
                theta_min: sorted[0],
                theta_median: median,
                theta_max: *sorted.last().expect("nonempty"),
                trials,
                thetas,
            })
        })
        .collect()
}
