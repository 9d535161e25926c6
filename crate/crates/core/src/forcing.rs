//! Zero-mean external forces `h(t, x)`.
//!
//! Deterministic forces are either steady or time-periodic. The stochastic
//! force is a finite Fourier sum
//!
//! ```text
//! h(t, x) = sum_{m=1..M} a_m [xi_m(t) cos(2 pi m x) + eta_m(t) sin(2 pi m x)],   a_m = scale * m^-p
//! ```
//!
//! where the `xi_m`, `eta_m` are independent stationary Ornstein–Uhlenbeck
//! processes with unit variance and reversion rate `lambda`, sampled exactly
//! on a uniform path grid and linearly interpolated in between. No force
//! ever carries a zeroth Fourier mode.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rustfft::num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{Field, NormKind, PeriodicGrid};
use crate::profiles::ProfileSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticSpec {
    /// Number of Fourier modes `M`.
    pub modes: usize,
    /// Spectral decay exponent `p >= 3`.
    pub decay_p: f64,
    /// Ornstein–Uhlenbeck reversion rate.
    pub lambda: f64,
    /// Overall amplitude; zero gives the degenerate (identically zero) force.
    #[serde(default = "one")]
    pub scale: f64,
    /// Spacing of the exactly sampled path nodes.
    #[serde(default = "default_path_dt")]
    pub path_dt: f64,
    /// Paths are generated on `[0, horizon]`.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn one() -> f64 {
    1.0
}
fn default_path_dt() -> f64 {
    1e-3
}
fn default_horizon() -> f64 {
    100.0
}

impl StochasticSpec {
    pub fn new(modes: usize, decay_p: f64, lambda: f64) -> Self {
        Self {
            modes,
            decay_p,
            lambda,
            scale: 1.0,
            path_dt: default_path_dt(),
            horizon: default_horizon(),
        }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::InvalidForcing(msg));
        if self.modes < 1 {
            return bad("stochastic forcing needs at least one mode".into());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("reversion rate must be positive, got {}", self.lambda));
        }
        if !(self.decay_p >= 3.0 && self.decay_p.is_finite()) {
            return bad(format!("decay exponent must be >= 3, got {}", self.decay_p));
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return bad(format!("scale must be finite and >= 0, got {}", self.scale));
        }
        if !(self.path_dt > 0.0 && self.path_dt.is_finite()) {
            return bad(format!("path_dt must be positive, got {}", self.path_dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        Ok(())
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        (1..=self.modes)
            .map(|m| self.scale * (m as f64).powf(-self.decay_p))
            .collect()
    }
}

/// Pre-generated stochastic path. Immutable once built, so it can be shared
/// between the two trajectories of a synchronization run.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticForcing {
    spec: StochasticSpec,
    seed: u64,
    amplitudes: Vec<f64>,
    /// Row `k` holds `(xi_1, eta_1, ..., xi_M, eta_M)` at `t = k * path_dt`.
    coefficients: Vec<f64>,
    nodes: usize,
}

impl StochasticForcing {
    pub fn spec(&self) -> &StochasticSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        (self.nodes - 1) as f64 * self.spec.path_dt
    }

    fn row(&self, k: usize) -> &[f64] {
        let width = 2 * self.spec.modes;
        &self.coefficients[k * width..(k + 1) * width]
    }

    /// Interpolated `(xi_m, eta_m)` at time `t`.
    pub fn coefficients_at(&self, t: f64) -> Result<Vec<f64>> {
        let horizon = self.horizon();
        if !(t >= 0.0 && t <= horizon * (1.0 + 1e-12)) {
            return Err(LabError::ForcingOutOfRange {
                t,
                start: 0.0,
                end: horizon,
            });
        }
        let s = (t / self.spec.path_dt).max(0.0);
        let k = (s.floor() as usize).min(self.nodes - 1);
        if k == self.nodes - 1 {
            return Ok(self.row(k).to_vec());
        }
        let frac = s - k as f64;
        if frac == 0.0 {
            return Ok(self.row(k).to_vec());
        }
        Ok(self
            .row(k)
            .iter()
            .zip(self.row(k + 1))
            .map(|(a, b)| a + frac * (b - a))
            .collect())
    }

    fn eval(&self, t: f64, grid: &PeriodicGrid) -> Result<Field> {
        let c = self.coefficients_at(t)?;
        let values = (0..grid.n())
            .map(|j| {
                self.amplitudes
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let (cos, sin) = grid.trig(i + 1, j);
                        a * (c[2 * i] * cos + c[2 * i + 1] * sin)
                    })
                    .sum()
            })
            .collect();
        Field::from_values(grid, values)
    }

    /// Unnormalised DFT of `h(t, .)`, written down directly from the modes.
    fn spectrum(&self, t: f64, grid: &PeriodicGrid) -> Result<Vec<Complex64>> {
        let n = grid.n();
        if 2 * self.spec.modes >= n {
            return Ok(grid.forward(self.eval(t, grid)?.values()));
        }
        let c = self.coefficients_at(t)?;
        let half = 0.5 * n as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let m = i + 1;
            let (xi, eta) = (a * c[2 * i] * half, a * c[2 * i + 1] * half);
            out[m] = Complex64::new(xi, -eta);
            out[n - m] = Complex64::new(xi, eta);
        }
        Ok(out)
    }

    /// CSV with columns `t, xi_1, eta_1, ..., xi_M, eta_M`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let mut header = vec!["t".to_string()];
        for m in 1..=self.spec.modes {
            header.push(format!("xi_{m}"));
            header.push(format!("eta_{m}"));
        }
        writeln!(out, "{}", header.join(","))?;
        for k in 0..self.nodes {
            let mut line = crate::export::fmt_f64(k as f64 * self.spec.path_dt);
            for v in self.row(k) {
                line.push(',');
                line.push_str(&crate::export::fmt_f64(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Replays a path written by [`Self::write_csv`].
    pub fn read_csv(spec: StochasticSpec, seed: u64, input: impl BufRead) -> Result<Self> {
        spec.validate()?;
        let width = 2 * spec.modes;
        let mut coefficients = Vec::new();
        let mut nodes = 0;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let parsed: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| LabError::InvalidForcing(format!("bad CSV line {}: {e}", i + 1)))?;
            if parsed.len() != width + 1 {
                return Err(LabError::InvalidForcing(format!(
                    "CSV line {} has {} columns, expected {}",
                    i + 1,
                    parsed.len(),
                    width + 1
                )));
            }
            let expected_t = nodes as f64 * spec.path_dt;
            if (parsed[0] - expected_t).abs() > 1e-9 * expected_t.max(1.0) {
                return Err(LabError::InvalidForcing(format!(
                    "CSV line {} at t = {} off the path grid (expected {expected_t})",
                    i + 1,
                    parsed[0]
                )));
            }
            coefficients.extend_from_slice(&parsed[1..]);
            nodes += 1;
        }
        if nodes < 2 {
            return Err(LabError::InvalidForcing("path CSV has fewer than two rows".into()));
        }
        Ok(Self {
            amplitudes: spec.amplitudes(),
            spec,
            seed,
            coefficients,
            nodes,
        })
    }
}

/// Builds the stochastic force with exact Ornstein–Uhlenbeck transitions.
pub fn make_stochastic_forcing(spec: &StochasticSpec, seed: u64) -> Result<ForcingModel> {
    spec.validate()?;
    let nodes = (spec.horizon / spec.path_dt).ceil() as usize + 1;
    let width = 2 * spec.modes;
    let decay = (-spec.lambda * spec.path_dt).exp();
    let kick = (1.0 - decay * decay).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coefficients = Vec::with_capacity(nodes * width);
    let mut state: Vec<f64> = (0..width).map(|_| rng.sample(StandardNormal)).collect();
    coefficients.extend_from_slice(&state);
    for _ in 1..nodes {
        for s in state.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *s = decay * *s + kick * z;
        }
        coefficients.extend_from_slice(&state);
    }
    Ok(ForcingModel::Stochastic(StochasticForcing {
        amplitudes: spec.amplitudes(),
        spec: spec.clone(),
        seed,
        coefficients,
        nodes,
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ForcingModel {
    Zero,
    Steady(Field),
    /// Cyclic piecewise-linear interpolation through equally spaced profiles.
    TimePeriodic { profiles: Vec<Field>, period: f64 },
    Stochastic(StochasticForcing),
}

impl ForcingModel {
    /// Steady force; the mean of `profile` is removed.
    pub fn steady(profile: Field) -> Self {
        ForcingModel::Steady(profile.zero_mean_part())
    }

    pub fn time_periodic(profiles: Vec<Field>, period: f64) -> Result<Self> {
        if profiles.is_empty() {
            return Err(LabError::InvalidForcing("time-periodic forcing needs profiles".into()));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(LabError::InvalidForcing(format!("period must be positive, got {period}")));
        }
        for p in &profiles[1..] {
            profiles[0].same_grid(p)?;
        }
        Ok(ForcingModel::TimePeriodic {
            profiles: profiles.iter().map(Field::zero_mean_part).collect(),
            period,
        })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ForcingModel::Zero => true,
            ForcingModel::Steady(p) => p.is_zero(),
            ForcingModel::TimePeriodic { profiles, .. } => profiles.iter().all(Field::is_zero),
            ForcingModel::Stochastic(s) => s.spec.scale == 0.0,
        }
    }

    pub fn is_steady(&self) -> bool {
        matches!(self, ForcingModel::Zero | ForcingModel::Steady(_))
    }

    /// Closed time interval on which the force can be evaluated.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ForcingModel::Stochastic(s) => (0.0, s.horizon()),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `h(t, .)` on `grid`.
    pub fn eval(&self, t: f64, grid: &PeriodicGrid) -> Result<Field> {
        match self {
            ForcingModel::Zero => Ok(Field::zeros(grid)),
            ForcingModel::Steady(p) => {
                p.same_grid(&Field::zeros(grid))?;
                Ok(p.clone())
            }
            ForcingModel::TimePeriodic { profiles, period } => {
                profiles[0].same_grid(&Field::zeros(grid))?;
                if !t.is_finite() {
                    return Err(LabError::NonFinite("forcing time".into()));
                }
                let count = profiles.len();
                let phase = (t / period).rem_euclid(1.0) * count as f64;
                let k = (phase.floor() as usize).min(count - 1);
                let frac = phase - k as f64;
                let (a, b) = (&profiles[k], &profiles[(k + 1) % count]);
                Ok(Field::from_trusted(
                    grid,
                    a.values()
                        .iter()
                        .zip(b.values())
                        .map(|(x, y)| x + frac * (y - x))
                        .collect(),
                ))
            }
            ForcingModel::Stochastic(s) => s.eval(t, grid),
        }
    }

    /// Unnormalised DFT of `h(t, .)`.
    pub(crate) fn spectrum(&self, t: f64, grid: &PeriodicGrid) -> Result<Vec<Complex64>> {
        match self {
            ForcingModel::Zero => Ok(vec![Complex64::new(0.0, 0.0); grid.n()]),
            ForcingModel::Stochastic(s) => s.spectrum(t, grid),
            _ => Ok(grid.forward(self.eval(t, grid)?.values())),
        }
    }

    /// Rough `sup_{x,t} |h|` over `[t0, t1]` sampled every `dt`.
    pub fn sup_linf(&self, grid: &PeriodicGrid, t0: f64, t1: f64, dt: f64) -> Result<f64> {
        let steps = ((t1 - t0) / dt).ceil().max(0.0) as usize;
        let mut sup: f64 = 0.0;
        for i in 0..=steps {
            let t = (t0 + i as f64 * dt).min(t1);
            sup = sup.max(self.eval(t, grid)?.norm(NormKind::Linf));
            if self.is_steady() {
                break;
            }
        }
        Ok(sup)
    }
}

/// Finite-horizon estimate of the forcing budget
/// `K = limsup (1/T) int_0^T max_{t <= s <= t+1} ||h(s)||_{H^2} dt`.
#[derive(Clone, Debug, Serialize)]
pub struct ForcingBudget {
    pub horizon: f64,
    pub dt_scan: f64,
    pub k_estimate: f64,
    /// `s_i = i * dt_scan` and `||h(s_i)||_{H^2}`.
    pub sample_times: Vec<f64>,
    pub samples: Vec<f64>,
    /// Start times `t` of the unit windows and the windowed suprema.
    pub window_starts: Vec<f64>,
    pub window_sups: Vec<f64>,
    /// Running time-average of `window_sups`.
    pub running_average: Vec<f64>,
}

impl ForcingBudget {
    /// `sup ||h(s)||_{H^2}` over sampled `s` in `[t0, t1]`.
    pub fn sup_over(&self, t0: f64, t1: f64) -> f64 {
        let eps = 1e-9 * self.dt_scan;
        self.sample_times
            .iter()
            .zip(&self.samples)
            .filter(|(s, _)| **s >= t0 - eps && **s <= t1 + eps)
            .fold(0.0, |m: f64, (_, v)| m.max(*v))
    }
}

pub fn forcing_budget(fm: &ForcingModel, grid: &PeriodicGrid, horizon: f64, dt_scan: f64) -> Result<ForcingBudget> {
    if !(horizon >= 2.0) {
        return Err(LabError::Precondition(format!("budget horizon must be >= 2, got {horizon}")));
    }
    if !(dt_scan > 0.0 && dt_scan <= 0.5) {
        return Err(LabError::Precondition(format!("dt_scan must be in (0, 0.5], got {dt_scan}")));
    }
    let count = (horizon / dt_scan).round() as usize;
    let window = (1.0 / dt_scan).round() as usize;
    let sample_times: Vec<f64> = (0..=count).map(|i| i as f64 * dt_scan).collect();
    let samples = sample_times
        .iter()
        .map(|&s| fm.eval(s, grid).map(|h| h.norm(NormKind::H2)))
        .collect::<Result<Vec<_>>>()?;

    // Monotone deque sliding-window maximum.
    let starts = count + 1 - window;
    let mut window_sups = Vec::with_capacity(starts);
    let mut deque: VecDeque<usize> = VecDeque::new();
    for i in 0..=count {
        while deque.back().is_some_and(|&b| samples[b] <= samples[i]) {
            deque.pop_back();
        }
        deque.push_back(i);
        if i >= window {
            let start = i - window;
            while deque.front().is_some_and(|&f| f < start) {
                deque.pop_front();
            }
            window_sups.push(samples[*deque.front().expect("window is nonempty")]);
        }
    }
    debug_assert_eq!(window_sups.len(), starts);
    let mut running_average = Vec::with_capacity(starts);
    let mut avg = 0.0;
    for (i, v) in window_sups.iter().enumerate() {
        avg += (v - avg) / (i + 1) as f64;
        running_average.push(avg);
    }
    Ok(ForcingBudget {
        horizon,
        dt_scan,
        k_estimate: *running_average.last().unwrap_or(&0.0),
        window_starts: (0..starts).map(|i| i as f64 * dt_scan).collect(),
        sample_times,
        samples,
        window_sups,
        running_average,
    })
}

/// Monte-Carlo estimate of `E max_{0 <= t <= 1} ||h(t)||_{H^2}` over seeds.
///
/// The `H^2` norm is convex along each linearly interpolated path segment,
/// so the maximum over path nodes is the maximum over `[0, 1]`.
pub fn expected_unit_sup(spec: &StochasticSpec, grid: &PeriodicGrid, seeds: &[u64]) -> Result<f64> {
    let spec = spec.clone().with_horizon(1.0);
    let mut total = 0.0;
    for &seed in seeds {
        let fm = make_stochastic_forcing(&spec, seed)?;
        let nodes = (1.0 / spec.path_dt).round() as usize;
        let mut sup: f64 = 0.0;
        for k in 0..=nodes {
            let t = (k as f64 * spec.path_dt).min(1.0);
            sup = sup.max(fm.eval(t, grid)?.norm(NormKind::H2));
        }
        total += sup;
    }
    Ok(total / seeds.len() as f64)
}

/// Config-file form of a force.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    /// `zero`, `steady`, `time_periodic` or `stochastic`.
    pub kind: String,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub profiles: Vec<ProfileSpec>,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default)]
    pub modes: Option<usize>,
    #[serde(default)]
    pub decay_p: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub path_dt: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        Self {
            kind: "zero".into(),
            profile: None,
            profiles: Vec::new(),
            period: None,
            modes: None,
            decay_p: None,
            lambda: None,
            scale: None,
            seed: None,
            path_dt: None,
            horizon: None,
        }
    }

    pub fn stochastic_spec(&self) -> Result<StochasticSpec> {
        let need = |name: &str| LabError::InvalidForcing(format!("stochastic forcing needs `{name}`"));
        let spec = StochasticSpec {
            modes: self.modes.ok_or_else(|| need("modes"))?,
            decay_p: self.decay_p.unwrap_or(3.0),
            lambda: self.lambda.ok_or_else(|| need("lambda"))?,
            scale: self.scale.unwrap_or(1.0),
            path_dt: self.path_dt.unwrap_or_else(default_path_dt),
            horizon: self.horizon.unwrap_or_else(default_horizon),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `seed` overrides the spec's own seed when given.
    pub fn build(&self, grid: &PeriodicGrid, seed: Option<u64>) -> Result<ForcingModel> {
        match self.kind.as_str() {
            "zero" => Ok(ForcingModel::Zero),
            "steady" => {
                let p = self
                    .profile
                    .as_ref()
                    .ok_or_else(|| LabError::InvalidForcing("steady forcing needs `profile`".into()))?;
                Ok(ForcingModel::steady(p.build(grid)?))
            }
            "time_periodic" => {
                let profiles = self
                    .profiles
                    .iter()
                    .map(|p| p.build(grid))
                    .collect::<Result<Vec<_>>>()?;
                let period = self
                    .period
                    .ok_or_else(|| LabError::InvalidForcing("time-periodic forcing needs `period`".into()))?;
                ForcingModel::time_periodic(profiles, period)
            }
            "stochastic" => {
                let spec = self.stochastic_spec()?;
                make_stochastic_forcing(&spec, seed.or(self.seed).unwrap_or(0))
            }
            other => Err(LabError::InvalidForcing(format!("unknown forcing kind {other:?}"))),
        }
    }
}
