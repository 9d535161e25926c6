//! Named closed-form profiles and seeded random band-limited fields, used
//! for initial conditions, steady forcing profiles and randomized corpora.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{Field, NormKind, PeriodicGrid};

/// `mean + amplitude * shape(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    /// One of `constant`, `sine`, `cosine`, `two_mode`, `bump`,
    /// `positive_sine`, `random`.
    pub shape: String,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_mode")]
    pub mode: u32,
    #[serde(default)]
    pub mean: f64,
    /// Band limit for `random`.
    #[serde(default = "default_modes")]
    pub modes: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_amplitude() -> f64 {
    1.0
}
fn default_mode() -> u32 {
    1
}
fn default_modes() -> u32 {
    6
}
fn default_center() -> f64 {
    0.5
}
fn default_width() -> f64 {
    0.1
}

impl ProfileSpec {
    pub fn named(shape: &str, amplitude: f64) -> Self {
        Self {
            shape: shape.to_string(),
            amplitude,
            mode: 1,
            mean: 0.0,
            modes: default_modes(),
            seed: 0,
            center: default_center(),
            width: default_width(),
        }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn build(&self, grid: &PeriodicGrid) -> Result<Field> {
        let k = 2.0 * PI * self.mode as f64;
        let shape = match self.shape.as_str() {
            "constant" => Field::constant(grid, 1.0),
            "sine" => Field::sample(grid, |x| (k * x).sin())?,
            "cosine" => Field::sample(grid, |x| (k * x).cos())?,
            "two_mode" => Field::sample(grid, |x| (k * x).sin() + 0.4 * (2.0 * k * x).sin())?,
            "positive_sine" => Field::sample(grid, |x| (k * x).sin().max(0.0))?,
            "bump" => {
                if !(self.width > 0.0) {
                    return Err(LabError::InvalidConfig("bump width must be positive".into()));
                }
                let (c, w) = (self.center, self.width);
                Field::sample(grid, |x| {
                    (-2..=2)
                        .map(|p| {
                            let d = x - c + p as f64;
                            (-0.5 * (d / w).powi(2)).exp()
                        })
                        .sum()
                })?
            }
            "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let f = random_band_limited(grid, self.modes as usize, &mut rng)?;
                let linf = f.norm(NormKind::Linf);
                f.scaled(1.0 / linf)
            }
            other => {
                return Err(LabError::InvalidConfig(format!("unknown profile shape {other:?}")))
            }
        };
        if !self.amplitude.is_finite() || !self.mean.is_finite() {
            return Err(LabError::InvalidConfig("profile amplitude and mean must be finite".into()));
        }
        shape.map(|v| self.mean + self.amplitude * v)
    }
}

/// Zero-mean trigonometric polynomial with modes `1..=modes` and Gaussian
/// coefficients of standard deviation `1/m`.
pub fn random_band_limited(grid: &PeriodicGrid, modes: usize, rng: &mut impl Rng) -> Result<Field> {
    if modes == 0 || 3 * modes >= grid.n() {
        return Err(LabError::Precondition(format!(
            "band limit {modes} must be in 1..n/3 for n = {}",
            grid.n()
        )));
    }
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|m| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (a / m as f64, b / m as f64)
        })
        .collect();
    let values = (0..grid.n())
        .map(|j| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    let (c, s) = grid.trig(i + 1, j);
                    a * c + b * s
                })
                .sum()
        })
        .collect();
    Field::from_values(grid, values)
}

/// A random zero-mean field rescaled to `norm(kind) == target`.
pub fn random_with_norm(
    grid: &PeriodicGrid,
    modes: usize,
    kind: NormKind,
    target: f64,
    rng: &mut impl Rng,
) -> Result<Field> {
    let f = random_band_limited(grid, modes, rng)?;
    let current = f.norm(kind);
    Ok(f.scaled(target / current))
}
