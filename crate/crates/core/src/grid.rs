//! Periodic grid on the unit circle, grid functions and the norms used
//! throughout the crate.
//!
//! Nodes are `x_j = j / n`; `x = 1` is identified with `x = 0`. All integrals
//! are rectangle-rule sums, which for a uniform periodic grid are exact on
//! trigonometric polynomials below the Nyquist mode. Derivatives are
//! spectral: Fourier mode `m` is multiplied by `(2 pi i m)^k`, and the
//! unpaired Nyquist mode is dropped for odd `k`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const MIN_NODES: usize = 8;

struct Plan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `2 pi m` for FFT index `k`, with `m` the signed mode number.
    wavenumbers: Vec<f64>,
    /// `cos(2 pi j / n)`, `sin(2 pi j / n)`.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

/// Uniform grid of `n` nodes on the circle of unit length.
#[derive(Clone)]
pub struct PeriodicGrid {
    plan: Arc<Plan>,
}

impl PeriodicGrid {
    /// Rejects odd or too small resolutions.
    pub fn new(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(LabError::InvalidGrid(format!(
                "odd resolution rejected (n = {n})"
            )));
        }
        if n < MIN_NODES {
            return Err(LabError::InvalidGrid(format!(
                "resolution n = {n} below minimum {MIN_NODES}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let wavenumbers = (0..n).map(|k| 2.0 * PI * signed_mode(k, n) as f64).collect();
        let (cos_table, sin_table) = (0..n)
            .map(|j| {
                let angle = 2.0 * PI * j as f64 / n as f64;
                (angle.cos(), angle.sin())
            })
            .unzip();
        Ok(Self {
            plan: Arc::new(Plan {
                n,
                forward,
                inverse,
                wavenumbers,
                cos_table,
                sin_table,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.plan.n
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.plan.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.plan.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(move |j| self.node(j))
    }

    /// Unnormalised forward DFT.
    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plan.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`Self::forward`], keeping the real part.
    pub(crate) fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.plan.inverse.process(&mut coeffs);
        let scale = 1.0 / self.n() as f64;
        coeffs.into_iter().map(|c| c.re * scale).collect()
    }

    pub(crate) fn wavenumbers(&self) -> &[f64] {
        &self.plan.wavenumbers
    }

    /// Signed Fourier mode for FFT index `k`; the Nyquist index maps to `+n/2`.
    pub fn mode(&self, k: usize) -> i64 {
        signed_mode(k, self.n())
    }

    /// 2/3-rule mask: keep modes with `3|m| < n`.
    pub(crate) fn keeps_mode(&self, k: usize) -> bool {
        3 * self.mode(k).unsigned_abs() < self.n() as u64
    }

    /// `(cos, sin)` of `2 pi m x_j`.
    pub(crate) fn trig(&self, m: usize, j: usize) -> (f64, f64) {
        let idx = (m * j) % self.n();
        (self.plan.cos_table[idx], self.plan.sin_table[idx])
    }

    /// Multiply spectral coefficients by `(i k)^order`, zeroing Nyquist for odd orders.
    pub(crate) fn differentiate_spectrum(&self, coeffs: &[Complex64], order: u32) -> Vec<Complex64> {
        let nyquist = self.n() / 2;
        let unit = match order % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if order % 2 == 1 && k == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * unit * self.plan.wavenumbers[k].powi(order as i32)
                }
            })
            .collect()
    }
}

fn signed_mode(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n()
    }
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
    /// Full Sobolev norm: function plus first derivative.
    H1,
    /// Full Sobolev norm up to the second derivative.
    H2,
}

/// All norms of one field at once.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub h1: f64,
    pub h2: f64,
}

impl Norms {
    pub fn get(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.l1,
            NormKind::L2 => self.l2,
            NormKind::Linf => self.linf,
            NormKind::H1 => self.h1,
            NormKind::H2 => self.h2,
        }
    }
}

/// Real grid function on a [`PeriodicGrid`]. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn from_values(grid: &PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(LabError::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("field value at node {j}")));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_trusted(grid: &PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.n()],
        }
    }

    /// Samples a 1-periodic function at the nodes.
    pub fn sample(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(LabError::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            })
        }
    }

    pub(crate) fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    /// Spectral derivative of order 1 to 4.
    pub fn derivative(&self, order: u32) -> Result<Field> {
        if !(1..=4).contains(&order) {
            return Err(LabError::Precondition(format!(
                "derivative order {order} not in 1..=4"
            )));
        }
        let coeffs = self.grid.differentiate_spectrum(&self.spectrum(), order);
        Field::from_values(&self.grid, self.grid.inverse(coeffs))
    }

    /// Rectangle-rule mean `<f>`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L1 => l1(&self.values),
            NormKind::L2 => l2(&self.values),
            NormKind::Linf => linf(&self.values),
            NormKind::H1 | NormKind::H2 => self.norms().get(kind),
        }
    }

    pub fn norms(&self) -> Norms {
        norms_with_spectrum(&self.grid, &self.values, &self.spectrum())
    }

    /// Rectangle-rule `L^2` inner product.
    pub fn inner(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "inner product across grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.values.len() as f64
    }

    /// `max_j |f_j - g_j|`.
    pub fn sup_distance(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "distance across grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `(w+, w-)` with `w+ - w- = w`, both nonnegative and disjointly supported.
    pub fn pos_neg_split(&self) -> (Field, Field) {
        let pos = self.values.iter().map(|&v| v.max(0.0)).collect();
        let neg = self.values.iter().map(|&v| (-v).max(0.0)).collect();
        (
            Field::from_trusted(&self.grid, pos),
            Field::from_trusted(&self.grid, neg),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field::from_trusted(&self.grid, self.values.iter().map(|v| v * s).collect())
    }

    /// The field with its mean removed.
    pub fn zero_mean_part(&self) -> Field {
        let m = self.mean();
        Field::from_trusted(&self.grid, self.values.iter().map(|v| v - m).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "arithmetic across grids");
        Field::from_trusted(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

pub(crate) fn l1(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
}

pub(crate) fn l2(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

pub(crate) fn linf(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Rectangle-rule `L^2` norm squared of the order-`p` derivative, through
/// Parseval on the differentiated spectrum.
fn derivative_l2_sq(grid: &PeriodicGrid, spectrum: &[Complex64], order: u32) -> f64 {
    let n = grid.n() as f64;
    let nyquist = grid.n() / 2;
    spectrum
        .iter()
        .zip(grid.wavenumbers())
        .enumerate()
        .map(|(k, (c, &kw))| {
            if order % 2 == 1 && k == nyquist {
                0.0
            } else {
                c.norm_sqr() * kw.powi(2 * order as i32)
            }
        })
        .sum::<f64>()
        / (n * n)
}

pub(crate) fn norms_with_spectrum(grid: &PeriodicGrid, values: &[f64], spectrum: &[Complex64]) -> Norms {
    let l2v = l2(values);
    let d1 = derivative_l2_sq(grid, spectrum, 1);
    let d2 = derivative_l2_sq(grid, spectrum, 2);
    let h1_sq = l2v * l2v + d1;
    Norms {
        l1: l1(values),
        l2: l2v,
        linf: linf(values),
        h1: h1_sq.sqrt(),
        h2: (h1_sq + d2).sqrt(),
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scaled(rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(n).unwrap()
    }

    fn sine(g: &PeriodicGrid) -> Field {
        Field::sample(g, |x| (2.0 * PI * x).sin()).unwrap()
    }

    #[test]
    fn grid_construction() {
        assert_eq!(grid(8).dx(), 0.125);
        assert_eq!(grid(128).node(64), 0.5);
        let err = PeriodicGrid::new(7).unwrap_err().to_string();
        assert!(err.contains("odd resolution rejected"), "{err}");
        assert!(PeriodicGrid::new(6).is_err());
    }

    #[test]
    fn sampling() {
        let g = grid(8);
        assert!((sine(&g).values()[2] - 1.0).abs() < 1e-15);
        assert!(Field::sample(&g, |_| 3.0).unwrap().values().iter().all(|&v| v == 3.0));
        let saw = Field::sample(&g, |x| x - x.floor()).unwrap();
        for (j, v) in saw.values().iter().enumerate() {
            assert_eq!(*v, j as f64 / 8.0);
        }
        assert!(Field::sample(&g, |x| 1.0 / (x - 0.5)).is_err());
    }

    #[test]
    fn spectral_derivatives_of_sine() {
        let g = grid(64);
        let f = sine(&g);
        let d1 = f.derivative(1).unwrap();
        let d2 = f.derivative(2).unwrap();
        for (j, x) in g.nodes().enumerate() {
            assert!((d1.values()[j] - 2.0 * PI * (2.0 * PI * x).cos()).abs() < 1e-10);
            assert!((d2.values()[j] + 4.0 * PI * PI * (2.0 * PI * x).sin()).abs() < 1e-9);
        }
        let c = Field::constant(&g, 2.5);
        for k in 1..=4 {
            assert!(c.derivative(k).unwrap().norm(NormKind::Linf) < 1e-14);
        }
        assert!(f.derivative(5).is_err());
    }

    #[test]
    fn nyquist_dropped_for_odd_orders() {
        let g = grid(8);
        let alternating = Field::sample(&g, |x| (PI * 8.0 * x).cos()).unwrap();
        assert!(alternating.derivative(1).unwrap().norm(NormKind::Linf) < 1e-12);
        let d2 = alternating.derivative(2).unwrap();
        let expected = -(8.0 * PI).powi(2);
        assert!((d2.values()[0] - expected).abs() < 1e-9 * expected.abs());
    }

    #[test]
    fn means() {
        let g = grid(8);
        assert!(sine(&g).mean().abs() < 1e-14);
        assert_eq!(Field::constant(&g, 3.0).mean(), 3.0);
        let sq = Field::sample(&g, |x| (2.0 * PI * x).sin().powi(2)).unwrap();
        assert!((sq.mean() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn norms_of_sine() {
        let g = grid(128);
        let f = sine(&g);
        assert!((f.norm(NormKind::L2) - 0.5f64.sqrt()).abs() < 1e-14);
        // The rectangle rule sees the kinks of |sin| at the nodes, so the
        // discrete L1 norm is 2 cot(pi/n) / n rather than 2/pi.
        let discrete = 2.0 / (128.0 * (PI / 128.0).tan());
        assert!((f.norm(NormKind::L1) - discrete).abs() < 1e-14);
        assert!((f.norm(NormKind::L1) - 2.0 / PI).abs() < 2e-4);
        let k = 2.0 * PI;
        let h1 = (0.5 * (1.0 + k * k)).sqrt();
        let h2 = (0.5 * (1.0 + k * k + k.powi(4))).sqrt();
        assert!((f.norm(NormKind::H1) - h1).abs() < 1e-12 * h1);
        assert!((f.norm(NormKind::H2) - h2).abs() < 1e-12 * h2);
        let z = Field::zeros(&g);
        for kind in [NormKind::L1, NormKind::L2, NormKind::Linf, NormKind::H1, NormKind::H2] {
            assert_eq!(z.norm(kind), 0.0);
        }
    }

    #[test]
    fn sobolev_norms_match_derivative_fields() {
        let g = grid(32);
        let f = Field::sample(&g, |x| (2.0 * PI * x).cos() + 0.3 * (6.0 * PI * x).sin() + 0.1).unwrap();
        let d1 = f.derivative(1).unwrap().norm(NormKind::L2);
        let d2 = f.derivative(2).unwrap().norm(NormKind::L2);
        let l2 = f.norm(NormKind::L2);
        let h1 = (l2 * l2 + d1 * d1).sqrt();
        let h2 = (h1 * h1 + d2 * d2).sqrt();
        assert!((f.norm(NormKind::H1) - h1).abs() < 1e-12 * h1);
        assert!((f.norm(NormKind::H2) - h2).abs() < 1e-12 * h2);
    }

    #[test]
    fn split_of_constants_and_sine() {
        let g = grid(128);
        let (p, n) = Field::constant(&g, 5.0).pos_neg_split();
        assert!(p.values().iter().all(|&v| v == 5.0) && n.is_zero());
        let (p, n) = Field::constant(&g, -3.0).pos_neg_split();
        assert!(p.is_zero() && n.values().iter().all(|&v| v == 3.0));
        let (p, n) = sine(&g).pos_neg_split();
        let half = 1.0 / (128.0 * (PI / 128.0).tan());
        assert!((p.norm(NormKind::L1) - half).abs() < 1e-14);
        assert!((n.norm(NormKind::L1) - half).abs() < 1e-14);
        assert!((p.norm(NormKind::L1) - 1.0 / PI).abs() < 1e-4);
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = Field::zeros(&grid(8));
        let b = Field::zeros(&grid(16));
        assert!(matches!(a.same_grid(&b), Err(LabError::GridMismatch { .. })));
        assert!(Field::from_values(&grid(8), vec![0.0; 9]).is_err());
    }
}
