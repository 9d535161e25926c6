//! Closed-form solutions used by the oracle experiment.

use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::grid::{Field, PeriodicGrid};

/// `mean + amplitude * e^{-nu (2 pi m)^2 t} * shape(2 pi m x)` for the heat
/// equation, with `shape` either sine or cosine.
pub fn heat_mode(grid: &PeriodicGrid, amplitude: f64, mode: u32, cosine: bool, mean: f64, nu: f64, t: f64) -> Result<Field> {
    let k = 2.0 * PI * mode as f64;
    let a = amplitude * (-nu * k * k * t).exp();
    Field::sample(grid, |x| mean + a * if cosine { (k * x).cos() } else { (k * x).sin() })
}

/// Modified Bessel function `I_k(z)` by its power series.
pub fn bessel_i(k: usize, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = (1..=k).fold(1.0, |acc, j| acc * half / j as f64);
    let mut sum = term;
    for m in 1..500 {
        term *= half * half / (m as f64 * (m + k) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Largest `a / (4 pi nu)` accepted by [`cole_hopf_sine`].
pub const MAX_COLE_HOPF_KAPPA: f64 = 40.0;

/// Viscous Burgers (`f = u^2 / 2`, no forcing) from `u0 = a sin(2 pi x)`:
/// `u = -2 nu phi_x / phi` where `phi` solves the heat equation from
/// `exp(kappa cos(2 pi x))`, expanded in modified Bessel functions.
pub fn cole_hopf_sine(grid: &PeriodicGrid, amplitude: f64, nu: f64, t: f64) -> Result<Field> {
    let kappa = amplitude / (4.0 * PI * nu);
    if !(kappa.abs() <= MAX_COLE_HOPF_KAPPA) || !(t >= 0.0) {
        return Err(LabError::Precondition(format!(
            "Cole-Hopf series needs |a| / (4 pi nu) <= {MAX_COLE_HOPF_KAPPA} and t >= 0, got {kappa} and t = {t}"
        )));
    }
    let terms = 60 + 2 * kappa.abs().ceil() as usize;
    let coeffs: Vec<f64> = (1..terms)
        .map(|k| {
            let kk = 2.0 * PI * k as f64;
            2.0 * bessel_i(k, kappa.abs()) * (-nu * kk * kk * t).exp()
        })
        .collect();
    // A negative amplitude is the positive case shifted by half a period.
    let shift = if kappa < 0.0 { 0.5 } else { 0.0 };
    let i0 = bessel_i(0, kappa.abs());
    Field::sample(grid, |x| {
        let (mut phi, mut phi_x) = (i0, 0.0);
        for (i, c) in coeffs.iter().enumerate() {
            let kk = 2.0 * PI * (i + 1) as f64;
            phi += c * (kk * (x + shift)).cos();
            phi_x -= c * kk * (kk * (x + shift)).sin();
        }
        -2.0 * nu * phi_x / phi
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_values() {
        assert!((bessel_i(0, 1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i(1, 1.0) - 0.565_159_103_992_485_0).abs() < 1e-15);
        assert!((bessel_i(2, 3.0) - 2.245_212_440_929_951_5).abs() < 1e-13);
    }

    #[test]
    fn cole_hopf_starts_from_the_sine() {
        let g = PeriodicGrid::new(32).unwrap();
        for a in [1.0, -0.5] {
            let u = cole_hopf_sine(&g, a, 0.05, 0.0).unwrap();
            let s = Field::sample(&g, |x| a * (2.0 * PI * x).sin()).unwrap();
            assert!(u.sup_distance(&s) < 1e-12);
        }
        assert!(cole_hopf_sine(&g, 10.0, 1e-3, 0.1).is_err());
    }

    #[test]
    fn heat_mode_at_zero_is_the_profile() {
        let g = PeriodicGrid::new(16).unwrap();
        let u = heat_mode(&g, 2.0, 3, true, 0.5, 0.1, 0.0).unwrap();
        assert!((u.values()[0] - 2.5).abs() < 1e-15);
    }
}
