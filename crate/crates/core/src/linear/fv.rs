//! Positivity-preserving finite-volume scheme for `w_t = nu w_xx - (a w)_x`:
//! MUSCL reconstruction with the minmod limiter, upwind interface flux,
//! central diffusion and SSP-RK2 in time.

use super::CoefficientPath;
use crate::error::{LabError, Result};
use crate::grid::{self, PeriodicGrid};

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

pub(crate) struct FiniteVolume<'a> {
    grid: PeriodicGrid,
    nu: f64,
    coeff: &'a CoefficientPath,
    blowup_linf: f64,
    max_dt: f64,
    t: f64,
    w: Vec<f64>,
}

impl<'a> FiniteVolume<'a> {
    pub(crate) fn new(grid: PeriodicGrid, nu: f64, blowup_linf: f64, coeff: &'a CoefficientPath, t0: f64, w0: Vec<f64>) -> Self {
        let dx = grid.dx();
        let rate = 3.0 * coeff.speed_bound() / dx + 2.0 * nu / (dx * dx) + coeff.rho_bound();
        Self {
            grid,
            nu,
            coeff,
            blowup_linf,
            max_dt: 0.9 / rate,
            t: t0,
            w: w0,
        }
    }

    pub(crate) fn time(&self) -> f64 {
        self.t
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.w
    }

    /// Semi-discrete right-hand side.
    pub(crate) fn rhs(&self, t: f64, w: &[f64]) -> Result<Vec<f64>> {
        let a = self.coeff.at(t)?;
        let a = a.values();
        let n = w.len();
        let dx = self.grid.dx();
        let at = |j: isize| w[j.rem_euclid(n as isize) as usize];
        // fluxes[j] is the flux through the interface j + 1/2.
        let fluxes: Vec<f64> = (0..n as isize)
            .map(|j| {
                let speed = 0.5 * (a[j as usize] + a[((j + 1) as usize) % n]);
                let left = at(j) + 0.5 * minmod(at(j) - at(j - 1), at(j + 1) - at(j));
                let right = at(j + 1) - 0.5 * minmod(at(j + 1) - at(j), at(j + 2) - at(j + 1));
                let upwind = if speed >= 0.0 { speed * left } else { speed * right };
                upwind - self.nu * (at(j + 1) - at(j)) / dx
            })
            .collect();
        Ok((0..n).map(|j| -(fluxes[j] - fluxes[(j + n - 1) % n]) / dx).collect())
    }

    pub(crate) fn advance_to(&mut self, target: f64) -> Result<()> {
        let tol = 1e-12 * target.abs().max(1.0);
        while self.t < target - tol {
            let h = self.max_dt.min(target - self.t);
            let t = self.t;
            let k1 = self.rhs(t, &self.w)?;
            let stage: Vec<f64> = self.w.iter().zip(&k1).map(|(w, k)| w + h * k).collect();
            let k2 = self.rhs(t + h, &stage)?;
            self.w = self
                .w
                .iter()
                .zip(&stage)
                .zip(&k2)
                .map(|((w, s), k)| 0.5 * w + 0.5 * (s + h * k))
                .collect();
            self.t = if target - (t + h) <= tol { target } else { t + h };
            let linf = grid::linf(&self.w);
            if !linf.is_finite() {
                return Err(LabError::NonFinite(format!("linear solution at t = {}", self.t)));
            }
            if linf > self.blowup_linf {
                return Err(LabError::Blowup {
                    t: self.t,
                    linf,
                    trajectory: Box::new(crate::solver::Trajectory::empty(
                        &self.grid,
                        &crate::solver::SolverConfig::new(self.nu, self.grid.n(), h),
                        self.t,
                    )),
                });
            }
        }
        self.t = target.max(self.t);
        Ok(())
    }
}
