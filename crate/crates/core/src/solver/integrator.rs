//! Shared pseudo-spectral time stepper for equations of the form
//! `u_t = nu u_xx + N(t, u)`, with the diffusion treated by an integrating
//! factor (IF-RK3) or Crank–Nicolson (CN-AB2).

use rustfft::num_complex::Complex64;

use super::{Scheme, SolverConfig};
use crate::error::{LabError, Result};
use crate::grid::{self, PeriodicGrid};

/// Explicit part `N` of the right-hand side, in spectral form.
pub(crate) trait Explicit {
    /// `N(t, u)` as unnormalised Fourier coefficients, given nodal values.
    fn rhs(&mut self, t: f64, values: &[f64]) -> Result<Vec<Complex64>>;
    /// Maximal transport speed, for the advective CFL number.
    fn max_speed(&mut self, t: f64, values: &[f64]) -> Result<f64>;
}

/// Mask applied to spectral derivatives of nonlinear products.
pub(crate) fn product_mask(grid: &PeriodicGrid, dealias: bool) -> Vec<f64> {
    let nyquist = grid.n() / 2;
    (0..grid.n())
        .map(|k| {
            let keep = if dealias { grid.keeps_mode(k) } else { k != nyquist };
            if keep {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// `-i k mask_k F_k`, with the mean mode exactly zero.
pub(crate) fn conservative_derivative(grid: &PeriodicGrid, mask: &[f64], product: &[f64]) -> Vec<Complex64> {
    let mut spec = grid.forward(product);
    for (k, c) in spec.iter_mut().enumerate() {
        let kw = grid.wavenumbers()[k] * mask[k];
        *c = if k == 0 || kw == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(c.im * kw, -c.re * kw)
        };
    }
    spec
}

pub(crate) struct Core<E: Explicit> {
    pub(crate) grid: PeriodicGrid,
    pub(crate) cfg: SolverConfig,
    pub(crate) explicit: E,
    t: f64,
    spectrum: Vec<Complex64>,
    values: Vec<f64>,
    /// `N` at the current state, reused by the next step.
    n0: Option<(f64, Vec<Complex64>)>,
    /// `N` and step size of the previous step, for Adams–Bashforth.
    previous: Option<(f64, Vec<Complex64>)>,
    /// `nu k^2` per index.
    decay: Vec<f64>,
}

impl<E: Explicit> Core<E> {
    pub(crate) fn new(grid: PeriodicGrid, cfg: SolverConfig, explicit: E, t0: f64, values: Vec<f64>) -> Self {
        let decay = grid.wavenumbers().iter().map(|k| cfg.nu * k * k).collect();
        Self {
            spectrum: grid.forward(&values),
            grid,
            cfg,
            explicit,
            t: t0,
            values,
            n0: None,
            previous: None,
            decay,
        }
    }

    pub(crate) fn time(&self) -> f64 {
        self.t
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// `N` at the current state, cached for the next step.
    pub(crate) fn current_rhs(&mut self) -> Result<&[Complex64]> {
        let fresh = !matches!(&self.n0, Some((t, _)) if *t == self.t);
        if fresh {
            let n0 = self.explicit.rhs(self.t, &self.values)?;
            self.n0 = Some((self.t, n0));
        }
        Ok(&self.n0.as_ref().expect("cached above").1)
    }

    /// Full time derivative `nu u_xx + N` in spectral form.
    pub(crate) fn time_derivative_spectrum(&mut self) -> Result<Vec<Complex64>> {
        let decay = self.decay.clone();
        let spectrum = self.spectrum.clone();
        let n0 = self.current_rhs()?;
        Ok(n0
            .iter()
            .zip(&spectrum)
            .zip(&decay)
            .map(|((n, u), d)| n - u * *d)
            .collect())
    }

    /// Advances to `target` with base step `cfg.dt`, sub-stepping when the
    /// advective CFL number exceeds `cfg.cfl_safety`.
    pub(crate) fn advance_to(&mut self, target: f64) -> Result<()> {
        let tol = 1e-12 * target.abs().max(1.0);
        while self.t < target - tol {
            let start = self.t;
            let base = self.cfg.dt.min(target - start);
            let speed = self.explicit.max_speed(start, &self.values)?;
            let cfl = speed * base / self.grid.dx();
            let parts = if cfl > self.cfg.cfl_safety {
                (cfl / self.cfg.cfl_safety).ceil() as usize
            } else {
                1
            };
            let h = base / parts as f64;
            let end = if target - (start + base) <= tol { target } else { start + base };
            for i in 0..parts {
                let t_next = if i + 1 == parts { end } else { start + (i + 1) as f64 * h };
                self.step(h, t_next)?;
            }
        }
        self.t = target.max(self.t);
        Ok(())
    }

    fn step(&mut self, h: f64, t_next: f64) -> Result<()> {
        let t = self.t;
        let n0 = self.current_rhs()?.to_vec();
        let bootstrap = !matches!(&self.previous, Some((hp, _)) if (hp - h).abs() <= 1e-9 * h);
        let next = match self.cfg.scheme {
            Scheme::CnAb2 if !bootstrap => {
                let (_, prev) = self.previous.as_ref().expect("checked above");
                self.spectrum
                    .iter()
                    .zip(&n0)
                    .zip(prev)
                    .zip(&self.decay)
                    .map(|(((u, a), b), d)| {
                        let half = 0.5 * d * h;
                        (u * (1.0 - half) + (a * 1.5 - b * 0.5) * h) / (1.0 + half)
                    })
                    .collect()
            }
            _ => self.rk3(t, h, &n0)?,
        };
        self.previous = Some((h, n0));
        self.spectrum = next;
        self.values = self.grid.inverse(self.spectrum.clone());
        self.t = t_next;
        self.n0 = None;
        let linf = grid::linf(&self.values);
        if !linf.is_finite() || self.values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("solution at t = {t_next}")));
        }
        if linf > self.cfg.blowup_linf {
            return Err(LabError::Blowup {
                t: t_next,
                linf,
                trajectory: Box::new(super::Trajectory::empty(&self.grid, &self.cfg, t_next)),
            });
        }
        Ok(())
    }

    /// Integrating-factor Kutta RK3 with stage times `t, t + h/2, t + h`.
    fn rk3(&mut self, t: f64, h: f64, n0: &[Complex64]) -> Result<Vec<Complex64>> {
        let full: Vec<f64> = self.decay.iter().map(|d| (-d * h).exp()).collect();
        let half: Vec<f64> = self.decay.iter().map(|d| (-d * 0.5 * h).exp()).collect();
        let u = &self.spectrum;
        let stage2: Vec<Complex64> = (0..u.len()).map(|k| (u[k] + n0[k] * (0.5 * h)) * half[k]).collect();
        let n2 = self.explicit.rhs(t + 0.5 * h, &self.grid.inverse(stage2))?;
        let stage3: Vec<Complex64> = (0..u.len())
            .map(|k| (u[k] - n0[k] * h) * full[k] + n2[k] * (2.0 * h * half[k]))
            .collect();
        let n3 = self.explicit.rhs(t + h, &self.grid.inverse(stage3))?;
        Ok((0..u.len())
            .map(|k| u[k] * full[k] + (n0[k] * full[k] + n2[k] * (4.0 * half[k]) + n3[k]) * (h / 6.0))
            .collect())
    }
}
