//! Flux functions `f` with their first two derivatives.
//!
//! Every model is validated at construction by comparing `f'` and `f''`
//! against central differences of `f` and `f'` on a sampling range
//! (default `[-10, 10]`). The convexity floor `sigma_floor` is a *claim*;
//! [`FluxModel::check_convexity`] is what verifies it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Field;
use crate::quadrature::GaussLegendre;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const VALIDATION_SAMPLES: usize = 2001;
const VALIDATION_RTOL: f64 = 1e-6;
const CONVEXITY_SAMPLES: usize = 10_001;
pub const DEFAULT_CUSTOM_QUAD_POINTS: usize = 16;

#[derive(Clone)]
pub enum FluxKind {
    Zero,
    /// `f(u) = c u`.
    Linear(f64),
    /// `f(u) = u^2 / 2`.
    Quadratic,
    /// `f(u) = sum_i coeffs[i] u^i`.
    Polynomial(Vec<f64>),
    Custom {
        label: String,
        f: ScalarFn,
        df: ScalarFn,
        d2f: ScalarFn,
    },
}

impl fmt::Debug for FluxKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FluxKind::Zero => write!(f, "Zero"),
            FluxKind::Linear(c) => write!(f, "Linear({c})"),
            FluxKind::Quadratic => write!(f, "Quadratic"),
            FluxKind::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            FluxKind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FluxModel {
    kind: FluxKind,
    sigma_floor: f64,
    validation_range: (f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvexityCheck {
    pub holds: bool,
    pub observed_min_fpp: f64,
    pub samples: usize,
}

/// Config-file form of a flux.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSpec {
    pub kind: String,
    #[serde(default)]
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub sigma_floor: f64,
    #[serde(default)]
    pub validation_range: Option<(f64, f64)>,
}

impl FluxModel {
    pub fn new(kind: FluxKind, sigma_floor: f64) -> Result<Self> {
        Self::with_validation_range(kind, sigma_floor, (-10.0, 10.0))
    }

    pub fn with_validation_range(kind: FluxKind, sigma_floor: f64, range: (f64, f64)) -> Result<Self> {
        if !(sigma_floor >= 0.0 && sigma_floor.is_finite()) {
            return Err(LabError::InvalidFlux(format!(
                "sigma_floor must be finite and >= 0, got {sigma_floor}"
            )));
        }
        if !(range.0 < range.1 && range.0.is_finite() && range.1.is_finite()) {
            return Err(LabError::InvalidFlux(format!(
                "invalid validation range [{}, {}]",
                range.0, range.1
            )));
        }
        if let FluxKind::Polynomial(c) = &kind {
            if c.iter().any(|v| !v.is_finite()) {
                return Err(LabError::InvalidFlux("non-finite polynomial coefficient".into()));
            }
        }
        if let FluxKind::Linear(c) = &kind {
            if !c.is_finite() {
                return Err(LabError::InvalidFlux("non-finite linear speed".into()));
            }
        }
        let model = Self {
            kind,
            sigma_floor,
            validation_range: range,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn zero() -> Self {
        Self::new(FluxKind::Zero, 0.0).expect("zero flux is valid")
    }

    pub fn linear(c: f64) -> Result<Self> {
        Self::new(FluxKind::Linear(c), 0.0)
    }

    /// `u^2 / 2`, claiming `f'' >= 1`.
    pub fn quadratic() -> Self {
        Self::new(FluxKind::Quadratic, 1.0).expect("quadratic flux is valid")
    }

    pub fn polynomial(coeffs: Vec<f64>, sigma_floor: f64) -> Result<Self> {
        Self::new(FluxKind::Polynomial(coeffs), sigma_floor)
    }

    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma_floor: f64,
    ) -> Result<Self> {
        Self::new(
            FluxKind::Custom {
                label: label.into(),
                f: Arc::new(f),
                df: Arc::new(df),
                d2f: Arc::new(d2f),
            },
            sigma_floor,
        )
    }

    pub fn from_spec(spec: &FluxSpec) -> Result<Self> {
        let kind = match spec.kind.as_str() {
            "zero" => FluxKind::Zero,
            "linear" => match spec.coefficients.as_slice() {
                [c] => FluxKind::Linear(*c),
                _ => {
                    return Err(LabError::InvalidFlux(
                        "linear flux takes exactly one coefficient (the speed)".into(),
                    ))
                }
            },
            "quadratic" => FluxKind::Quadratic,
            "polynomial" => {
                if spec.coefficients.is_empty() {
                    return Err(LabError::InvalidFlux("polynomial flux needs coefficients".into()));
                }
                FluxKind::Polynomial(spec.coefficients.clone())
            }
            other => return Err(LabError::InvalidFlux(format!("unknown flux kind {other:?}"))),
        };
        let range = spec.validation_range.unwrap_or((-10.0, 10.0));
        Self::with_validation_range(kind, spec.sigma_floor, range)
    }

    pub fn kind(&self) -> &FluxKind {
        &self.kind
    }

    pub fn sigma_floor(&self) -> f64 {
        self.sigma_floor
    }

    pub fn validation_range(&self) -> (f64, f64) {
        self.validation_range
    }

    /// Polynomial degree of `f`, when `f` is a polynomial.
    pub fn degree(&self) -> Option<usize> {
        match &self.kind {
            FluxKind::Zero => Some(0),
            FluxKind::Linear(_) => Some(1),
            FluxKind::Quadratic => Some(2),
            FluxKind::Polynomial(c) => Some(c.iter().rposition(|&v| v != 0.0).unwrap_or(0)),
            FluxKind::Custom { .. } => None,
        }
    }

    /// `max(4, degree)` for polynomial fluxes, 16 otherwise.
    pub fn default_quad_points(&self) -> usize {
        match self.degree() {
            Some(d) => d.max(4),
            None => DEFAULT_CUSTOM_QUAD_POINTS,
        }
    }

    /// `f(u)`, `f'(u)` or `f''(u)`.
    pub fn eval(&self, u: f64, deriv: u8) -> Result<f64> {
        let v = match deriv {
            0 => self.value(u),
            1 => self.slope(u),
            2 => self.curvature(u),
            _ => {
                return Err(LabError::Precondition(format!(
                    "flux derivative order {deriv} not in 0..=2"
                )))
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(LabError::NonFinite(format!("flux derivative {deriv} at u = {u}")))
        }
    }

    pub(crate) fn value(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear(c) => c * u,
            FluxKind::Quadratic => 0.5 * u * u,
            FluxKind::Polynomial(c) => horner(c, u),
            FluxKind::Custom { f, .. } => f(u),
        }
    }

    pub(crate) fn slope(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear(c) => *c,
            FluxKind::Quadratic => u,
            FluxKind::Polynomial(c) => horner_derivative(c, u, 1),
            FluxKind::Custom { df, .. } => df(u),
        }
    }

    pub(crate) fn curvature(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Zero | FluxKind::Linear(_) => 0.0,
            FluxKind::Quadratic => 1.0,
            FluxKind::Polynomial(c) => horner_derivative(c, u, 2),
            FluxKind::Custom { d2f, .. } => d2f(u),
        }
    }

    /// Nodewise `f(u_j)`.
    pub(crate) fn apply(&self, values: &[f64]) -> Vec<f64> {
        match &self.kind {
            FluxKind::Zero => vec![0.0; values.len()],
            FluxKind::Quadratic => values.iter().map(|u| 0.5 * u * u).collect(),
            _ => values.iter().map(|&u| self.value(u)).collect(),
        }
    }

    /// `max_j |f'(u_j)|`.
    pub(crate) fn max_speed(&self, values: &[f64]) -> f64 {
        match &self.kind {
            FluxKind::Zero => 0.0,
            FluxKind::Linear(c) => c.abs(),
            _ => values.iter().fold(0.0, |m: f64, &u| m.max(self.slope(u).abs())),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.validation_range;
        for i in 0..VALIDATION_SAMPLES {
            let u = lo + (hi - lo) * i as f64 / (VALIDATION_SAMPLES - 1) as f64;
            let (f, df, d2f) = (self.value(u), self.slope(u), self.curvature(u));
            if !(f.is_finite() && df.is_finite() && d2f.is_finite()) {
                return Err(LabError::InvalidFlux(format!(
                    "flux not finite at u = {u} inside validation range [{lo}, {hi}]"
                )));
            }
            let h = 1e-4 * u.abs().max(1.0);
            let fd1 = (self.value(u + h) - self.value(u - h)) / (2.0 * h);
            let fd2 = (self.slope(u + h) - self.slope(u - h)) / (2.0 * h);
            if (df - fd1).abs() > VALIDATION_RTOL * df.abs().max(1.0) {
                return Err(LabError::InvalidFlux(format!(
                    "f' inconsistent with f at u = {u}: {df} vs finite difference {fd1} (validation range [{lo}, {hi}])"
                )));
            }
            if (d2f - fd2).abs() > VALIDATION_RTOL * d2f.abs().max(1.0) {
                return Err(LabError::InvalidFlux(format!(
                    "f'' inconsistent with f' at u = {u}: {d2f} vs finite difference {fd2} (validation range [{lo}, {hi}])"
                )));
            }
        }
        Ok(())
    }

    /// Samples `f''` on `[lo, hi]` and compares its minimum with `sigma_floor`.
    pub fn check_convexity(&self, lo: f64, hi: f64) -> Result<ConvexityCheck> {
        if !(lo < hi) {
            return Err(LabError::Precondition(format!("empty interval [{lo}, {hi}]")));
        }
        let mut observed = f64::INFINITY;
        for i in 0..CONVEXITY_SAMPLES {
            let u = lo + (hi - lo) * i as f64 / (CONVEXITY_SAMPLES - 1) as f64;
            observed = observed.min(self.eval(u, 2)?);
        }
        Ok(ConvexityCheck {
            holds: observed >= self.sigma_floor,
            observed_min_fpp: observed,
            samples: CONVEXITY_SAMPLES,
        })
    }

    /// Nodewise `a = int_0^1 f'(v + tau w) dtau` by Gauss–Legendre in `tau`.
    ///
    /// With this `a`, `a w = f(v + w) - f(v)` up to quadrature error, which
    /// vanishes for polynomial fluxes at the default number of points.
    pub fn advection_coefficient(&self, v: &Field, w: &Field, quad_points: usize) -> Result<Field> {
        v.same_grid(w)?;
        if quad_points < 2 {
            return Err(LabError::Precondition(format!(
                "advection coefficient needs at least 2 quadrature points, got {quad_points}"
            )));
        }
        let values = match &self.kind {
            FluxKind::Zero => vec![0.0; v.len()],
            FluxKind::Linear(c) => vec![*c; v.len()],
            FluxKind::Quadratic => v
                .values()
                .iter()
                .zip(w.values())
                .map(|(&vj, &wj)| vj + 0.5 * wj)
                .collect(),
            _ => {
                let rule = GaussLegendre::unit_interval(quad_points);
                v.values()
                    .iter()
                    .zip(w.values())
                    .map(|(&vj, &wj)| rule.integrate(|tau| self.slope(vj + tau * wj)))
                    .collect()
            }
        };
        Field::from_values(v.grid(), values)
            .map_err(|_| LabError::NonFinite("advection coefficient".into()))
    }

    /// The flux `u -> f(u - c)`, which turns solutions `u` into `u + c`.
    pub fn translated(&self, c: f64) -> Result<FluxModel> {
        let kind = match &self.kind {
            FluxKind::Zero => FluxKind::Zero,
            FluxKind::Linear(s) => FluxKind::Polynomial(vec![-s * c, *s]),
            FluxKind::Quadratic => FluxKind::Polynomial(vec![0.5 * c * c, -c, 0.5]),
            FluxKind::Polynomial(coeffs) => FluxKind::Polynomial(shift_polynomial(coeffs, c)),
            FluxKind::Custom { label, f, df, d2f } => {
                let (f, df, d2f) = (f.clone(), df.clone(), d2f.clone());
                FluxKind::Custom {
                    label: format!("{label} shifted by {c}"),
                    f: Arc::new(move |u| f(u - c)),
                    df: Arc::new(move |u| df(u - c)),
                    d2f: Arc::new(move |u| d2f(u - c)),
                }
            }
        };
        let (lo, hi) = self.validation_range;
        Self::with_validation_range(kind, self.sigma_floor, (lo + c, hi + c))
    }
}

fn horner(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * u + ci)
}

/// `d^k/du^k` of the polynomial with coefficients `c`.
fn horner_derivative(c: &[f64], u: f64, k: usize) -> f64 {
    if c.len() <= k {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in (k..c.len()).rev() {
        let falling: f64 = (0..k).map(|j| (i - j) as f64).product();
        acc = acc * u + c[i] * falling;
    }
    acc
}

/// Coefficients of `p(u - c)`.
fn shift_polynomial(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len()];
    for (i, &a) in coeffs.iter().enumerate() {
        let mut binom = 1.0;
        for k in 0..=i {
            if k > 0 {
                binom = binom * (i - k + 1) as f64 / k as f64;
            }
            out[k] += a * binom * (-c).powi((i - k) as i32);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;

    #[test]
    fn evaluation_examples() {
        let q = FluxModel::quadratic();
        assert_eq!(q.eval(3.0, 1).unwrap(), 3.0);
        for u in [-4.0, 0.0, 2.5, 100.0] {
            assert_eq!(q.eval(u, 2).unwrap(), 1.0);
        }
        assert_eq!(FluxModel::linear(2.0).unwrap().eval(5.0, 0).unwrap(), 10.0);
        assert!(q.eval(1.0, 3).is_err());
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        let f = FluxModel::with_validation_range(
            FluxKind::Custom {
                label: "exp".into(),
                f: Arc::new(f64::exp),
                df: Arc::new(f64::exp),
                d2f: Arc::new(f64::exp),
            },
            0.0,
            (-5.0, 5.0),
        )
        .unwrap();
        assert!(matches!(f.eval(1000.0, 0), Err(LabError::NonFinite(_))));
    }

    #[test]
    fn convexity_examples() {
        let q = FluxModel::quadratic().check_convexity(-5.0, 5.0).unwrap();
        assert!(q.holds && q.observed_min_fpp == 1.0);
        assert!(q.samples >= 10_000);

        let lin = FluxModel::new(FluxKind::Linear(1.5), 0.1).unwrap();
        let c = lin.check_convexity(-5.0, 5.0).unwrap();
        assert!(!c.holds && c.observed_min_fpp == 0.0);

        let quartic = FluxModel::polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0], 0.5).unwrap();
        let c = quartic.check_convexity(-1.0, 1.0).unwrap();
        assert!(!c.holds);
        assert!(c.observed_min_fpp.abs() < 1e-12);
        assert!(quartic.check_convexity(1.0, 1.0).is_err());
    }

    #[test]
    fn inconsistent_custom_flux_rejected() {
        let bad = FluxModel::custom("bad", |u| u * u, |u| u, |_| 1.0, 0.0);
        assert!(matches!(bad, Err(LabError::InvalidFlux(_))));
        let overflow = FluxModel::with_validation_range(
            FluxKind::Custom {
                label: "exp".into(),
                f: Arc::new(f64::exp),
                df: Arc::new(f64::exp),
                d2f: Arc::new(f64::exp),
            },
            0.0,
            (-800.0, 800.0),
        );
        assert!(overflow.unwrap_err().to_string().contains("validation range"));
    }

    #[test]
    fn advection_coefficient_examples() {
        let g = PeriodicGrid::new(16).unwrap();
        let q = FluxModel::quadratic();
        let a = q
            .advection_coefficient(&Field::constant(&g, 1.0), &Field::constant(&g, 2.0), 4)
            .unwrap();
        assert!(a.values().iter().all(|&v| (v - 2.0).abs() < 1e-15));

        let v = Field::sample(&g, |x| (6.0 * x).sin() * 2.0).unwrap();
        let cubic = FluxModel::polynomial(vec![0.0, 0.3, -0.2, 0.7], 0.0).unwrap();
        let a = cubic.advection_coefficient(&v, &Field::zeros(&g), 4).unwrap();
        for (aj, vj) in a.values().iter().zip(v.values()) {
            assert!((aj - cubic.slope(*vj)).abs() < 1e-13);
        }

        let lin = FluxModel::linear(-0.7).unwrap();
        let a = lin.advection_coefficient(&v, &v, 4).unwrap();
        assert!(a.values().iter().all(|&x| x == -0.7));
        assert!(q.advection_coefficient(&v, &v, 1).is_err());
    }

    #[test]
    fn translation_shifts_the_argument() {
        let q = FluxModel::quadratic();
        let t = q.translated(3.0).unwrap();
        for u in [-2.0, 0.0, 1.5, 7.0] {
            assert!((t.value(u + 3.0) - q.value(u)).abs() < 1e-12);
            assert!((t.slope(u + 3.0) - q.slope(u)).abs() < 1e-12);
        }
        let p = FluxModel::polynomial(vec![0.1, 0.0, 0.5, 0.25], 0.0).unwrap();
        let t = p.translated(-1.25).unwrap();
        for u in [-2.0, 0.0, 1.5] {
            assert!((t.value(u - 1.25) - p.value(u)).abs() < 1e-12);
        }
        assert_eq!(t.degree(), Some(3));
    }

    #[test]
    fn spec_parsing() {
        let spec = FluxSpec {
            kind: "linear".into(),
            coefficients: vec![2.0],
            sigma_floor: 0.0,
            validation_range: None,
        };
        assert_eq!(FluxModel::from_spec(&spec).unwrap().slope(9.0), 2.0);
        let bad = FluxSpec {
            kind: "cubic-ish".into(),
            ..spec
        };
        assert!(FluxModel::from_spec(&bad).is_err());
    }

    #[test]
    fn default_quadrature_points() {
        assert_eq!(FluxModel::quadratic().default_quad_points(), 4);
        let p = FluxModel::polynomial(vec![0.0; 8].into_iter().chain([1.0]).collect(), 0.0).unwrap();
        assert_eq!(p.default_quad_points(), 8);
        let c = FluxModel::custom("cosh", f64::cosh, f64::sinh, f64::cosh, 1.0).unwrap();
        assert_eq!(c.default_quad_points(), 16);
    }
}
