//! Numerical laboratory for the viscous Burgers equation
//! `u_t - nu u_xx + (f(u))_x = h` on the unit circle, with the linear
//! difference equation, contraction, pullback and synchronization
//! experiments built on top of it.

pub mod corpus;
pub mod error;
pub mod export;
pub mod flux;
pub mod forcing;
pub mod grid;
pub mod lab;
pub mod linear;
pub mod oracles;
pub mod profiles;
pub mod quadrature;
pub mod solver;

pub use error::{LabError, Result};
pub use flux::{FluxKind, FluxModel, FluxSpec};
pub use forcing::{ForcingModel, ForcingSpec, StochasticSpec};
pub use grid::{Field, NormKind, Norms, PeriodicGrid};
pub use solver::{solve, BurgersStepper, Scheme, SolverConfig, Trajectory};
