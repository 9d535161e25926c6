//! Deterministic regression corpus: a mix of fluxes, forces, viscosities,
//! amplitudes and mean offsets, all resolved at `n = 128`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::flux::FluxModel;
use crate::forcing::{make_stochastic_forcing, ForcingModel, StochasticSpec};
use crate::grid::{Field, NormKind, PeriodicGrid};
use crate::profiles::{random_band_limited, random_with_norm};
use crate::solver::SolverConfig;

pub const DEFAULT_CORPUS_SIZE: usize = 50;
pub const DEFAULT_CORPUS_SEED: u64 = 2024;

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub name: String,
    pub u0: Field,
    pub flux: FluxModel,
    pub forcing: ForcingModel,
    pub cfg: SolverConfig,
    pub t_end: f64,
    /// `sup |h|` over `[0, t_end]`.
    pub h_linf: f64,
}

const FLUXES: [&str; 5] = ["zero", "linear", "quadratic", "quartic", "cubic"];
const FORCES: [&str; 4] = ["unforced", "steady", "periodic", "stochastic"];

fn flux_named(name: &str) -> Result<FluxModel> {
    match name {
        "zero" => Ok(FluxModel::zero()),
        "linear" => FluxModel::linear(1.0),
        "quadratic" => Ok(FluxModel::quadratic()),
        // f'' = 1 + u^2
        "quartic" => FluxModel::polynomial(vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0], 1.0),
        _ => FluxModel::polynomial(vec![0.0, 0.0, 0.0, 1.0 / 3.0], 0.0),
    }
}

/// `count` cases cycling through every flux/force combination; amplitudes,
/// means and viscosities are drawn from `seed`.
pub fn regression_corpus(count: usize, seed: u64) -> Result<Vec<CorpusCase>> {
    let grid = PeriodicGrid::new(128)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_end = 1.0;
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let flux_name = FLUXES[i % FLUXES.len()];
        let force_name = FORCES[(i / FLUXES.len()) % FORCES.len()];
        let nu = [0.05, 0.1, 0.2][rng.random_range(0..3)];
        let amplitude = [0.1, 0.5, 1.0][rng.random_range(0..3)];
        let mean = [0.0, 0.3, -0.5][rng.random_range(0..3)];
        let u0 = random_with_norm(&grid, 6, NormKind::Linf, amplitude, &mut rng)?.map(|v| v + mean)?;
        let forcing = match force_name {
            "unforced" => ForcingModel::Zero,
            "steady" => ForcingModel::steady(random_with_norm(&grid, 4, NormKind::Linf, 0.5, &mut rng)?),
            "periodic" => {
                let a = random_band_limited(&grid, 4, &mut rng)?;
                let b = random_band_limited(&grid, 4, &mut rng)?;
                ForcingModel::time_periodic(vec![a, b], 0.5)?
            }
            _ => {
                let spec = StochasticSpec::new(4, 3.0, 1.0).with_horizon(t_end + 1.0);
                make_stochastic_forcing(&spec, seed.wrapping_add(i as u64))?
            }
        };
        let h_linf = forcing.sup_linf(&grid, 0.0, t_end, 1e-3)?;
        cases.push(CorpusCase {
            name: format!("case{i:02}_{flux_name}_{force_name}"),
            u0,
            flux: flux_named(flux_name)?,
            forcing,
            cfg: SolverConfig::new(nu, grid.n(), 1e-3),
            t_end,
            h_linf,
        });
    }
    Ok(cases)
}
