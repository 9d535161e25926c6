//! Experiment configuration files (TOML or JSON).

use std::fmt;
use std::path::{Path, PathBuf};

use burgers_lab::profiles::ProfileSpec;
use burgers_lab::{FluxModel, FluxSpec, ForcingModel, ForcingSpec, PeriodicGrid, SolverConfig};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_N_MAX: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Oracle,
    Contraction,
    Dissipativity,
    HarnackSweep,
    Pullback,
    StochasticSync,
    FullSuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Oracle,
        ExperimentKind::Contraction,
        ExperimentKind::Dissipativity,
        ExperimentKind::HarnackSweep,
        ExperimentKind::Pullback,
        ExperimentKind::StochasticSync,
        ExperimentKind::FullSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Oracle => "oracle",
            ExperimentKind::Contraction => "contraction",
            ExperimentKind::Dissipativity => "dissipativity",
            ExperimentKind::HarnackSweep => "harnack_sweep",
            ExperimentKind::Pullback => "pullback",
            ExperimentKind::StochasticSync => "stochastic_sync",
            ExperimentKind::FullSuite => "full_suite",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Experiment-specific knobs. Unused fields are ignored by experiments that
/// do not read them; every field has a default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub t_end: Option<f64>,
    pub tolerance: Option<f64>,
    /// Random pairs for `contraction` and `full_suite` when no explicit pair is given.
    pub pairs: Option<usize>,
    pub pair_norm: Option<f64>,
    pub pair_modes: Option<usize>,
    pub threshold_fraction: Option<f64>,
    pub midpoint_fraction: Option<f64>,
    pub rhos: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub t_prime: Option<f64>,
    pub positivity_safe: Option<bool>,
    pub n_max: Option<usize>,
    pub t_view: Option<f64>,
    pub fit_from: Option<usize>,
    pub fit_to: Option<usize>,
    pub residual_tolerance: Option<f64>,
    pub probe_sizes: Option<Vec<f64>>,
    pub probe_horizon: Option<f64>,
    pub ratio_tolerance: Option<f64>,
    pub decay_t_end: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
    pub kruzhkov_amplitudes: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub solver: SolverConfig,
    #[serde(default = "quadratic_flux")]
    pub flux: FluxSpec,
    #[serde(default = "ForcingSpec::zero")]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub initial: Option<ProfileSpec>,
    /// Second datum for pair experiments.
    #[serde(default)]
    pub initial_v: Option<ProfileSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    #[serde(default)]
    pub params: Params,
}

fn quadratic_flux() -> FluxSpec {
    FluxSpec {
        kind: "quadratic".into(),
        coefficients: Vec::new(),
        sigma_floor: 1.0,
        validation_range: None,
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<burgers_lab::LabError> for ConfigError {
    fn from(e: burgers_lab::LabError) -> Self {
        ConfigError(e.to_string())
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Parses by extension: `.json` as JSON, anything else as TOML.
pub fn parse(path: &Path, text: &str) -> Result<ExperimentConfig, ConfigError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let cfg: ExperimentConfig = if is_json {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid JSON config: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| ConfigError(format!("invalid TOML config: {e}")))?
    };
    if cfg.schema_version != SCHEMA_VERSION {
        return bad(format!(
            "unsupported schema_version {}, expected {SCHEMA_VERSION}",
            cfg.schema_version
        ));
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse(path, &text)
}

/// Everything an experiment needs, built and validated up front.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub grid: PeriodicGrid,
    pub solver: SolverConfig,
    pub flux: FluxModel,
    pub forcing: ForcingModel,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    /// Single Fourier mode under the heat equation.
    Heat,
    /// `a sin(2 pi x)` under viscous Burgers, solved by the Cole-Hopf transform.
    ColeHopf,
}

/// Which closed form applies to an oracle configuration.
pub fn oracle_kind(config: &ExperimentConfig) -> Result<OracleKind, ConfigError> {
    let Some(initial) = &config.initial else {
        return bad("oracle needs an `initial` profile");
    };
    if config.forcing.kind != "zero" {
        return bad("oracle runs need zero forcing");
    }
    let single_mode = matches!(initial.shape.as_str(), "sine" | "cosine");
    match config.flux.kind.as_str() {
        "zero" if single_mode => Ok(OracleKind::Heat),
        "quadratic" if initial.shape == "sine" && initial.mode == 1 && initial.mean == 0.0 => Ok(OracleKind::ColeHopf),
        _ => bad(
            "oracle needs either flux `zero` with a sine or cosine profile, \
             or flux `quadratic` with a zero-mean sine of mode 1",
        ),
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => bad(format!("{name} must be positive, got {x}")),
        _ => Ok(()),
    }
}

pub fn prepare(mut config: ExperimentConfig, seed_override: Option<Vec<u64>>) -> Result<Prepared, ConfigError> {
    if let Some(stride) = config.snapshot_stride {
        if stride == 0 {
            return bad("snapshot_stride must be >= 1");
        }
        config.solver.snapshot_stride = stride;
    }
    let grid = config.solver.validate()?;
    let flux = FluxModel::from_spec(&config.flux)?;
    let seeds = seed_override.unwrap_or_else(|| config.seeds.clone());
    let forcing = if config.experiment == ExperimentKind::StochasticSync {
        if config.forcing.kind != "stochastic" {
            return bad("stochastic_sync needs a stochastic forcing");
        }
        config.forcing.stochastic_spec()?;
        if !(flux.sigma_floor() > 0.0) {
            return bad(format!(
                "stochastic_sync needs a convex flux with sigma_floor > 0, got {}",
                flux.sigma_floor()
            ));
        }
        ForcingModel::Zero
    } else {
        config.forcing.build(&grid, seeds.first().copied())?
    };
    for p in [&config.initial, &config.initial_v].into_iter().flatten() {
        p.build(&grid)?;
    }
    let p = &config.params;
    for (name, v) in [
        ("t_end", p.t_end),
        ("tolerance", p.tolerance),
        ("pair_norm", p.pair_norm),
        ("t_prime", p.t_prime),
        ("t_view", p.t_view),
        ("residual_tolerance", p.residual_tolerance),
        ("probe_horizon", p.probe_horizon),
        ("ratio_tolerance", p.ratio_tolerance),
        ("decay_t_end", p.decay_t_end),
    ] {
        positive(name, v)?;
    }
    match config.experiment {
        ExperimentKind::Oracle => {
            oracle_kind(&config)?;
        }
        ExperimentKind::Contraction | ExperimentKind::StochasticSync => match (&config.initial, &config.initial_v) {
            (Some(u), Some(v)) => {
                let (mu, mv) = (u.build(&grid)?.mean(), v.build(&grid)?.mean());
                if (mu - mv).abs() > 1e-12 {
                    return bad(format!("`initial` and `initial_v` must have equal means, got {mu} and {mv}"));
                }
            }
            (None, None) => {}
            _ => return bad("give both `initial` and `initial_v`, or neither for random pairs"),
        },
        ExperimentKind::Dissipativity => {
            if config.initial.is_none() {
                return bad("dissipativity needs an `initial` profile");
            }
            if p.t_end.is_some_and(|t| t < 3.0) {
                return bad("dissipativity needs t_end >= 3");
            }
        }
        ExperimentKind::HarnackSweep => {
            if p.trials == Some(0) {
                return bad("trials must be >= 1");
            }
            if let (Some(tp), Some(t)) = (p.t_prime, p.t_end) {
                if tp >= t {
                    return bad(format!("t_prime must be below t_end, got {tp} >= {t}"));
                }
            }
        }
        ExperimentKind::Pullback => {
            if p.n_max.is_some_and(|n| n < 3) {
                return bad("n_max must be >= 3");
            }
            let need = -(p.n_max.unwrap_or(DEFAULT_N_MAX) as f64);
            if forcing.domain().0 > need {
                return bad(format!("pullback needs a forcing defined from t = {need}"));
            }
        }
        ExperimentKind::FullSuite => {}
    }
    if matches!(config.experiment, ExperimentKind::StochasticSync) && seeds.is_empty() {
        return bad("stochastic_sync needs at least one seed (config `seeds` or --seeds)");
    }
    let solver = config.solver.clone();
    Ok(Prepared {
        config,
        grid,
        solver,
        flux,
        forcing,
        seeds,
    })
}
