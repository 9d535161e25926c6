//! One runner per experiment kind. Each returns the report body, tables,
//! plots and failed assertions; writing them out is the caller's job.

use burgers_lab::corpus::{regression_corpus, CorpusCase, DEFAULT_CORPUS_SEED, DEFAULT_CORPUS_SIZE};
use burgers_lab::lab::{
    contraction_experiment, decay_rate_fit, pair_l1_series, pullback_bounded_solution, sync_ensemble, uniqueness_probe,
    Branch, ContractionOptions, ContractionReport, FitWindow, PullbackOptions, SyncOptions,
};
use burgers_lab::linear::theta_sweep;
use burgers_lab::oracles::{cole_hopf_sine, heat_mode};
use burgers_lab::profiles::random_with_norm;
use burgers_lab::solver::monitors::{
    check_linf_bound, dissipativity_report, energy_identity_residual, family_spread, h2_bound_check, kruzhkov_check,
};
use burgers_lab::{solve, Field, LabError, NormKind, Result, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{oracle_kind, ExperimentKind, OracleKind, Prepared};
use crate::output::{without, Artifacts, Cell, Table};
use crate::svg::{Plot, Series};

const MEAN_DRIFT_TOL: f64 = 1e-10;
const LINF_SLACK: f64 = 1e-8;
/// Allowed growth of `|u - v|_1` over its running minimum.
const L1_TOL: f64 = 1e-9;

pub fn run(p: &Prepared) -> Result<Artifacts> {
    match p.config.experiment {
        ExperimentKind::Oracle => oracle(p),
        ExperimentKind::Contraction => contraction(p),
        ExperimentKind::Dissipativity => dissipativity(p),
        ExperimentKind::HarnackSweep => harnack_sweep(p),
        ExperimentKind::Pullback => pullback(p),
        ExperimentKind::StochasticSync => stochastic_sync(p),
        ExperimentKind::FullSuite => full_suite(p),
    }
}

fn first_seed(p: &Prepared) -> u64 {
    p.seeds.first().copied().unwrap_or(0)
}

fn initial(p: &Prepared) -> Result<Field> {
    p.config
        .initial
        .as_ref()
        .ok_or_else(|| LabError::Precondition("missing `initial` profile".into()))?
        .build(&p.grid)
}

fn norms_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(
        "norms",
        &["t", "mean", "min", "max", "l1", "l2", "linf", "h1", "h2", "dudt_l2"],
    );
    for r in &traj.norms {
        t.push(
            [r.t, r.mean, r.min, r.max, r.l1, r.l2, r.linf, r.h1, r.h2, r.dudt_l2]
                .into_iter()
                .map(Cell::from)
                .collect(),
        );
    }
    t
}

fn mean_drift(traj: &Trajectory) -> f64 {
    let m0 = traj.norms.first().map_or(0.0, |r| r.mean);
    traj.norms.iter().map(|r| (r.mean - m0).abs()).fold(0.0, f64::max)
}

/// Mean conservation and the maximum-principle bound, shared by every single-run experiment.
fn basic_checks(art: &mut Artifacts, p: &Prepared, traj: &Trajectory, case: &str) -> Result<()> {
    let drift = mean_drift(traj);
    art.check_below("mean_drift", case, drift, MEAN_DRIFT_TOL);
    let h_linf = p.forcing.sup_linf(&p.grid, traj.t_start, traj.t_end, p.solver.dt)?;
    let bound = check_linf_bound(traj, h_linf, LINF_SLACK);
    art.check(
        bound.holds,
        "linf_bound",
        case,
        Some(bound.lhs),
        Some(bound.rhs),
        format!("|u(t)|_inf = {:e} exceeds the bound {:e}", bound.lhs, bound.rhs),
    );
    art.set("mean_drift", drift);
    art.set("linf_bound", bound);
    Ok(())
}

fn oracle(p: &Prepared) -> Result<Artifacts> {
    let kind = oracle_kind(&p.config).map_err(|e| LabError::Precondition(e.0))?;
    let spec = p.config.initial.as_ref().expect("oracle config has a profile");
    let t_end = p.config.params.t_end.unwrap_or(1.0);
    let nu = p.solver.nu;
    let u0 = spec.build(&p.grid)?;
    let traj = solve(&u0, &p.forcing, &p.flux, &p.solver, 0.0, t_end)?;
    let exact = match kind {
        OracleKind::Heat => heat_mode(&p.grid, spec.amplitude, spec.mode, spec.shape == "cosine", spec.mean, nu, t_end)?,
        OracleKind::ColeHopf => cole_hopf_sine(&p.grid, spec.amplitude, nu, t_end)?,
    };
    let tolerance = p.config.params.tolerance.unwrap_or(match kind {
        OracleKind::Heat => 1e-6,
        OracleKind::ColeHopf => 1e-4,
    });
    let u = traj.final_state().expect("trajectory ends with a snapshot");
    let sup_error = u.sup_distance(&exact);

    let mut art = Artifacts::default();
    art.set("oracle", kind);
    art.set("t_end", t_end);
    art.set("sup_error", sup_error);
    art.set("tolerance", tolerance);
    art.check_below("sup_error", "oracle", sup_error, tolerance);
    basic_checks(&mut art, p, &traj, "oracle")?;
    let residual = energy_identity_residual(&traj, &p.forcing)?;
    art.set("energy_residual_max", residual.iter().map(|r| r.1).fold(0.0, f64::max));
    art.summary.push(format!("{kind:?} oracle: sup error {sup_error:.3e} (tolerance {tolerance:.1e})"));

    let mut profile = Table::new("final_profile", &["x", "u", "exact"]);
    for ((x, a), b) in p.grid.nodes().zip(u.values()).zip(exact.values()) {
        profile.push(vec![x.into(), (*a).into(), (*b).into()]);
    }
    art.tables.push(norms_table(&traj));
    art.tables.push(Table::from_series("energy_residual", &["residual".into()], &[&residual]));
    art.tables.push(profile);
    let pts = |f: &Field| p.grid.nodes().zip(f.values().iter().copied()).collect::<Vec<_>>();
    art.plots.push((
        "final_profile".into(),
        Plot {
            title: format!("u(x, {t_end}) against the closed form"),
            x_label: "x".into(),
            y_label: "u".into(),
            log_y: false,
            series: vec![Series::new("computed", pts(u)), Series::new("exact", pts(&exact))],
        },
    ));
    Ok(art)
}

/// Explicit pair from the config, or `pairs` random zero-mean pairs of size `pair_norm` in sup norm.
fn pairs(p: &Prepared, default_count: usize) -> Result<Vec<(String, Field, Field)>> {
    if let (Some(u), Some(v)) = (&p.config.initial, &p.config.initial_v) {
        return Ok(vec![("pair".into(), u.build(&p.grid)?, v.build(&p.grid)?)]);
    }
    let prm = &p.config.params;
    let (count, size, modes) = (
        prm.pairs.unwrap_or(default_count),
        prm.pair_norm.unwrap_or(1.0),
        prm.pair_modes.unwrap_or(6),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(first_seed(p));
    (0..count)
        .map(|i| {
            let u = random_with_norm(&p.grid, modes, NormKind::Linf, size, &mut rng)?;
            let v = random_with_norm(&p.grid, modes, NormKind::Linf, size, &mut rng)?;
            Ok((format!("pair_{i:02}"), u, v))
        })
        .collect()
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::SmallPlusPart => "small_plus_part",
        Branch::SmallMinusPart => "small_minus_part",
        Branch::HarnackBranch => "harnack",
    }
}

fn contraction_checks(art: &mut Artifacts, case: &str, r: &ContractionReport, strict_split: bool) {
    art.check_below("q_observed", case, r.q_observed, 1.0);
    art.check(
        r.certificate_holds,
        "certificate",
        case,
        Some(r.q_observed),
        Some(r.q_bound),
        format!("q_observed = {:e} exceeds the {} bound {:e}", r.q_observed, branch_name(r.branch), r.q_bound),
    );
    art.check(
        r.nonexpansive,
        "l1_nonincreasing",
        case,
        Some(r.l1_worst_increase),
        Some(L1_TOL),
        format!("|u - v|_1 grew by {:e}", r.l1_worst_increase),
    );
    if strict_split {
        art.check(
            r.split_consistent,
            "split_consistent",
            case,
            Some(r.consistency_error.max(r.split_error)),
            Some(1e-6),
            format!(
                "linear split disagrees with u - v: consistency {:e}, split {:e}, balance {:e}",
                r.consistency_error, r.split_error, r.balance_error
            ),
        );
    }
}

fn contraction(p: &Prepared) -> Result<Artifacts> {
    let prm = &p.config.params;
    let t_end = prm.t_end.unwrap_or(1.0);
    let mut opts = ContractionOptions::default();
    opts.threshold_fraction = prm.threshold_fraction.unwrap_or(opts.threshold_fraction);
    opts.midpoint_fraction = prm.midpoint_fraction.unwrap_or(opts.midpoint_fraction);
    let cases = pairs(p, 20)?;
    let reports: Vec<ContractionReport> = cases
        .par_iter()
        .map(|(_, u, v)| contraction_experiment(u, v, &p.forcing, &p.flux, &p.solver, t_end, &opts))
        .collect::<Result<_>>()?;

    let mut art = Artifacts::default();
    let mut table = Table::new(
        "contraction",
        &[
            "case", "branch", "q_observed", "q_bound", "theta_observed", "balance_error", "split_error", "consistency_error",
        ],
    );
    let mut per_case = serde_json::Map::new();
    for ((name, _, _), r) in cases.iter().zip(&reports) {
        contraction_checks(&mut art, name, r, true);
        table.push(vec![
            name.as_str().into(),
            branch_name(r.branch).into(),
            r.q_observed.into(),
            r.q_bound.into(),
            r.theta_observed.into(),
            r.balance_error.into(),
            r.split_error.into(),
            r.consistency_error.into(),
        ]);
        per_case.insert(name.clone(), without(r, &["split_series", "l1_series"]));
    }
    let q_max = reports.iter().map(|r| r.q_observed).fold(f64::NEG_INFINITY, f64::max);
    art.set("t_end", t_end);
    art.set("options", opts);
    art.set("q_max", q_max);
    art.set("cases", per_case);
    art.summary.push(format!("{} pair(s), largest q_observed {q_max:.4}", reports.len()));

    let labels: Vec<String> = cases.iter().map(|c| c.0.clone()).collect();
    let series: Vec<&[(f64, f64)]> = reports.iter().map(|r| r.l1_series.as_slice()).collect();
    art.tables.push(table);
    art.tables.push(Table::from_series("l1_difference", &labels, &series));
    if let (Some((name, _, _)), Some(r)) = (cases.first(), reports.first()) {
        let mut split = Table::new("split", &["t", "plus_l1", "minus_l1"]);
        for s in &r.split_series {
            split.push(vec![s.t.into(), s.plus_l1.into(), s.minus_l1.into()]);
        }
        art.tables.push(split);
        art.plots.push((
            "split".into(),
            Plot {
                title: format!("|w+|_1 and |w-|_1 for {name}"),
                x_label: "t".into(),
                y_label: "L1 norm".into(),
                log_y: false,
                series: vec![
                    Series::new("w+", r.split_series.iter().map(|s| (s.t, s.plus_l1)).collect()),
                    Series::new("w-", r.split_series.iter().map(|s| (s.t, s.minus_l1)).collect()),
                ],
            },
        ));
    }
    art.plots.push((
        "l1_difference".into(),
        Plot {
            title: "|u(t) - v(t)|_1".into(),
            x_label: "t".into(),
            y_label: "L1 difference".into(),
            log_y: true,
            series: labels
                .iter()
                .zip(&reports)
                .map(|(l, r)| Series::new(l.clone(), r.l1_series.clone()))
                .collect(),
        },
    ));
    Ok(art)
}

/// Grid size that resolves a sine of amplitude `a` at the configured viscosity.
fn resolving_n(base: usize, a: f64, nu: f64) -> usize {
    let need = (2.0 * a / nu).ceil() as usize;
    base.max(need.next_power_of_two())
}

fn dissipativity(p: &Prepared) -> Result<Artifacts> {
    let prm = &p.config.params;
    let t_end = prm.t_end.unwrap_or(10.0);
    let u0 = initial(p)?;
    let traj = solve(&u0, &p.forcing, &p.flux, &p.solver, 0.0, t_end)?;
    let h_linf = p.forcing.sup_linf(&p.grid, 0.0, t_end, p.solver.dt)?;
    let report = dissipativity_report(&traj, h_linf)?;
    let h2 = h2_bound_check(&traj, report.entry_time.min(0.5 * t_end))?;

    let mut art = Artifacts::default();
    basic_checks(&mut art, p, &traj, "initial")?;
    art.check(
        !h2.growing,
        "h2_not_growing",
        "initial",
        Some(h2.final_h2),
        Some(h2.sup_h2_after_entry),
        "|u|_H2 still grows after the entry time",
    );
    art.set("t_end", t_end);
    art.set("h_linf", h_linf);
    art.set("dissipativity", without(&report, &["series"]));
    art.set("h2_bound", h2);
    art.summary.push(format!(
        "entry time {:.3}, ceiling {:.4e}, sup |u|_H2 after entry {:.4e}",
        report.entry_time, report.ceiling, h2.sup_h2_after_entry
    ));

    if p.flux.sigma_floor() > 0.0 {
        let amplitudes = prm.kruzhkov_amplitudes.clone().unwrap_or_else(|| vec![1.0, 10.0, 100.0]);
        let mean = u0.mean();
        let family: Vec<(f64, f64)> = amplitudes
            .par_iter()
            .map(|&a| {
                let mut cfg = p.solver.clone();
                cfg.n = resolving_n(cfg.n, a, cfg.nu);
                let grid = cfg.validate()?;
                let forcing = p.config.forcing.build(&grid, p.seeds.first().copied())?;
                let u = Field::sample(&grid, |x| mean + a * (2.0 * std::f64::consts::PI * x).sin())?;
                let tr = solve(&u, &forcing, &p.flux, &cfg, 0.0, 0.5)?;
                Ok((a, kruzhkov_check(&tr, &p.flux)?.linf_at_half))
            })
            .collect::<Result<_>>()?;
        let values: Vec<f64> = family.iter().map(|f| f.1).collect();
        let mut table = Table::new("kruzhkov", &["amplitude", "linf_at_half"]);
        for &(a, v) in &family {
            table.push(vec![a.into(), v.into()]);
        }
        art.tables.push(table);
        art.set(
            "kruzhkov",
            json!({
                "amplitudes": amplitudes,
                "linf_at_half": values,
                "spread": family_spread(&values),
            }),
        );
    }

    art.tables.push(norms_table(&traj));
    art.tables.push(Table::from_series("dissipation", &["Q".into()], &[&report.series]));
    art.plots.push((
        "dissipation".into(),
        Plot {
            title: "|u(t)|_H2 against the uniform ceiling".into(),
            x_label: "t".into(),
            y_label: "H2 norm".into(),
            log_y: true,
            series: vec![
                Series::new("|u|_H2", traj.norm_series(NormKind::H2)),
                Series::new("ceiling", vec![(0.0, report.ceiling), (t_end, report.ceiling)]),
            ],
        },
    ));
    Ok(art)
}

fn harnack_sweep(p: &Prepared) -> Result<Artifacts> {
    let prm = &p.config.params;
    let rhos = prm.rhos.clone().unwrap_or_else(|| vec![0.0, 1.0, 5.0]);
    let trials = prm.trials.unwrap_or(50);
    let t_end = prm.t_end.unwrap_or(1.0);
    let t_prime = prm.t_prime.unwrap_or(0.5 * t_end);
    let mut cfg = p.solver.clone();
    cfg.positivity_safe = prm.positivity_safe.unwrap_or(true);
    let rows = theta_sweep(&rhos, &cfg, t_prime, t_end, trials, first_seed(p))?;

    let mut art = Artifacts::default();
    let mut table = Table::new("harnack_sweep", &["rho", "theta_min", "theta_median", "theta_max", "trials"]);
    let mut thetas = Table::new("harnack_trials", &["rho", "trial", "theta"]);
    for r in &rows {
        let case = format!("rho={}", r.rho);
        for (i, &th) in r.thetas.iter().enumerate() {
            art.check(
                th > 0.0,
                "theta_positive",
                &format!("{case} trial {i}"),
                Some(th),
                Some(0.0),
                format!("theta_observed = {th:e} is not positive"),
            );
            thetas.push(vec![r.rho.into(), i.into(), th.into()]);
        }
        table.push(vec![
            r.rho.into(),
            r.theta_min.into(),
            r.theta_median.into(),
            r.theta_max.into(),
            r.trials.into(),
        ]);
        art.summary.push(format!(
            "rho {:>6}: theta min {:.4}, median {:.4}, max {:.4}",
            r.rho, r.theta_min, r.theta_median, r.theta_max
        ));
    }
    art.set("t_prime", t_prime);
    art.set("t_end", t_end);
    art.set("positivity_safe", cfg.positivity_safe);
    art.set("rows", rows.iter().map(|r| without(r, &["thetas"])).collect::<Vec<_>>());
    art.tables.push(table);
    art.tables.push(thetas);
    let envelope = |f: fn(&burgers_lab::linear::SweepRow) -> f64| rows.iter().map(|r| (r.rho, f(r))).collect();
    art.plots.push((
        "theta_envelope".into(),
        Plot {
            title: "Harnack ratio envelope".into(),
            x_label: "rho".into(),
            y_label: "theta".into(),
            log_y: false,
            series: vec![
                Series::new("min", envelope(|r| r.theta_min)),
                Series::new("median", envelope(|r| r.theta_median)),
                Series::new("max", envelope(|r| r.theta_max)),
            ],
        },
    ));
    Ok(art)
}

fn pullback(p: &Prepared) -> Result<Artifacts> {
    let prm = &p.config.params;
    let c = p.config.initial.as_ref().map_or(0.0, |s| s.mean);
    let mut opts = PullbackOptions::new(prm.n_max.unwrap_or(crate::config::DEFAULT_N_MAX), prm.t_view.unwrap_or(1.0));
    opts.fit_from = prm.fit_from.unwrap_or(opts.fit_from);
    opts.fit_to = prm.fit_to.or(opts.fit_to);
    let report = pullback_bounded_solution(c, &p.forcing, &p.flux, &p.solver, &opts)?;

    let mut art = Artifacts::default();
    match report.max_ratio {
        Some(r) => art.check_below("gap_ratio", "pullback", r, 1.0),
        None => art.check(false, "gap_ratio", "pullback", None, Some(1.0), "no gap ratio above the noise floor"),
    }
    if let Some(fit) = &report.gap_fit {
        art.check(fit.gamma > 0.0, "gap_fit", "pullback", Some(fit.gamma), Some(0.0), "gaps do not decay geometrically");
    }
    let residual_tol = prm.residual_tolerance.unwrap_or(1e-5);
    if p.forcing.is_steady() {
        art.check_below("steady_residual_h2", "pullback", report.steady_residual_h2, residual_tol);
    }

    let horizon = prm.probe_horizon.unwrap_or(6.0);
    let sizes = prm.probe_sizes.clone().unwrap_or_else(|| vec![0.1, 1.0, 10.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(first_seed(p));
    let perturbations: Vec<Field> = sizes
        .iter()
        .map(|&s| random_with_norm(&p.grid, 4, NormKind::H1, s, &mut rng))
        .collect::<Result<_>>()?;
    let window = FitWindow::new(1.0, horizon).with_floor(1e-12);
    let probes = uniqueness_probe(&report.v_traj, &perturbations, &p.solver, &p.flux, &p.forcing, horizon, window)?;
    let gammas: Vec<f64> = probes.iter().filter_map(|r| r.fit.map(|f| f.gamma)).collect();
    for (s, r) in sizes.iter().zip(&probes) {
        let case = format!("probe size {s}");
        match r.fit {
            Some(f) => art.check(f.gamma > 0.0, "probe_decay", &case, Some(f.gamma), Some(0.0), "perturbation does not decay"),
            None => art.check(r.zero_difference, "probe_decay", &case, None, None, "no decay fit for the perturbation"),
        }
    }

    art.set("c", c);
    art.set("options", opts);
    art.set("pullback", &report);
    art.set("probes", &probes);
    if gammas.len() > 1 {
        art.set("probe_gamma_spread", family_spread(&gammas));
    }
    art.summary.push(format!(
        "largest gap ratio {}, steady residual {:.3e}",
        report.max_ratio.map_or("n/a".into(), |r| format!("{r:.4}")),
        report.steady_residual_h2
    ));

    let mut gaps = Table::new("gaps", &["n", "gap", "ratio"]);
    for (&(n, g), &(_, ratio)) in report.gaps.iter().zip(report.ratios.iter().chain(std::iter::repeat(&(0, None)))) {
        gaps.push(vec![n.into(), g.into(), ratio.map_or(Cell::Text(String::new()), Cell::Num)]);
    }
    art.tables.push(gaps);
    let mut probe_table = Table::new("probes", &["size_h1", "gamma", "c", "r_squared"]);
    for r in &probes {
        let (g, cc, r2) = r.fit.map_or((f64::NAN, f64::NAN, f64::NAN), |f| (f.gamma, f.c, f.r_squared));
        probe_table.push(vec![r.size_h1.into(), g.into(), cc.into(), r2.into()]);
    }
    art.tables.push(probe_table);
    art.tables.push(norms_table(&report.v_traj));
    art.plots.push((
        "gaps".into(),
        Plot {
            title: "pullback gaps g_n".into(),
            x_label: "n".into(),
            y_label: "gap (H1)".into(),
            log_y: true,
            series: vec![Series::new("g_n", report.gaps.iter().map(|&(n, g)| (n as f64, g)).collect())],
        },
    ));
    art.plots.push((
        "probes".into(),
        Plot {
            title: "perturbations of the bounded solution".into(),
            x_label: "t".into(),
            y_label: "|u - v|_H1".into(),
            log_y: true,
            series: probes
                .iter()
                .map(|r| Series::new(format!("size {}", r.size_h1), r.series.clone()))
                .collect(),
        },
    ));
    Ok(art)
}

fn stochastic_sync(p: &Prepared) -> Result<Artifacts> {
    let prm = &p.config.params;
    let t_end = prm.t_end.unwrap_or(50.0);
    let spec = p.config.forcing.stochastic_spec()?;
    let (u0, v0) = match (&p.config.initial, &p.config.initial_v) {
        (Some(u), Some(v)) => (u.build(&p.grid)?, v.build(&p.grid)?),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(first_seed(p));
            let size = prm.pair_norm.unwrap_or(0.5);
            let modes = prm.pair_modes.unwrap_or(6);
            (
                random_with_norm(&p.grid, modes, NormKind::L1, size, &mut rng)?,
                random_with_norm(&p.grid, modes, NormKind::L1, size, &mut rng)?,
            )
        }
    };
    let ratio_tol = prm.ratio_tolerance.unwrap_or(1e-3);
    let reports = sync_ensemble(&u0, &v0, &spec, &p.seeds, &p.solver, &p.flux, t_end, &SyncOptions::default())?;

    let mut art = Artifacts::default();
    let mut table = Table::new("sync", &["seed", "final_ratio", "k_estimate", "events", "l1_worst_increase"]);
    for r in &reports {
        let case = format!("seed {}", r.seed);
        art.check_below("final_ratio", &case, r.final_ratio, ratio_tol);
        art.check(
            r.nonincreasing,
            "l1_nonincreasing",
            &case,
            Some(r.l1_worst_increase),
            Some(L1_TOL),
            format!("|u - v|_1 grew by {:e}", r.l1_worst_increase),
        );
        table.push(vec![
            r.seed.into(),
            r.final_ratio.into(),
            r.k_estimate.into(),
            r.event_times.len().into(),
            r.l1_worst_increase.into(),
        ]);
        art.summary.push(format!(
            "seed {}: final ratio {:.3e}, K {:.3}, {} event(s)",
            r.seed,
            r.final_ratio,
            r.k_estimate,
            r.event_times.len()
        ));
    }
    art.set("t_end", t_end);
    art.set("spec", &spec);
    art.set(
        "runs",
        reports
            .iter()
            .map(|r| without(r, &["l1_series", "k_running_average"]))
            .collect::<Vec<_>>(),
    );
    let labels: Vec<String> = reports.iter().map(|r| format!("seed_{}", r.seed)).collect();
    let series: Vec<&[(f64, f64)]> = reports.iter().map(|r| r.l1_series.as_slice()).collect();
    art.tables.push(table);
    art.tables.push(Table::from_series("l1_difference", &labels, &series));
    art.plots.push((
        "l1_difference".into(),
        Plot {
            title: "|u(t) - v(t)|_1 under a common stochastic forcing".into(),
            x_label: "t".into(),
            y_label: "L1 difference".into(),
            log_y: true,
            series: labels
                .iter()
                .zip(&reports)
                .map(|(l, r)| Series::new(l.clone(), r.l1_series.clone()))
                .collect(),
        },
    ));
    Ok(art)
}

struct SuiteRow {
    name: String,
    report: ContractionReport,
    gamma: Option<f64>,
    r_squared: Option<f64>,
    fit_error: Option<String>,
    mean_drift: f64,
    linf_holds: bool,
}

fn suite_case(case: &CorpusCase, v0: &Field, decay_t_end: f64, window: (f64, f64)) -> Result<SuiteRow> {
    let traj = solve(&case.u0, &case.forcing, &case.flux, &case.cfg, 0.0, case.t_end)?;
    let linf_holds = check_linf_bound(&traj, case.h_linf, LINF_SLACK).holds;
    let report = contraction_experiment(
        &case.u0,
        v0,
        &case.forcing,
        &case.flux,
        &case.cfg,
        case.t_end,
        &ContractionOptions::default(),
    )?;
    let end = decay_t_end.min(case.forcing.domain().1);
    let series = pair_l1_series(&case.u0, v0, &case.forcing, &case.flux, &case.cfg, 0.0, end)?;
    let fit = decay_rate_fit(&series, FitWindow::new(window.0, window.1.min(end)).with_floor(1e-12));
    let (gamma, r_squared, fit_error) = match fit {
        Ok(f) => (Some(f.gamma), Some(f.r_squared), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    Ok(SuiteRow {
        name: case.name.clone(),
        report,
        gamma,
        r_squared,
        fit_error,
        mean_drift: mean_drift(&traj),
        linf_holds,
    })
}

fn full_suite(p: &Prepared) -> Result<Artifacts> {
    let prm = &p.config.params;
    let count = prm.pairs.unwrap_or(DEFAULT_CORPUS_SIZE);
    let seed = p.seeds.first().copied().unwrap_or(DEFAULT_CORPUS_SEED);
    let size = prm.pair_norm.unwrap_or(0.5);
    let decay_t_end = prm.decay_t_end.unwrap_or(20.0);
    let window = prm.fit_window.unwrap_or((1.0, decay_t_end));
    let corpus = regression_corpus(count, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let partners: Vec<Field> = corpus
        .iter()
        .map(|c| Ok(&c.u0 + &random_with_norm(c.u0.grid(), 6, NormKind::Linf, size, &mut rng)?))
        .collect::<Result<_>>()?;
    let rows: Vec<SuiteRow> = corpus
        .par_iter()
        .zip(&partners)
        .map(|(c, v0)| suite_case(c, v0, decay_t_end, window))
        .collect::<Result<_>>()?;

    let mut art = Artifacts::default();
    let mut table = Table::new(
        "suite",
        &["case", "branch", "q_observed", "q_bound", "theta_observed", "gamma", "r_squared", "mean_drift"],
    );
    let opt = |v: Option<f64>| v.map_or(Cell::Text(String::new()), Cell::Num);
    art.summary.push(format!("{:<28} {:>10} {:>10} {:>10}", "case", "q", "gamma", "theta"));
    for r in &rows {
        contraction_checks(&mut art, &r.name, &r.report, false);
        art.check_below("mean_drift", &r.name, r.mean_drift, MEAN_DRIFT_TOL);
        art.check(r.linf_holds, "linf_bound", &r.name, None, None, "maximum-principle bound violated");
        match (r.gamma, &r.fit_error) {
            (Some(g), _) => art.check(g > 0.0, "gamma_positive", &r.name, Some(g), Some(0.0), format!("decay rate {g:e}")),
            (None, Some(e)) => art.check(false, "gamma_positive", &r.name, None, None, format!("decay fit failed: {e}")),
            (None, None) => {}
        }
        table.push(vec![
            r.name.as_str().into(),
            branch_name(r.report.branch).into(),
            r.report.q_observed.into(),
            r.report.q_bound.into(),
            r.report.theta_observed.into(),
            opt(r.gamma),
            opt(r.r_squared),
            r.mean_drift.into(),
        ]);
        art.summary.push(format!(
            "{:<28} {:>10.4} {:>10} {:>10.4}",
            r.name,
            r.report.q_observed,
            r.gamma.map_or("-".into(), |g| format!("{g:.4}")),
            r.report.theta_observed
        ));
    }
    art.set("corpus_size", count);
    art.set("corpus_seed", seed);
    art.set("pair_norm", size);
    art.set("decay_t_end", decay_t_end);
    art.set("fit_window", window);
    art.set(
        "cases",
        rows.iter()
            .map(|r| {
                json!({
                    "case": r.name,
                    "q_observed": r.report.q_observed,
                    "q_bound": r.report.q_bound,
                    "theta_observed": r.report.theta_observed,
                    "branch": r.report.branch,
                    "gamma": r.gamma,
                    "r_squared": r.r_squared,
                    "mean_drift": r.mean_drift,
                })
            })
            .collect::<Vec<_>>(),
    );
    art.tables.push(table);
    art.plots.push((
        "suite_q".into(),
        Plot {
            title: "observed contraction factor per corpus case".into(),
            x_label: "case index".into(),
            y_label: "q".into(),
            log_y: false,
            series: vec![Series::new(
                "q_observed",
                rows.iter().enumerate().map(|(i, r)| (i as f64, r.report.q_observed)).collect(),
            )],
        },
    ));
    Ok(art)
}
