//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use burgers_lab::corpus::{regression_corpus, DEFAULT_CORPUS_SEED, DEFAULT_CORPUS_SIZE};
use burgers_lab::lab::{
    contraction_experiment, decay_rate_fit, mean_shift_check, pair_l1_series, pullback_bounded_solution, sync_ensemble,
    Branch, FitWindow, PullbackOptions,
};
use burgers_lab::linear::{l1_nonexpansion_check, random_coefficient, solve_linear, theta_sweep, L1_TOLERANCE};
use burgers_lab::profiles::random_with_norm;
use burgers_lab::solver::monitors::{check_linf_bound, energy_identity_residual, family_spread};
use burgers_lab::{solve, Field, FluxModel, ForcingModel, NormKind, PeriodicGrid, SolverConfig, StochasticSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sine(g: &PeriodicGrid, a: f64, k: f64) -> Field {
    Field::sample(g, |x| a * (2.0 * PI * k * x).sin()).unwrap()
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn heat_oracle() -> Outcome {
    let start = Instant::now();
    let g = PeriodicGrid::new(128).unwrap();
    let cfg = SolverConfig::new(0.1, 128, 1e-3);
    let tr = solve(&sine(&g, 1.0, 1.0), &ForcingModel::Zero, &FluxModel::zero(), &cfg, 0.0, 1.0).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let err = tr.final_state().unwrap().sup_distance(&sine(&g, (-4.0 * PI * PI * 0.1f64).exp(), 1.0));
    outcome(
        err < 1e-6 && elapsed < 1.0,
        format!("sup error {err:.2e} (< 1e-6), runtime {elapsed:.3} s (< 1 s)"),
    )
}

fn bessel_i(k: usize, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = half.powi(k as i32) / (1..=k).map(|j| j as f64).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        term *= half * half / (m as f64 * (m + k) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn cole_hopf(a: f64, nu: f64, t: f64, x: f64) -> f64 {
    let kappa = a / (4.0 * PI * nu);
    let (mut phi, mut phi_x) = (bessel_i(0, kappa), 0.0);
    for k in 1..60 {
        let kk = 2.0 * PI * k as f64;
        let c = 2.0 * bessel_i(k, kappa) * (-nu * kk * kk * t).exp();
        phi += c * (kk * x).cos();
        phi_x -= c * kk * (kk * x).sin();
    }
    -2.0 * nu * phi_x / phi
}

/// Stand-alone integrating-factor RK4 for viscous Burgers with 2/3 dealiasing.
fn rk4_reference(u0: &[f64], nu: f64, dt: f64, t_end: f64) -> Vec<f64> {
    let n = u0.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let k: Vec<f64> = (0..n)
        .map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 })
        .map(|m| 2.0 * PI * m)
        .collect();
    let keep: Vec<bool> = (0..n).map(|j| 3 * j.min(n - j) < n && 2 * j != n).collect();
    let rhs = |spec: &[Complex64]| -> Vec<Complex64> {
        let mut phys: Vec<Complex64> = spec.to_vec();
        inv.process(&mut phys);
        let mut prod: Vec<Complex64> = phys.iter().map(|z| Complex64::new(0.5 * (z.re / n as f64).powi(2), 0.0)).collect();
        fwd.process(&mut prod);
        (0..n)
            .map(|j| if keep[j] { -Complex64::new(0.0, k[j]) * prod[j] } else { Complex64::new(0.0, 0.0) })
            .collect()
    };
    let steps = (t_end / dt).round() as usize;
    let e_half: Vec<f64> = k.iter().map(|kk| (-nu * kk * kk * dt / 2.0).exp()).collect();
    let mut u: Vec<Complex64> = u0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut u);
    for _ in 0..steps {
        let k1 = rhs(&u);
        let a: Vec<Complex64> = (0..n).map(|j| e_half[j] * (u[j] + 0.5 * dt * k1[j])).collect();
        let k2 = rhs(&a);
        let b: Vec<Complex64> = (0..n).map(|j| e_half[j] * u[j] + 0.5 * dt * k2[j]).collect();
        let k3 = rhs(&b);
        let c: Vec<Complex64> = (0..n).map(|j| e_half[j] * e_half[j] * u[j] + dt * e_half[j] * k3[j]).collect();
        let k4 = rhs(&c);
        for j in 0..n {
            let (e, e2) = (e_half[j], e_half[j] * e_half[j]);
            u[j] = e2 * u[j] + dt / 6.0 * (e2 * k1[j] + 2.0 * e * (k2[j] + k3[j]) + k4[j]);
        }
    }
    inv.process(&mut u);
    u.iter().map(|z| z.re / n as f64).collect()
}

fn cole_hopf_oracle() -> Outcome {
    let start = Instant::now();
    let (nu, a, t_end, dt) = (0.05, 1.0, 0.5, 1e-3);
    let g = PeriodicGrid::new(128).unwrap();
    let cfg = SolverConfig::new(nu, 128, dt);
    let tr = solve(&sine(&g, a, 1.0), &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 0.0, t_end).unwrap();
    let u = tr.final_state().unwrap().values().to_vec();
    let fine: Vec<f64> = (0..1024).map(|j| a * (2.0 * PI * j as f64 / 1024.0).sin()).collect();
    let reference = rk4_reference(&fine, nu, dt / 16.0, t_end);
    let err_ref = max_abs((0..128).map(|j| u[j] - reference[8 * j]));
    let err_exact = max_abs((0..128).map(|j| u[j] - cole_hopf(a, nu, t_end, g.node(j))));
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        err_ref < 1e-4 && err_exact < 1e-4 && elapsed < 30.0,
        format!(
            "Linf error {err_ref:.2e} vs n=1024 dt/16 reference, {err_exact:.2e} vs Bessel series (< 1e-4), runtime {elapsed:.2} s (< 30 s)"
        ),
    )
}

fn corpus_runs() -> Vec<(String, f64, bool, f64)> {
    regression_corpus(DEFAULT_CORPUS_SIZE, DEFAULT_CORPUS_SEED)
        .unwrap()
        .into_iter()
        .map(|c| {
            let tr = solve(&c.u0, &c.forcing, &c.flux, &c.cfg, 0.0, c.t_end).unwrap();
            let m0 = c.u0.mean();
            let drift = max_abs(tr.norms.iter().map(|r| r.mean - m0));
            let b = check_linf_bound(&tr, c.h_linf, 1e-8);
            (c.name, drift, b.holds, b.margin)
        })
        .collect()
}

fn mean_conservation(runs: &[(String, f64, bool, f64)]) -> Outcome {
    let worst = max_abs(runs.iter().map(|r| r.1));
    outcome(worst < 1e-10, format!("max mean drift {worst:.2e} over {} cases (< 1e-10)", runs.len()))
}

fn maximum_principle(runs: &[(String, f64, bool, f64)]) -> Outcome {
    let failures = runs.iter().filter(|r| !r.2).count();
    let min_margin = runs.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    outcome(
        failures == 0,
        format!("{failures} violations over {} cases, min margin {min_margin:.2e} (slack 1e-8)", runs.len()),
    )
}

fn energy_identity() -> Outcome {
    let g = PeriodicGrid::new(128).unwrap();
    let cases = [
        (sine(&g, -0.5, 1.0), ForcingModel::Zero, FluxModel::quadratic(), 0.05),
        (sine(&g, 1.0, 1.0), ForcingModel::Zero, FluxModel::zero(), 0.1),
        (
            sine(&g, 0.5, 1.0),
            ForcingModel::steady(Field::sample(&g, |x| 0.5 * (4.0 * PI * x).cos()).unwrap()),
            FluxModel::quadratic(),
            0.1,
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut min_gain = f64::INFINITY;
    for (u0, forcing, flux, nu) in &cases {
        let residuals: Vec<f64> = [2.5e-4, 1.25e-4, 6.25e-5]
            .iter()
            .map(|&dt| {
                let cfg = SolverConfig::new(*nu, 128, dt);
                let tr = solve(u0, forcing, flux, &cfg, 0.0, 0.5).unwrap();
                max_abs(energy_identity_residual(&tr, forcing).unwrap().into_iter().map(|p| p.1))
            })
            .collect();
        worst = worst.max(residuals[0]);
        for w in residuals.windows(2) {
            if w[0] > 1e-12 {
                min_gain = min_gain.min(w[0] / w[1]);
            }
        }
    }
    outcome(
        worst < 1e-5 && min_gain >= 3.5,
        format!("max residual {worst:.2e} at dt=2.5e-4 (< 1e-5), min reduction per halving {min_gain:.2} (>= 3.5)"),
    )
}

fn l1_nonexpansion() -> Outcome {
    let g = PeriodicGrid::new(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let rho = [0.0, 1.0, 5.0][i % 3];
        let coeff = random_coefficient(&g, rho, 1.0, 1e-2, &mut rng).unwrap();
        let smooth = random_with_norm(&g, 5, NormKind::Linf, 1.0, &mut rng).unwrap();
        let mut cfg = SolverConfig::new(0.1, 64, 1e-3);
        let w0 = match i % 4 {
            0 | 1 => smooth,
            2 => smooth.map(|v| 1.0 + 0.9 * v).unwrap(),
            _ => {
                cfg.positivity_safe = true;
                smooth.map(|v| v.max(0.0)).unwrap()
            }
        };
        let check = l1_nonexpansion_check(&solve_linear(&w0, &coeff, &cfg, 0.0, 1.0).unwrap());
        worst = worst.max(check.worst_violation);
        if !check.holds {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations in 100 runs, worst increase {worst:.2e} (tolerance {L1_TOLERANCE:e})"),
    )
}

fn harnack_sweep() -> Outcome {
    let start = Instant::now();
    let mut cfg = SolverConfig::new(0.1, 128, 1e-3);
    cfg.positivity_safe = true;
    let rows = theta_sweep(&[0.0, 1.0, 5.0], &cfg, 0.5, 1.0, 50, 7).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let all_positive = rows.iter().all(|r| r.thetas.iter().all(|&t| t > 0.0) && r.trials == 50);
    let mins: Vec<String> = rows.iter().map(|r| format!("rho={} min {:.3}", r.rho, r.theta_min)).collect();
    outcome(
        all_positive && elapsed < 300.0,
        format!("theta > 0 in all 150 trials [{}], runtime {elapsed:.1} s (< 300 s)", mins.join(", ")),
    )
}

fn contraction_cases() -> Vec<burgers_lab::lab::ContractionReport> {
    let g = PeriodicGrid::new(128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let cfg = SolverConfig::new(0.1, 128, 2.5e-4);
    let pairs: Vec<(Field, Field)> = (0..20)
        .map(|_| {
            (
                random_with_norm(&g, 6, NormKind::Linf, 1.0, &mut rng).unwrap(),
                random_with_norm(&g, 6, NormKind::Linf, 1.0, &mut rng).unwrap(),
            )
        })
        .collect();
    use rayon::prelude::*;
    pairs
        .par_iter()
        .map(|(u0, v0)| {
            contraction_experiment(u0, v0, &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 1.0, &Default::default())
                .unwrap()
        })
        .collect()
}

fn strict_contraction(reports: &[burgers_lab::lab::ContractionReport]) -> Outcome {
    let all_below_one = reports.iter().all(|r| r.q_observed < 1.0);
    let harnack: Vec<_> = reports.iter().filter(|r| r.branch == Branch::HarnackBranch).collect();
    let certified = harnack.iter().all(|r| r.q_observed <= r.q_bound_from_theta + 1e-6);
    let max_q = reports.iter().map(|r| r.q_observed).fold(0.0, f64::max);
    let min_slack = harnack
        .iter()
        .map(|r| r.q_bound_from_theta - r.q_observed)
        .fold(f64::INFINITY, f64::min);
    outcome(
        all_below_one && certified,
        format!(
            "max q {max_q:.4} (< 1) over {} pairs; {} Harnack-branch cases, min certificate slack {min_slack:.4}",
            reports.len(),
            harnack.len()
        ),
    )
}

fn consistency(reports: &[burgers_lab::lab::ContractionReport]) -> Outcome {
    let worst = reports.iter().take(10).map(|r| r.consistency_error).fold(0.0, f64::max);
    outcome(worst < 1e-6, format!("max |w - (u - v)|_inf {worst:.2e} over 10 cases (< 1e-6)"))
}

fn exponential_decay() -> Outcome {
    let g = PeriodicGrid::new(128).unwrap();
    let forcing = ForcingModel::steady(sine(&g, 1.0, 1.0));
    let cfg = SolverConfig::new(0.1, 128, 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut gammas = Vec::new();
    let mut min_r2 = f64::INFINITY;
    let mut ok = true;
    for r in [0.1, 1.0, 10.0] {
        let u0 = random_with_norm(&g, 6, NormKind::Linf, r, &mut rng).unwrap();
        let v0 = random_with_norm(&g, 6, NormKind::Linf, r, &mut rng).unwrap();
        let s = pair_l1_series(&u0, &v0, &forcing, &FluxModel::quadratic(), &cfg, 0.0, 20.0).unwrap();
        match decay_rate_fit(&s, FitWindow::new(1.0, 20.0).with_floor(1e-12)) {
            Ok(fit) => {
                ok &= fit.gamma > 0.0 && fit.r_squared > 0.99;
                min_r2 = min_r2.min(fit.r_squared);
                gammas.push(fit.gamma);
            }
            Err(_) => ok = false,
        }
    }
    let spread = if gammas.len() == 3 { family_spread(&gammas) } else { f64::NAN };
    outcome(
        ok && spread <= 3.0,
        format!("gamma {gammas:.3?} for R = 0.1, 1, 10, min r^2 {min_r2:.6} (> 0.99), spread {spread:.3} (<= 3)"),
    )
}

fn pullback() -> Outcome {
    let start = Instant::now();
    let g = PeriodicGrid::new(64).unwrap();
    let forcing = ForcingModel::steady(sine(&g, 0.5, 1.0));
    let cfg = SolverConfig::new(0.08, 64, 1e-3);
    let mut opts = PullbackOptions::new(9, 1.0);
    opts.fit_to = Some(8);
    let r = pullback_bounded_solution(0.0, &forcing, &FluxModel::quadratic(), &cfg, &opts).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ratio = r.gap_fit.map(|f| (-f.gamma).exp());
    let geometric = r.gap_fit.is_some_and(|f| f.points == 7 && f.gamma > 0.0 && f.r_squared > 0.99);
    outcome(
        geometric && r.max_ratio.is_some_and(|m| m < 1.0) && r.steady_residual_h2 < 1e-5 && elapsed < 120.0,
        format!(
            "fitted gap ratio {:.4} on n = 2..8, max step ratio {:.4} (< 1), |v_t|_H2 {:.2e} (< 1e-5), runtime {elapsed:.2} s (< 120 s)",
            ratio.unwrap_or(f64::NAN),
            r.max_ratio.unwrap_or(f64::NAN),
            r.steady_residual_h2
        ),
    )
}

fn stochastic_sync() -> Outcome {
    let start = Instant::now();
    let g = PeriodicGrid::new(128).unwrap();
    let spec = StochasticSpec::new(8, 3.0, 1.0);
    let cfg = SolverConfig::new(0.1, 128, 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u0 = random_with_norm(&g, 6, NormKind::L1, 0.5, &mut rng).unwrap();
    let v0 = random_with_norm(&g, 6, NormKind::L1, 0.5, &mut rng).unwrap();
    let seeds: Vec<u64> = (1..=10).collect();
    let reports = sync_ensemble(&u0, &v0, &spec, &seeds, &cfg, &FluxModel::quadratic(), 50.0, &Default::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let worst = reports.iter().map(|r| r.final_ratio).fold(0.0, f64::max);
    let monotone = reports.iter().all(|r| r.nonincreasing);
    let worst_increase = reports.iter().map(|r| r.l1_worst_increase).fold(0.0, f64::max);
    outcome(
        worst < 1e-3 && monotone && elapsed < 600.0,
        format!(
            "max final ratio {worst:.2e} over 10 seeds (< 1e-3), worst L1 increase {worst_increase:.2e} (<= 1e-9), runtime {elapsed:.1} s (< 600 s)"
        ),
    )
}

fn mean_shift() -> Outcome {
    let g = PeriodicGrid::new(128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = SolverConfig::new(0.1, 128, 1e-3);
    let mut worst: f64 = 0.0;
    for shift in [-1.0, -0.3, 0.25, 0.8, 2.0] {
        let u0 = random_with_norm(&g, 6, NormKind::Linf, 1.0, &mut rng).unwrap();
        let v0 = random_with_norm(&g, 6, NormKind::Linf, 1.0, &mut rng).unwrap();
        let r = mean_shift_check(&u0, &v0, &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 1.0, shift).unwrap();
        worst = worst.max(r.max_difference);
    }
    outcome(worst < 1e-9, format!("max |L1 difference change| {worst:.2e} over 5 shifts (< 1e-9)"))
}

fn main() -> ExitCode {
    let corpus = corpus_runs();
    let contraction = contraction_cases();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("heat oracle", Box::new(heat_oracle)),
        ("Cole-Hopf oracle", Box::new(cole_hopf_oracle)),
        ("mean conservation", Box::new(|| mean_conservation(&corpus))),
        ("maximum-principle bound", Box::new(|| maximum_principle(&corpus))),
        ("energy identity", Box::new(energy_identity)),
        ("L1 non-expansion", Box::new(l1_nonexpansion)),
        ("Harnack positivity", Box::new(harnack_sweep)),
        ("strict contraction", Box::new(|| strict_contraction(&contraction))),
        ("linear/nonlinear consistency", Box::new(|| consistency(&contraction))),
        ("exponential decay", Box::new(exponential_decay)),
        ("pullback construction", Box::new(pullback)),
        ("stochastic synchronization", Box::new(stochastic_sync)),
        ("mean-shift covariance", Box::new(mean_shift)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
