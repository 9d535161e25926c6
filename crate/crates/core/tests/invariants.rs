use burgers_lab::lab::{decay_rate_fit, interpolation_check, mean_shift_check, FitWindow};
use burgers_lab::linear::{l1_nonexpansion_check, random_coefficient, solve_linear, L1_TOLERANCE};
use burgers_lab::profiles::random_with_norm;
use burgers_lab::solver::monitors::check_linf_bound;
use burgers_lab::{solve, Field, FluxModel, ForcingModel, NormKind, PeriodicGrid, SolverConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flux_from(index: usize) -> FluxModel {
    match index {
        0 => FluxModel::zero(),
        1 => FluxModel::linear(-0.7).unwrap(),
        2 => FluxModel::quadratic(),
        _ => FluxModel::polynomial(vec![0.0, 0.0, 0.5, 0.0, 1.0 / 12.0], 1.0).unwrap(),
    }
}

fn random_field(g: &PeriodicGrid, seed: u64, amplitude: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_with_norm(g, 5, NormKind::Linf, amplitude, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spatial_mean_is_conserved(seed in any::<u64>(), flux in 0usize..4, amp in 0.05f64..1.5, mean in -1.0f64..1.0, forced in any::<bool>()) {
        let g = PeriodicGrid::new(64).unwrap();
        let u0 = random_field(&g, seed, amp).map(|v| v + mean).unwrap();
        let forcing = if forced {
            ForcingModel::steady(random_field(&g, seed ^ 1, 0.5))
        } else {
            ForcingModel::Zero
        };
        let cfg = SolverConfig::new(0.1, 64, 2e-3);
        let tr = solve(&u0, &forcing, &flux_from(flux), &cfg, 0.0, 0.5).unwrap();
        for r in &tr.norms {
            prop_assert!((r.mean - u0.mean()).abs() < 1e-10);
        }
    }

    #[test]
    fn maximum_principle_bound_holds(seed in any::<u64>(), flux in 0usize..4, amp in 0.05f64..1.0, mean in -0.5f64..0.5) {
        let g = PeriodicGrid::new(128).unwrap();
        let u0 = random_field(&g, seed, amp).map(|v| v + mean).unwrap();
        let profile = random_field(&g, seed.wrapping_add(7), 0.4);
        let h_linf = profile.norm(NormKind::Linf);
        let forcing = ForcingModel::steady(profile);
        let cfg = SolverConfig::new(0.1, 128, 1e-3);
        let tr = solve(&u0, &forcing, &flux_from(flux), &cfg, 0.0, 0.5).unwrap();
        let b = check_linf_bound(&tr, h_linf, 1e-8);
        prop_assert!(b.holds, "{b:?}");
    }

    #[test]
    fn linear_l1_norm_never_grows(seed in any::<u64>(), rho in 0.0f64..5.0, kind in 0usize..3) {
        let g = PeriodicGrid::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeff = random_coefficient(&g, rho, 0.5, 1e-2, &mut rng).unwrap();
        let smooth = random_field(&g, seed, 1.0);
        let mut cfg = SolverConfig::new(0.1, 64, 1e-3);
        let w0 = match kind {
            0 => smooth,
            1 => smooth.map(|v| 1.0 + 0.9 * v).unwrap(),
            _ => {
                cfg.positivity_safe = true;
                smooth.map(|v| v.max(0.0)).unwrap()
            }
        };
        let tr = solve_linear(&w0, &coeff, &cfg, 0.0, 0.5).unwrap();
        let check = l1_nonexpansion_check(&tr);
        prop_assert!(check.holds, "{check:?}");
        prop_assert!(check.worst_violation <= L1_TOLERANCE);
        if kind == 2 {
            let floor = tr.norms.iter().fold(f64::INFINITY, |m, r| m.min(r.min));
            prop_assert!(floor >= 0.0, "{floor}");
        }
    }

    #[test]
    fn mean_shift_leaves_l1_difference_unchanged(seed in any::<u64>(), shift in -1.0f64..1.0) {
        let g = PeriodicGrid::new(64).unwrap();
        let u0 = random_field(&g, seed, 0.8);
        let v0 = random_field(&g, seed ^ 0xff, 0.8);
        let cfg = SolverConfig::new(0.1, 64, 2e-3);
        let r = mean_shift_check(&u0, &v0, &ForcingModel::Zero, &FluxModel::quadratic(), &cfg, 0.5, shift).unwrap();
        prop_assert!(r.max_difference < 1e-9, "{}", r.max_difference);
    }

    #[test]
    fn interpolation_ratio_is_scale_invariant(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let g = PeriodicGrid::new(128).unwrap();
        let u = random_field(&g, seed, 1.0);
        let a = interpolation_check(&u).unwrap();
        let b = interpolation_check(&u.scaled(scale)).unwrap();
        prop_assert!((a.rhs_ratio - b.rhs_ratio).abs() < 1e-10 * a.rhs_ratio);
        prop_assert!(a.rhs_ratio.is_finite() && a.rhs_ratio > 0.0);
    }

    #[test]
    fn decay_fit_recovers_exponentials(gamma in 0.01f64..10.0, c in 1e-3f64..1e3) {
        let series: Vec<(f64, f64)> = (0..40).map(|i| {
            let t = 0.05 * i as f64;
            (t, c * (-gamma * t).exp())
        }).collect();
        let fit = decay_rate_fit(&series, FitWindow::new(0.0, 2.0)).unwrap();
        prop_assert!((fit.gamma - gamma).abs() < 1e-8 * gamma.max(1.0));
        prop_assert!((fit.c / c - 1.0).abs() < 1e-8);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn trig_norms_follow_parseval(k in 1u32..20, a in 0.1f64..10.0) {
        let g = PeriodicGrid::new(64).unwrap();
        let kk = 2.0 * std::f64::consts::PI * k as f64;
        let u = Field::sample(&g, |x| a * (kk * x).cos()).unwrap();
        let n = u.norms();
        prop_assert!((n.l2 - a / 2f64.sqrt()).abs() < 1e-12 * a);
        let h1 = a * (0.5 * (1.0 + kk * kk)).sqrt();
        prop_assert!((n.h1 - h1).abs() < 1e-10 * h1);
    }
}
