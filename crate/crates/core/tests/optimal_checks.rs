mod common;

use faultfuse::fusion::fuse_bi;
use faultfuse::metrics::{paired, simulate, AlgorithmSpec};
use faultfuse::optimal::{
    amplitude_solution, estimate_moments, fit_linear_empirical, objective_from_moments, solve_prop4,
    stationarity_gradient, DirectionMoments, LinearProblem,
};
use faultfuse::scenario::trial_at;
use faultfuse::{Interval, ScenarioParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lower_endpoint_tracks_target() {
    // x_max = 2, no faults: L = -2 for precision 1, and -2 or 0 for
    // precision 2 depending on the sign of X, so Cov(L, X) = 1/2 exactly
    let p = ScenarioParams::new(4, 2, 0, 2, 9).unwrap();
    let m = estimate_moments(&p, 200_000).unwrap();
    assert!((m.cov_lx - 0.5).abs() < 0.02, "{m:?}");
    assert!((m.cov_ux - 0.5).abs() < 0.02, "{m:?}");

    let p = ScenarioParams::new(4, 2, 0, 5, 9).unwrap();
    let m = estimate_moments(&p, 100_000).unwrap();
    assert!(m.cov_lx > 0.0);
    // X is uniform on [-5, 5]: sd 2.89, so the stderr of the mean is ~0.009
    assert!(m.mean_x.abs() < 3.0 * (25.0f64 / 3.0 / 1e5).sqrt());
    assert_eq!(m.sample_count, 100_000);
}

#[test]
fn amplitudes_are_stationary_and_locally_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for _ in 0..100 {
        for m in [2, 3] {
            let (dm, var_x) = common::random_direction_moments(&mut rng, m);
            let mean_x = rng.gen_range(-1.0..1.0);
            for lambda in [0.1, 0.5, 0.9] {
                let s = amplitude_solution(&dm, mean_x, lambda).unwrap();
                for g in stationarity_gradient(&dm, lambda, &s.c) {
                    assert!(g.abs() < 1e-6);
                }
                let base = objective_from_moments(&dm, mean_x, var_x, lambda, &s.c, &s.b);
                for j in 0..m {
                    for f in [0.99, 1.01] {
                        let mut c = s.c.clone();
                        c[j] *= f;
                        assert!(objective_from_moments(&dm, mean_x, var_x, lambda, &c, &s.b) >= base - 1e-12);
                    }
                    let mut b = s.b.clone();
                    b[j] += rng.gen_range(-0.5..0.5);
                    assert!(objective_from_moments(&dm, mean_x, var_x, lambda, &s.c, &b) > base);
                }
            }
        }
    }
}

#[test]
fn amplitudes_scale_with_the_range() {
    // directions: each agent's Brooks-Iyengar estimate
    let p = ScenarioParams::new(6, 2, 2, 5, 17).unwrap();
    let (mut x, mut x2) = (Vec::new(), Vec::new());
    let (mut dirs, mut dirs2) = (vec![Vec::new(); 2], vec![Vec::new(); 2]);
    for t in 0..20_000 {
        let trial = trial_at(&p, t);
        x.push(trial.x);
        x2.push(2.0 * trial.x);
        for j in 0..2 {
            let r = trial.readings.agent(j);
            let doubled: Vec<Interval> = r.iter().map(|v| Interval::new(2.0 * v.lo, 2.0 * v.hi).unwrap()).collect();
            dirs[j].push(fuse_bi(r, 2).unwrap().value);
            dirs2[j].push(fuse_bi(&doubled, 2).unwrap().value);
        }
    }
    let dm = DirectionMoments::from_samples(&x, &dirs).unwrap();
    let dm2 = DirectionMoments::from_samples(&x2, &dirs2).unwrap();
    for lambda in [0.1, 0.5, 0.9, 1.0] {
        let a = amplitude_solution(&dm, 0.0, lambda).unwrap();
        let b = amplitude_solution(&dm2, 0.0, lambda).unwrap();
        for (ca, cb) in a.c.iter().zip(&b.c) {
            assert!((cb - 2.0 * ca).abs() < 1e-9 * ca.abs().max(1.0));
        }
    }
}

#[test]
fn linear_fit_cannot_beat_the_posterior_mean() {
    let p = ScenarioParams::new(10, 2, 3, 5, 41).unwrap();
    let fit = fit_linear_empirical(&p, 1.0, 50_000).unwrap();
    let algos = [
        AlgorithmSpec::GbiOneOpt,
        AlgorithmSpec::Linear {
            label: "linear@1".into(),
            coeffs: fit.coefficients.clone(),
        },
    ];
    let sim = simulate(&algos, &p, 20_000).unwrap();
    let (diff, se) = paired(&sim.mse_samples(1), &sim.mse_samples(0));
    assert!(diff >= -2.0 * se, "linear beats GBI by {diff} (se {se})");
}

#[test]
fn moment_solution_matches_empirical_optimum() {
    let p = ScenarioParams::new(10, 2, 3, 5, 43).unwrap();
    let moments = estimate_moments(&p, 200_000).unwrap();
    let problem = LinearProblem::from_samples(&p, 0.5, 100_000).unwrap();
    let fit = problem.minimize();
    let s = solve_prop4(&moments, 0.5, 10).unwrap();
    let got = problem.evaluate_coefficients(&s.coefficients()).unwrap();
    let ratio = got.objective / fit.evaluation.objective;
    assert!(ratio < 1.05, "ratio {ratio}");
    for r in s.quadratic_residuals() {
        assert!(r.abs() < 1e-6);
    }
}
