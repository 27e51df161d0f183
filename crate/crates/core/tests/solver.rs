use qubvp::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn log_grid(n: usize) -> QuasiUniformGrid {
    QuasiUniformGrid::new(GridMap::logarithmic(5.0).unwrap(), n).unwrap()
}

#[test]
fn newton_converges_quadratically() {
    let p = FalknerSkan::default();
    let cfg = SolverConfig {
        tol: 1e-13,
        ..Default::default()
    };
    let r = solve(&p, &log_grid(80), &cfg).unwrap();
    let m = &r.increments;
    assert!(m.len() >= 3, "{m:?}");
    // last step may hit rounding noise; check the two before it
    let k = m.len() - 2;
    assert!(m[k] <= 1e3 * m[k - 1] * m[k - 1], "{m:?}");
}

#[test]
fn converged_residual_is_small() {
    let p = FalknerSkan::default();
    let grid = log_grid(80);
    let r = solve(&p, &grid, &SolverConfig::default()).unwrap();
    let scheme = Scheme::new(&p, &grid, true).unwrap();
    let res = scheme.residual(&r.solution).unwrap();
    let worst = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn falkner_skan_velocity_is_monotone() {
    let p = FalknerSkan::default();
    let r = solve(&p, &log_grid(160), &SolverConfig::default()).unwrap();
    let u2 = r.solution.component(1);
    assert!(u2.windows(2).all(|w| w[1] >= w[0] - 1e-10));
    assert!(u2.iter().all(|&v| v <= 1.0 + 1e-4));
    assert!((u2.last().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn pile_decays_at_infinity() {
    let p = Pile::default();
    let r = solve(&p, &log_grid(160), &SolverConfig::default()).unwrap();
    let last = r.solution.node(r.solution.nodes() - 1);
    assert!(last.iter().all(|v| v.abs() <= 1e-4), "{last:?}");
    // zero moment and the prescribed shear at the surface
    let first = r.solution.node(0);
    assert!(first[2].abs() < 1e-12);
    assert!((first[3] - 0.5).abs() < 1e-12);
}

#[test]
fn analytic_and_fd_jacobians_agree_on_random_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let problems: [&dyn BvpProblem; 2] = [&FalknerSkan::default(), &Pile::default()];
    for p in problems {
        let grid = log_grid(16);
        let scheme = Scheme::new(p, &grid, true).unwrap();
        for _ in 0..10 {
            let values: Vec<f64> = (0..p.dim() * 17)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let u = GridField::from_values(p.dim(), values).unwrap();
            let a = scheme
                .jacobian(&u, JacobianMode::Analytic)
                .unwrap()
                .to_dense();
            let f = scheme
                .jacobian(&u, JacobianMode::FiniteDifference)
                .unwrap()
                .to_dense();
            let gap = a
                .iter()
                .zip(&f)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(gap <= 1e-5, "{gap}");
        }
    }
}

#[test]
fn solve_is_deterministic() {
    let p = Pile::default();
    let a = solve(&p, &log_grid(64), &SolverConfig::default()).unwrap();
    let b = solve(&p, &log_grid(64), &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
}
