mod common;

use proptest::prelude::*;

use cosmoboltz_core::collision::{collision_frequency, equivalence_constants, AngularKernel};
use cosmoboltz_core::norms::{
    energy_series, norm_snapshot, nu_equivalence_ratio, triple_norm, triple_norm_nu, NormConfig,
};
use cosmoboltz_core::scale_factor::solve_scale_factor;
use cosmoboltz_core::velocity::{Distribution, VelocityGrid};

use common::random_fields;

/// Simpson's rule on `[0, b]` with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    let mut acc = f(0.0) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn gaussian_norm_matches_radial_integral() {
    // f = e^(-|v|²): Σ_{|β|<=1} |∂_β f|² = e^(-2r²) (1 + 4r²)
    let gamma = -2.0;
    let grid = VelocityGrid::new(41, 5.0).unwrap();
    let f = Distribution::from_fn(grid, |v| (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp());
    let cfg = NormConfig::new(1, 3, 1, gamma).unwrap();
    for k in 0..=3u32 {
        let kf = k as f64;
        let exact = simpson(
            |r| {
                let w = 1.0 + r;
                4.0 * std::f64::consts::PI
                    * r
                    * r
                    * (-2.0 * r * r).exp()
                    * (w.powf(-2.0 * gamma * kf) + 4.0 * r * r * w.powf(2.0 * gamma * (1.0 - kf)))
            },
            8.0,
            20_000,
        );
        let got = triple_norm(&f, k, &cfg).unwrap();
        assert!((got / exact - 1.0).abs() < 5e-3, "k = {k}: {got} vs {exact}");
    }
}

#[test]
fn nu_norm_ratio_lies_between_equivalence_constants() {
    let grid = VelocityGrid::new(12, 6.0).unwrap();
    let gamma = -2.5;
    let nu = collision_frequency(&grid, gamma, &AngularKernel::default()).unwrap();
    let (c1, c2) = equivalence_constants(&grid, &nu, gamma);
    let cfg = NormConfig::new(2, 3, 1, gamma).unwrap();
    for f in random_fields(&grid, 20, 8) {
        for k in 1..=3 {
            let r = nu_equivalence_ratio(&f, k, &cfg, &nu).unwrap();
            assert!(r >= c1 * (1.0 - 1e-12) && r <= c2 * (1.0 + 1e-12), "{c1} <= {r} <= {c2}");
        }
    }
}

#[test]
fn energies_grow_with_weight_index() {
    let grid = VelocityGrid::new(10, 5.0).unwrap();
    let gamma = -2.5;
    let nu = collision_frequency(&grid, gamma, &AngularKernel::default()).unwrap();
    let cfg = NormConfig::new(2, 3, 1, gamma).unwrap();
    let traj = solve_scale_factor(3.0, gamma, 2.0, 1e-3).unwrap();
    let fields = random_fields(&grid, 5, 12);
    let samples: Vec<(f64, Distribution)> =
        fields.into_iter().enumerate().map(|(i, f)| (0.5 * i as f64, f)).collect();
    for e in energy_series(&samples, &traj, &cfg, &nu).unwrap() {
        assert!(e.e_k.windows(2).all(|w| w[0] <= w[1]));
        let top = *e.e_k.last().unwrap();
        let ratio = e.script_e_m / top;
        assert!((1.0..=(cfg.m + 1) as f64).contains(&ratio));
        assert_eq!(e.y_r, e.y(cfg.r));
    }
}

#[test]
fn energy_at_start_is_half_the_squared_norm() {
    let grid = VelocityGrid::new(8, 4.0).unwrap();
    let nu = collision_frequency(&grid, -2.0, &AngularKernel::default()).unwrap();
    let cfg = NormConfig::new(1, 2, 1, -2.0).unwrap();
    let traj = solve_scale_factor(3.0, -2.0, 1.0, 1e-3).unwrap();
    let f = random_fields(&grid, 1, 1).remove(0);
    let e = energy_series(&[(0.0, f.clone())], &traj, &cfg, &nu).unwrap().remove(0);
    for k in 0..=2 {
        assert_eq!(e.e_k[k as usize], 0.5 * triple_norm(&f, k, &cfg).unwrap());
    }
}

#[test]
fn non_increasing_sample_times_are_rejected() {
    let grid = VelocityGrid::new(8, 4.0).unwrap();
    let nu = collision_frequency(&grid, -2.0, &AngularKernel::default()).unwrap();
    let cfg = NormConfig::new(1, 2, 1, -2.0).unwrap();
    let traj = solve_scale_factor(3.0, -2.0, 1.0, 1e-3).unwrap();
    let f = Distribution::zeros(grid);
    assert!(energy_series(&[(0.5, f.clone()), (0.5, f)], &traj, &cfg, &nu).is_err());
}

#[test]
fn bad_norm_configs_are_rejected() {
    assert!(NormConfig::new(0, 3, 1, -2.0).is_err());
    assert!(NormConfig::new(2, 3, 3, -2.0).is_err());
    assert!(NormConfig::new(2, 3, 0, -2.0).is_err());
    assert!(NormConfig::new(2, 3, 1, 0.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norms_are_quadratically_homogeneous(c in -10.0f64..10.0, seed in 0u64..500, k in 0u32..4) {
        let grid = VelocityGrid::new(8, 4.0).unwrap();
        let cfg = NormConfig::new(2, 3, 1, -2.5).unwrap();
        let f = random_fields(&grid, 1, seed).remove(0);
        let base = triple_norm(&f, k, &cfg).unwrap();
        let scaled = triple_norm(&f.scaled(c), k, &cfg).unwrap();
        prop_assert!((scaled - c * c * base).abs() <= 1e-12 * (1.0 + c * c * base));
    }

    #[test]
    fn snapshot_agrees_with_single_norms(seed in 0u64..500) {
        let grid = VelocityGrid::new(8, 4.0).unwrap();
        let cfg = NormConfig::new(1, 3, 1, -2.0).unwrap();
        let nu = vec![1.5; grid.len()];
        let f = random_fields(&grid, 1, seed).remove(0);
        let snap = norm_snapshot(&f, &cfg, &nu).unwrap();
        for k in 0..=3u32 {
            let plain = triple_norm(&f, k, &cfg).unwrap();
            let weighted = triple_norm_nu(&f, k, &cfg, &nu).unwrap();
            prop_assert!((snap.triple_norm[k as usize] - plain).abs() <= 1e-14 * plain);
            prop_assert!((weighted - 1.5 * plain).abs() <= 1e-12 * plain);
        }
    }
}
