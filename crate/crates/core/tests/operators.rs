mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use cosmoboltz_core::collision::geometry::lattice_kernel_weight;
use cosmoboltz_core::collision::probe::{probe_operator_bounds, ProbeSettings};
use cosmoboltz_core::collision::{
    collision_frequency, AngularKernel, CollisionOperatorSet, SingularTreatment, DEFAULT_NODE_BUDGET,
};
use cosmoboltz_core::invariants::InvariantProjector;
use cosmoboltz_core::sphere::SphereQuadrature;
use cosmoboltz_core::velocity::{Distribution, VelocityGrid};
use cosmoboltz_core::Error;

use common::{lattice_dot, random_fields, rel_l2, sqrt_mu, GammaOracle};

fn ops(n: usize, v_max: f64, gamma: f64) -> CollisionOperatorSet {
    CollisionOperatorSet::new(
        VelocityGrid::new(n, v_max).unwrap(),
        gamma,
        AngularKernel::default(),
        SingularTreatment::Corrected,
        &SphereQuadrature::with_nodes(12).unwrap(),
    )
    .unwrap()
}

/// `∫ |w|^γ e^(-|v + w|²) dw` via `s = x²`, Simpson on a fine uniform mesh.
fn nu_oracle(r: f64, gamma: f64) -> f64 {
    let upper = (r + 9.0).sqrt();
    let n = 40_000;
    let h = upper / n as f64;
    let g = |x: f64| -> f64 {
        let s = x * x;
        let angular = if r * s < 1e-12 { 1.0 } else { (2.0 * r * s).sinh() / (2.0 * r * s) };
        // s^(γ+2) ds = 2 x^(2γ+5) dx
        4.0 * PI * 2.0 * x.powf(2.0 * gamma + 5.0) * (-(s * s + r * r)).exp() * angular
    };
    let mut acc = g(0.0) + g(upper);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn collision_frequency_matches_radial_oracle() {
    let grid = VelocityGrid::new(9, 4.0).unwrap();
    let kernel = AngularKernel::default();
    for gamma in [-2.0, -1.5, -2.5] {
        let nu = collision_frequency(&grid, gamma, &kernel).unwrap();
        for idx in [0, 4, 40, grid.index(4, 4, 4), grid.index(8, 3, 1)] {
            let v = grid.velocity(idx);
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let exact = kernel.b0() * nu_oracle(r, gamma);
            assert!((nu[idx] / exact - 1.0).abs() < 1e-7, "gamma {gamma} |v| {r}: {} vs {exact}", nu[idx]);
        }
    }
}

#[test]
fn k1_matches_direct_lattice_sum() {
    let o = ops(7, 4.0, -2.5);
    let grid = *o.grid();
    let h = grid.h();
    let b0 = 2.0 * PI;
    for f in random_fields(&grid, 3, 9) {
        let fast = o.apply_k1(&f).unwrap();
        let mut slow = vec![0.0; grid.len()];
        for (vi, out) in slow.iter_mut().enumerate() {
            let vl = grid.ijk(vi);
            let mut acc = 0.0;
            for ui in 0..grid.len() {
                let ul = grid.ijk(ui);
                let m = [0, 1, 2].map(|a| ul[a] as i64 - vl[a] as i64);
                let u = grid.velocity(ui);
                let w = lattice_kernel_weight(m, h, -2.5, SingularTreatment::Corrected);
                acc += w * (-(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])).exp() * f.values[ui] / sqrt_mu(u);
            }
            *out = b0 * sqrt_mu(grid.velocity(vi)) * acc;
        }
        assert!(rel_l2(&fast.values, &slow) < 1e-13);
    }
}

#[test]
fn k_is_the_linearization_of_gamma() {
    // With m = e^(-|v|²/2): K f = gain(m, f) + gain(f, m) - loss(f, m),
    // and loss(m, f) is the discrete collision frequency times f. K uses the
    // exact Maxwellian factor while the oracle zero-extends it past the box,
    // so the box is wide enough for that tail to vanish.
    let o = ops(6, 8.0, -2.0);
    let grid = *o.grid();
    let h = grid.h();
    let oracle = GammaOracle::new(grid, -2.0, &SphereQuadrature::with_nodes(12).unwrap());
    let m = Distribution::from_fn(grid, |v| PI.powf(0.75) * sqrt_mu(v));
    for f in random_fields(&grid, 2, 21) {
        let a = oracle.apply(&m, &f);
        let b = oracle.apply(&f, &m);
        let mut expected = vec![0.0; grid.len()];
        for vi in 0..grid.len() {
            let vl = grid.ijk(vi);
            let mut disc = 0.0;
            for ui in 0..grid.len() {
                let ul = grid.ijk(ui);
                let mm = [0, 1, 2].map(|x| ul[x] as i64 - vl[x] as i64);
                let u = grid.velocity(ui);
                disc += lattice_kernel_weight(mm, h, -2.0, SingularTreatment::Corrected)
                    * (-(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])).exp();
            }
            let loss_mu_f = 2.0 * PI * f.values[vi] * disc;
            expected[vi] = a[vi] + b[vi] + loss_mu_f;
        }
        let k = o.apply_k(&f).unwrap();
        assert!(rel_l2(&k.values, &expected) < 1e-12, "{}", rel_l2(&k.values, &expected));
    }
}

#[test]
fn l_is_frequency_minus_k() {
    let o = ops(6, 4.0, -2.0);
    for f in random_fields(o.grid(), 2, 3) {
        let l = o.apply_l(&f).unwrap();
        let k = o.apply_k(&f).unwrap();
        for i in 0..f.values.len() {
            let expect = o.nu[i] * f.values[i] - k.values[i];
            assert!((l.values[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }
}

#[test]
fn dense_matrix_matches_matrix_free() {
    let mut o = ops(8, 5.0, -2.5);
    o.assemble(DEFAULT_NODE_BUDGET).unwrap();
    let matrix = o.k_matrix.as_ref().unwrap();
    assert!(matrix.asymmetry.is_finite() && !matrix.symmetrized);
    for f in random_fields(o.grid(), 3, 77) {
        let free = o.apply_k(&f).unwrap();
        assert!(rel_l2(&matrix.apply(&f.values), &free.values) < 1e-12);
    }
}

#[test]
fn assembly_respects_node_budget() {
    let mut o = ops(6, 4.0, -2.0);
    assert!(matches!(o.assemble(100), Err(Error::MemoryBudget { nodes: 216, budget: 100 })));
}

#[test]
fn positive_gamma_is_rejected() {
    let r = CollisionOperatorSet::new(
        VelocityGrid::new(6, 4.0).unwrap(),
        0.5,
        AngularKernel::default(),
        SingularTreatment::Corrected,
        &SphereQuadrature::with_nodes(12).unwrap(),
    );
    assert!(r.is_err());
}

#[test]
fn grid_mismatch_is_an_error() {
    let o = ops(6, 4.0, -2.0);
    let other = Distribution::zeros(VelocityGrid::new(7, 4.0).unwrap());
    assert!(matches!(o.apply_k(&other), Err(Error::GridMismatch(_))));
}

#[test]
fn linearized_operator_is_dissipative_off_the_invariants() {
    let mut o = CollisionOperatorSet::new(
        VelocityGrid::new(12, 6.0).unwrap(),
        -2.0,
        AngularKernel::default(),
        SingularTreatment::Corrected,
        &SphereQuadrature::with_nodes(50).unwrap(),
    )
    .unwrap();
    o.assemble(DEFAULT_NODE_BUDGET).unwrap();
    let grid = *o.grid();
    let proj = InvariantProjector::new(&grid);
    for f in random_fields(&grid, 40, 5) {
        let g = proj.complement(&f).unwrap();
        let lg = o.apply_l(&g).unwrap();
        let q = lattice_dot(&lg.values, &g.values, None, grid.h());
        assert!(q > 0.0, "<Lg, g> = {q}");
    }
}

#[test]
fn probe_reports_finite_constants() {
    let o = ops(8, 5.0, -2.0);
    let settings = ProbeSettings { samples: 3, ..ProbeSettings::default() };
    let r = probe_operator_bounds(&o, &settings).unwrap();
    assert_eq!(r.k_bound.len(), settings.theta_list.len());
    assert_eq!(r.weighted_lower_bound.len(), settings.k_list.len());
    for k in &r.k_bound {
        assert!(k.max_ratio.is_finite() && k.max_ratio >= k.sqrt_mu_ratio);
    }
    for c in &r.weighted_lower_bound {
        assert!(c.c_k.is_finite() && c.c_k >= c.sqrt_mu_value);
    }
    assert!(r.loss_bound.iter().all(|l| l.max_ratio.is_finite() && l.max_ratio >= 0.0));
}

fn small() -> &'static CollisionOperatorSet {
    use std::sync::OnceLock;
    static OPS: OnceLock<CollisionOperatorSet> = OnceLock::new();
    OPS.get_or_init(|| ops(6, 4.0, -2.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn k_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
        let o = small();
        let fs = random_fields(o.grid(), 2, seed);
        let combo = fs[0].scaled(a).add_scaled(b, &fs[1]).unwrap();
        let lhs = o.apply_k(&combo).unwrap();
        let rhs = o.apply_k(&fs[0]).unwrap().scaled(a).add_scaled(b, &o.apply_k(&fs[1]).unwrap()).unwrap();
        let scale = 1e-12 * (1.0 + rhs.max_abs());
        prop_assert!(lhs.values.iter().zip(&rhs.values).all(|(x, y)| (x - y).abs() <= scale));
    }

    #[test]
    fn gamma_is_bilinear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
        let o = small();
        let fs = random_fields(o.grid(), 3, seed);
        let left = fs[0].scaled(a).add_scaled(b, &fs[1]).unwrap();
        let lhs = o.apply_gamma(&left, &fs[2]).unwrap();
        let rhs = o.apply_gamma(&fs[0], &fs[2]).unwrap().scaled(a)
            .add_scaled(b, &o.apply_gamma(&fs[1], &fs[2]).unwrap()).unwrap();
        let scale = 1e-12 * (1.0 + rhs.max_abs());
        prop_assert!(lhs.values.iter().zip(&rhs.values).all(|(x, y)| (x - y).abs() <= scale));

        let right = fs[0].scaled(a).add_scaled(b, &fs[1]).unwrap();
        let lhs = o.apply_gamma(&fs[2], &right).unwrap();
        let rhs = o.apply_gamma(&fs[2], &fs[0]).unwrap().scaled(a)
            .add_scaled(b, &o.apply_gamma(&fs[2], &fs[1]).unwrap()).unwrap();
        let scale = 1e-12 * (1.0 + rhs.max_abs());
        prop_assert!(lhs.values.iter().zip(&rhs.values).all(|(x, y)| (x - y).abs() <= scale));
    }

    #[test]
    fn gain_minus_loss_is_gamma(seed in 0u64..1000) {
        let o = small();
        let fs = random_fields(o.grid(), 2, seed);
        let g = o.apply_gamma(&fs[0], &fs[1]).unwrap();
        let parts = o.gamma_gain(&fs[0], &fs[1]).unwrap()
            .add_scaled(-1.0, &o.gamma_loss(&fs[0], &fs[1]).unwrap()).unwrap();
        prop_assert!(rel_l2(&g.values, &parts.values) < 1e-14);
    }
}
