//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use cosmoboltz_core::collision::geometry::{lattice_kernel_weight, sphere_rotation};
use cosmoboltz_core::collision::SingularTreatment;
use cosmoboltz_core::fields::{random_smooth_field, seeded_rng};
use cosmoboltz_core::sphere::SphereQuadrature;
use cosmoboltz_core::velocity::{Distribution, VelocityGrid};

pub fn sqrt_mu(v: [f64; 3]) -> f64 {
    PI.powf(-0.75) * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()
}

/// `√μ φ_which` with `φ = 1, v1, v2, v3, |v|²`.
pub fn invariant_field(grid: VelocityGrid, which: usize) -> Distribution {
    Distribution::from_fn(grid, |v| {
        let phi = match which {
            0 => 1.0,
            1..=3 => v[which - 1],
            _ => v[0] * v[0] + v[1] * v[1] + v[2] * v[2],
        };
        phi * sqrt_mu(v)
    })
}

/// `h³ Σ w f g` over the nodes.
pub fn lattice_dot(f: &[f64], g: &[f64], weight: Option<&[f64]>, h: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..f.len() {
        acc += f[i] * g[i] * weight.map_or(1.0, |w| w[i]);
    }
    h.powi(3) * acc
}

pub fn random_fields(grid: &VelocityGrid, count: usize, seed: u64) -> Vec<Distribution> {
    let mut rng = seeded_rng(seed);
    (0..count).map(|_| random_smooth_field(grid, &mut rng)).collect()
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Direct five-dimensional evaluation of `Γ(f, g) = gain - loss` with the
/// solver's quadrature nodes, written without the solver's lookup tables.
///
/// For every node pair `(u, v)` and every node `ω` of the rotated full
/// sphere rule, the post-collision velocities are formed in physical
/// coordinates, `F = f/√μ` and `G = g/√μ` are read off by the seven-point
/// quadratic stencil around the nearest lattice node (zero outside the box),
/// and the angular kernel is normalized per offset so that its discrete
/// integral equals `b0`.
pub struct GammaOracle {
    grid: VelocityGrid,
    gamma: f64,
    omega: Vec<[f64; 3]>,
    weight: Vec<f64>,
}

impl GammaOracle {
    pub fn new(grid: VelocityGrid, gamma: f64, sphere: &SphereQuadrature) -> Self {
        let r = sphere_rotation();
        let omega = sphere
            .nodes
            .iter()
            .map(|x| {
                let mut y = [0.0; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        y[i] += r[i][j] * x[j];
                    }
                }
                y
            })
            .collect();
        GammaOracle { grid, gamma, omega, weight: sphere.weights.clone() }
    }

    fn lattice(&self, x: f64) -> f64 {
        (x + self.grid.v_max) / self.grid.h()
    }

    /// Quadratic-stencil reconstruction of `F` at physical velocity `p`.
    fn reconstruct(&self, field: &[f64], p: [f64; 3]) -> f64 {
        let n = self.grid.n_per_axis as i64;
        let x = p.map(|c| self.lattice(c));
        let c = x.map(|c| c.round() as i64);
        let t = [x[0] - c[0] as f64, x[1] - c[1] as f64, x[2] - c[2] as f64];
        let value = |i: i64, j: i64, k: i64| -> f64 {
            if i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n {
                0.0
            } else {
                field[self.grid.index(i as usize, j as usize, k as usize)]
            }
        };
        let mut acc = (1.0 - t[0] * t[0] - t[1] * t[1] - t[2] * t[2]) * value(c[0], c[1], c[2]);
        for axis in 0..3 {
            for s in [1i64, -1] {
                let mut q = c;
                q[axis] += s;
                let w = 0.5 * (t[axis] * t[axis] + s as f64 * t[axis]);
                acc += w * value(q[0], q[1], q[2]);
            }
        }
        acc
    }

    pub fn apply(&self, f: &Distribution, g: &Distribution) -> Vec<f64> {
        let grid = self.grid;
        let h = grid.h();
        let b0 = 2.0 * PI;
        let nodes = grid.len();
        let vel: Vec<[f64; 3]> = (0..nodes).map(|i| grid.velocity(i)).collect();
        let ff: Vec<f64> = (0..nodes).map(|i| f.values[i] / sqrt_mu(vel[i])).collect();
        let gg: Vec<f64> = (0..nodes).map(|i| g.values[i] / sqrt_mu(vel[i])).collect();
        let nn = grid.n_per_axis as i64;
        let mut out = vec![0.0; nodes];
        for vi in 0..nodes {
            let v = vel[vi];
            let vl = grid.ijk(vi);
            let mut gain = 0.0;
            let mut loss = 0.0;
            for ui in 0..nodes {
                let u = vel[ui];
                let ul = grid.ijk(ui);
                let m = [0, 1, 2].map(|a| ul[a] as i64 - vl[a] as i64);
                debug_assert!(m.iter().all(|x| x.abs() < nn));
                let w = lattice_kernel_weight(m, h, self.gamma, SingularTreatment::Corrected);
                let e_u = (-(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])).exp();
                loss += w * e_u * ff[ui];
                let z = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
                let zn = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
                // |cos θ| and its discrete normalizer over the full rule
                let cosines: Vec<f64> = self
                    .omega
                    .iter()
                    .map(|o| if zn > 0.0 { ((z[0] * o[0] + z[1] * o[1] + z[2] * o[2]) / zn).abs() } else { 0.0 })
                    .collect();
                let norm: f64 = cosines.iter().zip(&self.weight).map(|(c, w)| c * w).sum();
                let mut angular = 0.0;
                for (k, o) in self.omega.iter().enumerate() {
                    let b = if zn > 0.0 { cosines[k] * b0 / norm } else { b0 / (4.0 * PI) };
                    let s = z[0] * o[0] + z[1] * o[1] + z[2] * o[2];
                    let up = [u[0] - s * o[0], u[1] - s * o[1], u[2] - s * o[2]];
                    let vp = [v[0] + s * o[0], v[1] + s * o[1], v[2] + s * o[2]];
                    angular += self.weight[k] * b * self.reconstruct(&ff, up) * self.reconstruct(&gg, vp);
                }
                gain += w * e_u * angular;
            }
            let pre = PI.powf(-0.75);
            out[vi] = pre * sqrt_mu(v) * gain - pre * b0 * g.values[vi] * loss;
        }
        out
    }
}
