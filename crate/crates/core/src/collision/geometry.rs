//! Collision geometry shared by the linear and bilinear operators.

use crate::error::{Error, Result};
use crate::quadrature::epstein_zeta;
use crate::sphere::{SphereQuadrature, Vec3};
use crate::velocity::VelocityGrid;

use super::kernel::{AngularKernel, AngularKind, SingularTreatment};

/// Elastic post-collision pair `(u', v')` for direction `ω`:
/// `v' = v + ((u - v)·ω) ω`, `u' = u + ((v - u)·ω) ω`.
pub fn post_collide(u: Vec3, v: Vec3, omega: Vec3) -> (Vec3, Vec3) {
    let s = (u[0] - v[0]) * omega[0] + (u[1] - v[1]) * omega[1] + (u[2] - v[2]) * omega[2];
    let r = (v[0] - u[0]) * omega[0] + (v[1] - u[1]) * omega[1] + (v[2] - u[2]) * omega[2];
    (
        [u[0] + r * omega[0], u[1] + r * omega[1], u[2] + r * omega[2]],
        [v[0] + s * omega[0], v[1] + s * omega[1], v[2] + s * omega[2]],
    )
}

/// Quadrature weight of the lattice offset `m` (in lattice units) for
/// integrals `∫ |z|^γ g(z) dz ≈ Σ_m W(m) g(h m)`.
pub fn lattice_kernel_weight(m: [i64; 3], h: f64, gamma: f64, treatment: SingularTreatment) -> f64 {
    let r2 = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64;
    match treatment {
        SingularTreatment::Softened { eps } => h.powi(3) * (h * h * r2 + eps * eps).powf(0.5 * gamma),
        SingularTreatment::Corrected => {
            let scale = h.powf(3.0 + gamma);
            let z2 = epstein_zeta(-gamma - 2.0);
            if r2 == 0.0 {
                -scale * (epstein_zeta(-gamma) - z2)
            } else if r2 == 1.0 {
                scale * (1.0 - z2 / 6.0)
            } else {
                scale * r2.powf(0.5 * gamma)
            }
        }
    }
}

/// Weights of the seven-point quadratic stencil at fractional offset `t`
/// (each component in `[-1/2, 1/2]`) from its centre node, ordered
/// `[centre, +x, -x, +y, -y, +z, -z]`. Exact for `1`, `x_i` and `x_i^2`.
#[inline(always)]
pub fn quadratic_stencil(t: [f64; 3]) -> [f64; 7] {
    let q = [t[0] * t[0], t[1] * t[1], t[2] * t[2]];
    [
        1.0 - q[0] - q[1] - q[2],
        0.5 * (q[0] + t[0]),
        0.5 * (q[0] - t[0]),
        0.5 * (q[1] + t[1]),
        0.5 * (q[1] - t[1]),
        0.5 * (q[2] + t[2]),
        0.5 * (q[2] - t[2]),
    ]
}

/// `floor(x + 1/2)` for lattice coordinates `x > -4096`; ties round up.
///
/// The float-to-integer cast avoids a libm call on targets without SSE4.1.
#[inline(always)]
pub fn nearest_node(x: f64) -> i64 {
    (x + 4096.5) as i64 - 4096
}

/// Padding (in nodes) around the box in padded field layouts.
pub const PAD: usize = 2;

/// Fixed rotation applied to every sphere rule. A generic orientation keeps
/// post-collision points away from the midpoints between lattice nodes,
/// where the nearest-node stencil switches.
pub fn sphere_rotation() -> [[f64; 3]; 3] {
    // z-y-z Euler angles with no rational relation to the lattice axes
    let (a, b, c) = (0.412_310_562_561_766_f64, 0.927_361_849_549_570_4_f64, 1.318_238_139_681_119_f64);
    let (ca, sa, cb, sb, cc, sc) = (a.cos(), a.sin(), b.cos(), b.sin(), c.cos(), c.sin());
    [
        [ca * cb * cc - sa * sc, -ca * cb * sc - sa * cc, ca * sb],
        [sa * cb * cc + ca * sc, -sa * cb * sc + ca * cc, sa * sb],
        [-sb * cc, sb * sc, cb],
    ]
}

pub fn rotate(r: &[[f64; 3]; 3], x: Vec3) -> Vec3 {
    [
        r[0][0] * x[0] + r[0][1] * x[1] + r[0][2] * x[2],
        r[1][0] * x[0] + r[1][1] * x[1] + r[1][2] * x[2],
        r[2][0] * x[0] + r[2][1] * x[1] + r[2][2] * x[2],
    ]
}

/// One `(offset m, direction ω)` pair of the collision sweep.
///
/// With `d = (m·ω) ω` in lattice units, `v' = v + d` and `u' = u - d`.
/// `c` is the node nearest to `d` and `t = d - c`; the stencil of `v'` is
/// centred at `v + c` with weights from `t`, the one of `u'` at `u - c`
/// with weights from `-t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepEntry {
    /// `W(m) · B̃(m, ω) · w_ω`.
    pub coef: f64,
    pub t: [f64; 3],
    pub c: [i32; 3],
    /// Linear padded-layout offset of `c`.
    pub lin: isize,
}

/// Precomputed collision geometry for one grid, exponent and sphere rule.
#[derive(Debug, Clone)]
pub struct CollisionGeometry {
    pub grid: VelocityGrid,
    pub gamma: f64,
    pub kernel: AngularKernel,
    pub treatment: SingularTreatment,
    pub b0: f64,
    /// One node per antipodal pair of the (rotated) sphere rule.
    pub omega: Vec<Vec3>,
    /// Folded weights (sum `4π`).
    pub omega_weight: Vec<f64>,
    /// `W(m)` over the offset cube `[-(n-1), n-1]^3`.
    pub lattice_weight: Vec<f64>,
    /// Per-offset factor turning the kernel shape into the renormalized
    /// angular weight: `B̃(m, ω) = angular_scale[m] · shape(m·ω)`.
    pub angular_scale: Vec<f64>,
    /// `omega.len()` entries per offset, offsets in `offset_index` order.
    pub sweep: Vec<SweepEntry>,
    /// `e^(-|u|^2)` per node.
    pub exp_u2: Vec<f64>,
    /// `√μ` per node.
    pub sqrt_mu: Vec<f64>,
    pub n: usize,
    /// Side of the padded cube, `n + 2 PAD`.
    pub np: usize,
    /// Linear offsets in the padded layout for `[centre, +x, -x, +y, -y, +z, -z]`.
    pub stencil_offsets: [isize; 7],
}

impl CollisionGeometry {
    pub fn new(
        grid: VelocityGrid,
        gamma: f64,
        kernel: AngularKernel,
        treatment: SingularTreatment,
        sphere: &SphereQuadrature,
    ) -> Result<Self> {
        if !(gamma > -3.0 && gamma < 0.0) {
            return Err(Error::invalid(format!("gamma = {gamma} outside the soft-potential range (-3, 0)")));
        }
        if let SingularTreatment::Softened { eps } = treatment {
            if !(eps > 0.0) {
                return Err(Error::invalid(format!("softening eps = {eps} must be positive")));
            }
        }
        let n = grid.n_per_axis;
        let h = grid.h();
        let (folded, omega_weight) = sphere.folded();
        let rot = sphere_rotation();
        let omega: Vec<Vec3> = folded.iter().map(|o| rotate(&rot, *o)).collect();
        let b0 = kernel.b0();
        let side = 2 * n - 1;
        let np = n + 2 * PAD;
        let (sx, sy) = ((np * np) as isize, np as isize);
        let entries = side.pow(3) * omega.len();
        let mut sweep = Vec::new();
        sweep
            .try_reserve_exact(entries)
            .map_err(|_| Error::invalid(format!("collision sweep table of {entries} entries does not fit in memory")))?;
        let mut lattice_weight = Vec::with_capacity(side.pow(3));
        let mut angular_scale = Vec::with_capacity(side.pow(3));
        let reach = n as i64 - 1;
        for i in -reach..=reach {
            for j in -reach..=reach {
                for k in -reach..=reach {
                    let m = [i, j, k];
                    let w = lattice_kernel_weight(m, h, gamma, treatment);
                    let scale = angular_scale_for(m, &kernel, &omega, &omega_weight);
                    lattice_weight.push(w);
                    angular_scale.push(scale);
                    let mf = [i as f64, j as f64, k as f64];
                    for (o, ow) in omega.iter().zip(&omega_weight) {
                        if m == [0, 0, 0] {
                            sweep.push(SweepEntry::default());
                            continue;
                        }
                        let s = mf[0] * o[0] + mf[1] * o[1] + mf[2] * o[2];
                        let d = [s * o[0], s * o[1], s * o[2]];
                        let c = d.map(|x| nearest_node(x) as i32);
                        let shape = match kernel.kind {
                            AngularKind::AbsCos => s.abs(),
                            AngularKind::Constant => 1.0,
                        };
                        sweep.push(SweepEntry {
                            coef: w * scale * shape * ow,
                            t: [d[0] - c[0] as f64, d[1] - c[1] as f64, d[2] - c[2] as f64],
                            c,
                            lin: c[0] as isize * sx + c[1] as isize * sy + c[2] as isize,
                        });
                    }
                }
            }
        }
        let exp_u2 = (0..grid.len())
            .map(|idx| {
                let v = grid.velocity(idx);
                (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()
            })
            .collect();
        let sqrt_mu = (0..grid.len()).map(|idx| crate::velocity::maxwellian::sqrt_mu(grid.velocity(idx))).collect();
        Ok(CollisionGeometry {
            grid,
            gamma,
            kernel,
            treatment,
            b0,
            omega,
            omega_weight,
            lattice_weight,
            angular_scale,
            sweep,
            exp_u2,
            sqrt_mu,
            n,
            np,
            stencil_offsets: [0, sx, -sx, sy, -sy, 1, -1],
        })
    }

    /// Index of offset `m = u - v` into the per-offset tables.
    #[inline(always)]
    pub fn offset_index(&self, m: [i64; 3]) -> usize {
        let side = 2 * self.n as i64 - 1;
        let r = self.n as i64 - 1;
        (((m[0] + r) * side + (m[1] + r)) * side + (m[2] + r)) as usize
    }

    #[inline(always)]
    pub fn padded_index(&self, ijk: [i64; 3]) -> usize {
        let p = PAD as i64;
        let np = self.np as i64;
        (((ijk[0] + p) * np + (ijk[1] + p)) * np + (ijk[2] + p)) as usize
    }

    pub fn padded_len(&self) -> usize {
        self.np.pow(3)
    }

    /// `F = f / √μ` on the padded cube (zero outside the box), `batch`
    /// fields interleaved per node.
    pub fn padded_weighted(&self, fields: &[&[f64]]) -> Vec<f64> {
        let b = fields.len();
        let mut out = vec![0.0; self.padded_len() * b];
        for idx in 0..self.grid.len() {
            let [i, j, k] = self.grid.ijk(idx);
            let p = self.padded_index([i as i64, j as i64, k as i64]);
            for (q, f) in fields.iter().enumerate() {
                out[p * b + q] = f[idx] / self.sqrt_mu[idx];
            }
        }
        out
    }

    /// Runs `visit(u, entry_range)` for every node `u` of the grid with the
    /// sweep entries of the offset `u - v`, in node order.
    #[inline(always)]
    pub fn for_each_partner<F: FnMut(usize, [i32; 3], &[SweepEntry])>(&self, v: usize, mut visit: F) {
        let n = self.n;
        let [a, b, c] = self.grid.ijk(v);
        let side = 2 * n - 1;
        let r = n - 1;
        let k_omega = self.omega.len();
        let mut ui = 0;
        for i in 0..n {
            for j in 0..n {
                let row = ((i + r - a) * side + (j + r - b)) * side + (r - c);
                for k in 0..n {
                    let mi = row + k;
                    visit(ui, [i as i32, j as i32, k as i32], &self.sweep[mi * k_omega..(mi + 1) * k_omega]);
                    ui += 1;
                }
            }
        }
    }

    /// Whether the stencil centred at lattice node `x` touches the box.
    #[inline(always)]
    pub fn centre_in_range(&self, x: [i32; 3]) -> bool {
        let lim = self.n as u32 + 1;
        ((x[0] + 1) as u32 <= lim) & ((x[1] + 1) as u32 <= lim) & ((x[2] + 1) as u32 <= lim)
    }

    /// Visits every in-range `(u, ω)` contribution to node `v` with `u ≠ v`:
    /// `visit(u, W B̃ w_ω e^(-|u|^2), centre of u', centre of v', weights)`.
    /// Centres are padded indices; the `v'` stencil uses `stencil_offsets`
    /// and the `u'` stencil the negated offsets.
    #[inline(always)]
    pub fn sweep_node<F: FnMut(usize, f64, usize, usize, &[f64; 7])>(&self, v: usize, mut visit: F) {
        let [a, b, c] = self.grid.ijk(v).map(|x| x as i32);
        let pv0 = self.padded_index([a as i64, b as i64, c as i64]) as isize;
        self.for_each_partner(v, |ui, u, entries| {
            if u == [a, b, c] {
                return;
            }
            let e_u = self.exp_u2[ui];
            let pu0 = self.padded_index([u[0] as i64, u[1] as i64, u[2] as i64]) as isize;
            for e in entries {
                let cv = [a + e.c[0], b + e.c[1], c + e.c[2]];
                let cu = [u[0] - e.c[0], u[1] - e.c[1], u[2] - e.c[2]];
                if !(self.centre_in_range(cv) & self.centre_in_range(cu)) {
                    continue;
                }
                let w = quadratic_stencil(e.t);
                visit(ui, e.coef * e_u, (pu0 - e.lin) as usize, (pv0 + e.lin) as usize, &w);
            }
        });
    }

    /// Stencil value of a padded single field around `centre`; `sign = -1`
    /// mirrors the stencil (used for `u'`).
    #[inline(always)]
    pub fn gather(&self, fp: &[f64], centre: usize, sign: isize, w: &[f64; 7]) -> f64 {
        let o = &self.stencil_offsets;
        let p = centre as isize;
        w[0] * fp[centre]
            + w[1] * fp[(p + sign * o[1]) as usize]
            + w[2] * fp[(p + sign * o[2]) as usize]
            + w[3] * fp[(p + sign * o[3]) as usize]
            + w[4] * fp[(p + sign * o[4]) as usize]
            + w[5] * fp[(p + sign * o[5]) as usize]
            + w[6] * fp[(p + sign * o[6]) as usize]
    }

    /// Discrete collision frequency `b0 Σ_u W(u - v) e^(-|u|^2)` of the lattice rule.
    pub fn discrete_frequency(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|vi| {
                let [a, b, c] = self.grid.ijk(vi);
                let mut acc = 0.0;
                for ui in 0..self.grid.len() {
                    let [i, j, k] = self.grid.ijk(ui);
                    let m = [i as i64 - a as i64, j as i64 - b as i64, k as i64 - c as i64];
                    acc += self.lattice_weight[self.offset_index(m)] * self.exp_u2[ui];
                }
                self.b0 * acc
            })
            .collect()
    }
}

/// Normalizer making the discrete angular integral of `B` exact for
/// offset `m`: `B̃ = B · b0 / Σ_k w_k B(m̂·ω_k)`.
fn angular_scale_for(m: [i64; 3], kernel: &AngularKernel, omega: &[Vec3], weight: &[f64]) -> f64 {
    let b0 = kernel.b0();
    let norm = ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt();
    if norm == 0.0 {
        // u = v: the collision is trivial and B̃ is uniform.
        return b0 / (4.0 * std::f64::consts::PI);
    }
    let mf = [m[0] as f64, m[1] as f64, m[2] as f64];
    let mut sum = 0.0;
    for (o, w) in omega.iter().zip(weight) {
        let c = (mf[0] * o[0] + mf[1] * o[1] + mf[2] * o[2]) / norm;
        sum += w * kernel.eval(c);
    }
    match kernel.kind {
        AngularKind::AbsCos => kernel.c_b * b0 / (norm * sum),
        AngularKind::Constant => kernel.c_b * b0 / sum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn post_collide_examples() {
        let (up, vp) = post_collide([1.0, 0.0, 0.0], [0.0; 3], [0.0, 0.0, 1.0]);
        assert_eq!((up, vp), ([1.0, 0.0, 0.0], [0.0; 3]));
        let (up, vp) = post_collide([1.0, 0.0, 0.0], [0.0; 3], [1.0, 0.0, 0.0]);
        assert_eq!((up, vp), ([0.0; 3], [1.0, 0.0, 0.0]));
    }

    proptest! {
        #[test]
        fn post_collide_conserves_momentum_and_energy(
            u in prop::array::uniform3(-5.0f64..5.0),
            v in prop::array::uniform3(-5.0f64..5.0),
            o in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let len = (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt();
            prop_assume!(len > 1e-3);
            let w = [o[0] / len, o[1] / len, o[2] / len];
            let (up, vp) = post_collide(u, v, w);
            let e = |a: Vec3| a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
            prop_assert!((e(up) + e(vp) - e(u) - e(v)).abs() < 1e-12);
            for i in 0..3 {
                prop_assert!((up[i] + vp[i] - u[i] - v[i]).abs() < 1e-13);
            }
        }

        #[test]
        fn stencil_is_exact_for_quadratics(t in prop::array::uniform3(-0.5f64..0.5)) {
            let w = quadratic_stencil(t);
            let nodes: [[f64; 3]; 7] = [
                [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0],
            ];
            let fs: [fn([f64; 3]) -> f64; 5] = [
                |_| 1.0, |x| x[0], |x| x[1] - 2.0 * x[2], |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2], |x| x[2] * x[2],
            ];
            for f in fs {
                let num: f64 = w.iter().zip(&nodes).map(|(c, p)| c * f(*p)).sum();
                prop_assert!((num - f(t)).abs() < 1e-14);
            }
        }
    }

    /// Brute-force check of the corrected lattice rule against a radial integral.
    #[test]
    fn corrected_lattice_rule_integrates_singular_gaussian() {
        use crate::quadrature::integrate;
        for &gamma in &[-2.5, -2.0, -1.5, -1.0] {
            let exact = integrate(|r: f64| 4.0 * std::f64::consts::PI * r.powf(2.0 + gamma) * (-r * r).exp(), 0.0, 12.0, 1e-14);
            let h = 0.3;
            let reach = (9.0 / h) as i64;
            let mut sum = 0.0;
            for i in -reach..=reach {
                for j in -reach..=reach {
                    for k in -reach..=reach {
                        let r2 = h * h * (i * i + j * j + k * k) as f64;
                        sum += lattice_kernel_weight([i, j, k], h, gamma, SingularTreatment::Corrected) * (-r2).exp();
                    }
                }
            }
            assert!(((sum - exact) / exact).abs() < 2e-4, "gamma={gamma}: {sum} vs {exact}");
        }
    }
}
