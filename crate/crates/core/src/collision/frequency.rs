use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::velocity::{weight, VelocityGrid};

use super::kernel::AngularKernel;

/// `∫ |x|^γ e^(-|x + v|^2) dx` for `|v| = s`, reduced to one radial integral.
///
/// Averaging `e^(-|x+v|^2)` over the sphere `|x| = r` gives
/// `π (e^(-(r-s)^2) - e^(-(r+s)^2)) / (r s)`; substituting `t = r^(γ+3)`
/// absorbs the `r^(γ+2)` singularity into the measure.
pub fn radial_kernel_integral(s: f64, gamma: f64) -> f64 {
    let p = gamma + 3.0;
    let shell = move |r: f64| -> f64 {
        if s == 0.0 || r == 0.0 {
            4.0 * PI * (-(r * r + s * s)).exp()
        } else {
            // e^(-(r-s)^2) (1 - e^(-4rs)) / (rs), stable for small rs
            -PI * (-(r - s) * (r - s)).exp() * (-4.0 * r * s).exp_m1() / (r * s)
        }
    };
    let integrand = move |t: f64| shell(t.powf(1.0 / p)) / p;
    let lo = (s - 7.0).max(0.0);
    let hi = s + 7.0;
    let mut total = 0.0;
    if lo > 0.0 {
        total += integrate(integrand, 0.0, lo.powf(p), 1e-15);
    }
    total += integrate(integrand, lo.powf(p), hi.powf(p), 1e-15);
    total
}

/// Collision frequency `ν(v) = b0 ∫ |u - v|^γ e^(-|u|^2) du` at every node.
pub fn collision_frequency(grid: &VelocityGrid, gamma: f64, kernel: &AngularKernel) -> Result<Vec<f64>> {
    if !(gamma > -3.0 && gamma < 0.0) {
        return Err(Error::invalid(format!("gamma = {gamma} outside the soft-potential range (-3, 0)")));
    }
    let n = grid.n_per_axis as i64;
    let b0 = kernel.b0();
    let mut cache: HashMap<i64, f64> = HashMap::new();
    let mut out = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let [i, j, k] = grid.ijk(idx);
        // (2 i - (n - 1))^2 summed is an exact integer key for |v|^2.
        let key: i64 = [i, j, k].iter().map(|&a| (2 * a as i64 - (n - 1)).pow(2)).sum();
        let val = *cache.entry(key).or_insert_with(|| {
            let v = grid.velocity(idx);
            let s = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            b0 * radial_kernel_integral(s, gamma)
        });
        out.push(val);
    }
    Ok(out)
}

/// Tightest `(c1, c2)` with `c1 w(v) <= ν(v) <= c2 w(v)` over the grid.
pub fn equivalence_constants(grid: &VelocityGrid, nu: &[f64], gamma: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (idx, n) in nu.iter().enumerate() {
        let r = n / weight(grid.velocity(idx), 1.0, gamma);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}
