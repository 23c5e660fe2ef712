//! Bilinear collision operator `Γ(f, g)`, split into gain and loss.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::velocity::Distribution;

use super::geometry::CollisionGeometry;

fn check(geom: &CollisionGeometry, fields: &[&Distribution]) -> Result<()> {
    for f in fields {
        if !geom.grid.same_as(&f.grid) {
            return Err(Error::GridMismatch(format!("{:?} vs operator grid {:?}", f.grid, geom.grid)));
        }
    }
    Ok(())
}

/// Gain sums for a block of `B` interleaved fields at node `v`.
#[inline(always)]
fn gain_block<const B: usize>(geom: &CollisionGeometry, fp: &[f64], gp: &[f64], v: usize) -> [f64; B] {
    let offs = geom.stencil_offsets;
    let mut acc = [0.0; B];
    geom.sweep_node(v, |_, coef, pu, pv, w| {
        let mut fu = [0.0; B];
        let mut gv = [0.0; B];
        for t in 0..7 {
            let ou = (pu as isize - offs[t]) as usize * B;
            let ov = (pv as isize + offs[t]) as usize * B;
            let fs = &fp[ou..ou + B];
            let gs = &gp[ov..ov + B];
            for q in 0..B {
                fu[q] += w[t] * fs[q];
                gv[q] += w[t] * gs[q];
            }
        }
        for q in 0..B {
            acc[q] += coef * fu[q] * gv[q];
        }
    });
    let p = geom.padded_index(geom.grid.ijk(v).map(|x| x as i64)) * B;
    let self_coef = geom.lattice_weight[geom.offset_index([0, 0, 0])] * geom.exp_u2[v] * geom.b0;
    for q in 0..B {
        acc[q] += self_coef * fp[p + q] * gp[p + q];
    }
    acc
}

fn gain_chunk<const B: usize>(geom: &CollisionGeometry, fs: &[&[f64]], gs: &[&[f64]]) -> Vec<Vec<f64>> {
    let fp = geom.padded_weighted(fs);
    let gp = geom.padded_weighted(gs);
    let prefactor = PI.powf(-0.75);
    let rows: Vec<[f64; B]> = (0..geom.grid.len())
        .into_par_iter()
        .map(|v| {
            let sv = prefactor * geom.sqrt_mu[v];
            gain_block::<B>(geom, &fp, &gp, v).map(|x| sv * x)
        })
        .collect();
    (0..B).map(|q| rows.iter().map(|r| r[q]).collect()).collect()
}

/// Gain terms for several pairs `(f_b, g_b)`, swept in blocks of up to eight.
pub fn gamma_gain_batch(geom: &CollisionGeometry, pairs: &[(&Distribution, &Distribution)]) -> Result<Vec<Distribution>> {
    let fs: Vec<&Distribution> = pairs.iter().map(|p| p.0).collect();
    let gs: Vec<&Distribution> = pairs.iter().map(|p| p.1).collect();
    check(geom, &fs)?;
    check(geom, &gs)?;
    let fslices: Vec<&[f64]> = fs.iter().map(|d| d.values.as_slice()).collect();
    let gslices: Vec<&[f64]> = gs.iter().map(|d| d.values.as_slice()).collect();
    let mut out = Vec::with_capacity(pairs.len());
    let mut start = 0;
    while start < pairs.len() {
        let left = pairs.len() - start;
        let (f, g) = (&fslices[start..], &gslices[start..]);
        let (block, take) = match left {
            8.. => (gain_chunk::<8>(geom, &f[..8], &g[..8]), 8),
            4..=7 => (gain_chunk::<4>(geom, &f[..4], &g[..4]), 4),
            2..=3 => (gain_chunk::<2>(geom, &f[..2], &g[..2]), 2),
            _ => (gain_chunk::<1>(geom, &f[..1], &g[..1]), 1),
        };
        out.extend(block.into_iter().map(|values| Distribution { grid: geom.grid, values }));
        start += take;
    }
    Ok(out)
}

/// Loss term `g(v) · π^(-3/4) b0 Σ_u W(u - v) e^(-|u|^2) f(u)/√μ(u)`.
pub fn gamma_loss(geom: &CollisionGeometry, f: &Distribution, g: &Distribution) -> Result<Distribution> {
    check(geom, &[f, g])?;
    let grid = geom.grid;
    let fw: Vec<f64> = f.values.iter().zip(&geom.sqrt_mu).map(|(x, s)| x / s).collect();
    let prefactor = PI.powf(-0.75) * geom.b0;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|v| {
            let [a, b, c] = grid.ijk(v).map(|x| x as i64);
            let mut acc = 0.0;
            for ui in 0..grid.len() {
                let [i, j, k] = grid.ijk(ui).map(|x| x as i64);
                let mi = geom.offset_index([i - a, j - b, k - c]);
                acc += geom.lattice_weight[mi] * geom.exp_u2[ui] * fw[ui];
            }
            prefactor * g.values[v] * acc
        })
        .collect();
    Ok(Distribution { grid, values })
}

pub fn gamma_gain(geom: &CollisionGeometry, f: &Distribution, g: &Distribution) -> Result<Distribution> {
    Ok(gamma_gain_batch(geom, &[(f, g)])?.pop().expect("one pair in, one out"))
}

/// `Γ(f, g) = gain - loss`.
pub fn apply_gamma(geom: &CollisionGeometry, f: &Distribution, g: &Distribution) -> Result<Distribution> {
    let gain = gamma_gain(geom, f, g)?;
    let loss = gamma_loss(geom, f, g)?;
    gain.add_scaled(-1.0, &loss)
}

/// `Γ(f_b, g_b)` for several pairs in one geometry sweep.
pub fn apply_gamma_batch(geom: &CollisionGeometry, pairs: &[(&Distribution, &Distribution)]) -> Result<Vec<Distribution>> {
    let gains = gamma_gain_batch(geom, pairs)?;
    gains
        .into_iter()
        .zip(pairs)
        .map(|(gain, (f, g))| gain.add_scaled(-1.0, &gamma_loss(geom, f, g)?))
        .collect()
}
