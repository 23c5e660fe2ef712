//! Linear collision operators `K1`, `K2`, `K = K2 - K1` and `L = ν - K`.

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::velocity::Distribution;

use super::geometry::CollisionGeometry;

/// Default cap on the node count of a dense `K` matrix.
pub const DEFAULT_NODE_BUDGET: usize = 33 * 33 * 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    K1,
    K2,
    K,
}

fn check_grid(geom: &CollisionGeometry, f: &Distribution) -> Result<()> {
    if !geom.grid.same_as(&f.grid) {
        return Err(Error::GridMismatch(format!("{:?} vs operator grid {:?}", f.grid, geom.grid)));
    }
    Ok(())
}

/// Gain-type angular sum for node `v`: `Σ_u W e^(-|u|^2) Σ_ω w B̃ (F(u') + F(v'))`.
fn k2_sum(geom: &CollisionGeometry, fp: &[f64], v: usize) -> f64 {
    let mut acc = 0.0;
    geom.sweep_node(v, |_, coef, pu, pv, w| {
        acc += coef * (geom.gather(fp, pu, -1, w) + geom.gather(fp, pv, 1, w));
    });
    let [a, b, c] = geom.grid.ijk(v).map(|x| x as i64);
    let self_term = geom.lattice_weight[geom.offset_index([0, 0, 0])] * geom.exp_u2[v];
    acc + self_term * 2.0 * geom.b0 * fp[geom.padded_index([a, b, c])]
}

/// `Σ_u W(u - v) e^(-|u|^2) F(u)`.
fn k1_sum(geom: &CollisionGeometry, fvals: &[f64], v: usize) -> f64 {
    let grid = &geom.grid;
    let [a, b, c] = grid.ijk(v).map(|x| x as i64);
    let mut acc = 0.0;
    for ui in 0..grid.len() {
        let [i, j, k] = grid.ijk(ui).map(|x| x as i64);
        let mi = geom.offset_index([i - a, j - b, k - c]);
        acc += geom.lattice_weight[mi] * geom.exp_u2[ui] * fvals[ui];
    }
    acc
}

fn apply_part(geom: &CollisionGeometry, f: &Distribution, part: Part) -> Result<Distribution> {
    check_grid(geom, f)?;
    let fw: Vec<f64> = f.values.iter().zip(&geom.sqrt_mu).map(|(x, s)| x / s).collect();
    let fp = if part == Part::K1 { Vec::new() } else { geom.padded_weighted(&[&f.values]) };
    let values = (0..geom.grid.len())
        .into_par_iter()
        .map(|v| {
            let k2 = if part == Part::K1 { 0.0 } else { k2_sum(geom, &fp, v) };
            let k1 = if part == Part::K2 { 0.0 } else { geom.b0 * k1_sum(geom, &fw, v) };
            geom.sqrt_mu[v] * (k2 - k1)
        })
        .collect();
    Ok(Distribution { grid: f.grid, values })
}

/// `K1 f(v) = e^(-|v|^2/2) ∫∫ |u-v|^γ B e^(-|u|^2/2) f(u) dω du` by lattice quadrature.
pub fn apply_k1(geom: &CollisionGeometry, f: &Distribution) -> Result<Distribution> {
    apply_part(geom, f, Part::K1).map(|d| d.scaled(-1.0))
}

/// `K2 f` with `f(u')`, `f(v')` taken from the `√μ`-weighted stencil interpolant.
pub fn apply_k2(geom: &CollisionGeometry, f: &Distribution) -> Result<Distribution> {
    apply_part(geom, f, Part::K2)
}

/// `K f = K2 f - K1 f` evaluated without a stored matrix.
pub fn apply_k(geom: &CollisionGeometry, f: &Distribution) -> Result<Distribution> {
    apply_part(geom, f, Part::K)
}

/// Dense matrix of `K = K2 - K1` on the grid nodes.
#[derive(Debug, Clone)]
pub struct KMatrix {
    pub data: Array2<f64>,
    /// `‖M - Mᵀ‖_F / ‖M‖_F` of the assembled (unsymmetrized) matrix.
    pub asymmetry: f64,
    pub symmetrized: bool,
}

/// Assembles `M` with `M f = K f` for every nodal vector `f`.
pub fn assemble_k_matrix(geom: &CollisionGeometry, node_budget: usize) -> Result<KMatrix> {
    let nodes = geom.grid.len();
    if nodes > node_budget {
        return Err(Error::MemoryBudget { nodes, budget: node_budget });
    }
    let mut data: Vec<f64> = Vec::new();
    data.try_reserve_exact(nodes * nodes)
        .map_err(|_| Error::MemoryBudget { nodes, budget: node_budget })?;
    data.resize(nodes * nodes, 0.0);
    let grid = geom.grid;
    let padded_len = geom.padded_len();
    data.par_chunks_mut(nodes).enumerate().for_each_init(
        || vec![0.0; padded_len],
        |buf, (v, row)| {
            buf.iter_mut().for_each(|x| *x = 0.0);
            let [a, b, c] = grid.ijk(v).map(|x| x as i64);
            let w0 = geom.lattice_weight[geom.offset_index([0, 0, 0])];
            for ui in 0..nodes {
                let [i, j, k] = grid.ijk(ui).map(|x| x as i64);
                let mi = geom.offset_index([i - a, j - b, k - c]);
                buf[geom.padded_index([i, j, k])] -= geom.b0 * geom.lattice_weight[mi] * geom.exp_u2[ui];
            }
            buf[geom.padded_index([a, b, c])] += 2.0 * geom.b0 * w0 * geom.exp_u2[v];
            let offs = geom.stencil_offsets;
            geom.sweep_node(v, |_, coef, pu, pv, w| {
                for q in 0..7 {
                    buf[(pu as isize - offs[q]) as usize] += coef * w[q];
                    buf[(pv as isize + offs[q]) as usize] += coef * w[q];
                }
            });
            let sv = geom.sqrt_mu[v];
            for (x, out) in row.iter_mut().enumerate() {
                let [i, j, k] = grid.ijk(x).map(|t| t as i64);
                *out = sv * buf[geom.padded_index([i, j, k])] / geom.sqrt_mu[x];
            }
        },
    );
    let data = Array2::from_shape_vec((nodes, nodes), data).expect("shape matches length");
    let asymmetry = relative_asymmetry(&data);
    Ok(KMatrix { data, asymmetry, symmetrized: false })
}

fn relative_asymmetry(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut diff = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = m[[i, j]];
            total += a * a;
            if j > i {
                let d = a - m[[j, i]];
                diff += 2.0 * d * d;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (diff / total).sqrt()
    }
}

impl KMatrix {
    pub fn nodes(&self) -> usize {
        self.data.nrows()
    }

    /// Replaces `M` by `(M + Mᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let n = self.nodes();
        for i in 0..n {
            for j in i + 1..n {
                let avg = 0.5 * (self.data[[i, j]] + self.data[[j, i]]);
                self.data[[i, j]] = avg;
                self.data[[j, i]] = avg;
            }
        }
        self.symmetrized = true;
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.nodes();
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.data.row(i);
            let row = row.as_slice().expect("row-major storage");
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(f) {
                acc += a * b;
            }
            *o = acc;
        }
        out
    }

    /// `M X` for a block of column vectors (`nodes × batch`).
    pub fn apply_batch(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.data.dot(&x)
    }

    /// Row-major binary export: `rows` (u64 LE), `cols` (u64 LE), then f64 LE entries.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.nodes() as u64;
        out.write_all(&n.to_le_bytes())?;
        out.write_all(&n.to_le_bytes())?;
        for x in self.data.iter() {
            out.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }
}
