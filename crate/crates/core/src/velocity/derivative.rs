use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use crate::error::{Error, Result};

/// Derivative multi-index `β = (β1, β2, β3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub [u32; 3]);

impl MultiIndex {
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// All multi-indices with `|β| <= max_order`, in lexicographic order.
    pub fn up_to(max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for a in 0..=max_order {
            for b in 0..=max_order - a {
                for c in 0..=max_order - a - b {
                    out.push(MultiIndex([a, b, c]));
                }
            }
        }
        out
    }
}

/// Largest derivative order per axis supported by the stencils.
pub const MAX_AXIS_ORDER: u32 = 4;

/// Fornberg's algorithm: weights of the `m`-th derivative at `x0` on nodes `x`.
pub fn fornberg_weights(x0: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Per-node stencils `(start, weights)` for the `order`-th derivative on
/// `n` uniform points of spacing `h`, fourth-order accurate throughout.
///
/// Interior nodes use the centred stencil (5 points for orders 1–2, 7 for
/// orders 3–4); near the ends a shifted window of `order + 4` points is used.
pub fn axis_stencils(n: usize, h: f64, order: u32) -> Result<Vec<(usize, Vec<f64>)>> {
    if order == 0 || order > MAX_AXIS_ORDER {
        return Err(Error::invalid(format!("axis derivative order {order} not in 1..={MAX_AXIS_ORDER}")));
    }
    let central = if order <= 2 { 5 } else { 7 };
    let shifted = order as usize + 4;
    if n < shifted.max(central) {
        return Err(Error::StencilExceedsGrid { needed: shifted.max(central), available: n });
    }
    let half = central / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (start, width) = if i >= half && i + half < n {
            (i - half, central)
        } else {
            let s = i.saturating_sub(shifted / 2).min(n - shifted);
            (s, shifted)
        };
        let nodes: Vec<f64> = (start..start + width).map(|j| j as f64 - i as f64).collect();
        let w = fornberg_weights(0.0, &nodes, order as usize)
            .into_iter()
            .map(|c| c / h.powi(order as i32))
            .collect();
        out.push((start, w));
    }
    Ok(out)
}

fn derivative_along(values: &[f64], n: usize, h: f64, axis: usize, order: u32) -> Result<Vec<f64>> {
    let stencils = axis_stencils(n, h, order)?;
    let strides = [n * n, n, 1];
    let s = strides[axis];
    let mut out = vec![0.0; values.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let pos = (idx / s) % n;
        let base = idx - pos * s;
        let (start, w) = &stencils[pos];
        let mut acc = 0.0;
        for (q, c) in w.iter().enumerate() {
            acc += c * values[base + (start + q) * s];
        }
        *o = acc;
    }
    Ok(out)
}

/// `∂_β f` by fourth-order finite differences applied axis by axis.
pub fn partial_derivative(f: &Distribution, beta: MultiIndex) -> Result<Distribution> {
    let n = f.grid.n_per_axis;
    let h = f.grid.h();
    let mut values = f.values.clone();
    for axis in 0..3 {
        if beta.0[axis] > 0 {
            values = derivative_along(&values, n, h, axis, beta.0[axis])?;
        }
    }
    Ok(Distribution { grid: f.grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::{maxwellian, VelocityGrid};

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let ex = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(ex) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let ex = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(ex) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn constants_and_linear_fields() {
        let g = VelocityGrid::new(9, 2.0).unwrap();
        let c = Distribution::from_fn(g, |_| 3.5);
        for beta in MultiIndex::up_to(4).into_iter().skip(1) {
            let d = partial_derivative(&c, beta).unwrap();
            assert!(d.max_abs() < 1e-9, "{beta:?}");
        }
        let lin = Distribution::from_fn(g, |v| v[0]);
        let d = partial_derivative(&lin, MultiIndex([1, 0, 0])).unwrap();
        assert!(d.values.iter().all(|x| (x - 1.0).abs() < 1e-12));
        // cubic polynomials are reproduced by every stencil, including one-sided ones
        let cub = Distribution::from_fn(g, |v| v[1].powi(3) * v[2]);
        let d = partial_derivative(&cub, MultiIndex([0, 2, 1])).unwrap();
        for (i, x) in d.values.iter().enumerate() {
            let v = g.velocity(i);
            assert!((x - 6.0 * v[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn stencil_too_wide() {
        let g = VelocityGrid::new(6, 2.0).unwrap();
        let f = Distribution::zeros(g);
        assert!(matches!(
            partial_derivative(&f, MultiIndex([3, 0, 0])),
            Err(Error::StencilExceedsGrid { .. })
        ));
    }

    fn gaussian_error(n: usize) -> f64 {
        let g = VelocityGrid::new(n, 6.0).unwrap();
        let s = Distribution::from_fn(g, maxwellian::sqrt_mu);
        let d = partial_derivative(&s, MultiIndex([1, 0, 0])).unwrap();
        d.values
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let v = g.velocity(i);
                (x + v[0] * maxwellian::sqrt_mu(v)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_derivative_converges_at_fourth_order() {
        let (e32, e48, e64) = (gaussian_error(32), gaussian_error(48), gaussian_error(64));
        let h = |n: usize| 12.0 / (n - 1) as f64;
        let p1 = (e32 / e48).ln() / (h(32) / h(48)).ln();
        let p2 = (e48 / e64).ln() / (h(48) / h(64)).ln();
        assert!(p1 >= 3.5 && p2 >= 3.5, "observed orders {p1}, {p2}");
    }
}
