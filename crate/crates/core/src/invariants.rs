//! Collision invariants `√μ {1, v1, v2, v3, |v|^2}` and the projection onto their span.

use crate::error::Result;
use crate::velocity::{dot, maxwellian, Distribution, VelocityGrid};

pub const INVARIANT_NAMES: [&str; 5] = ["1", "v1", "v2", "v3", "|v|^2"];

/// `φ_i(v)` for the five collision invariants.
pub fn invariant_phi(which: usize, v: [f64; 3]) -> f64 {
    match which {
        0 => 1.0,
        1 => v[0],
        2 => v[1],
        3 => v[2],
        4 => v[0] * v[0] + v[1] * v[1] + v[2] * v[2],
        _ => panic!("invariant index {which} out of range 0..5"),
    }
}

/// Node fields `√μ φ_i`.
pub fn invariant_fields(grid: &VelocityGrid) -> Vec<Distribution> {
    (0..5)
        .map(|w| Distribution::from_fn(*grid, |v| invariant_phi(w, v) * maxwellian::sqrt_mu(v)))
        .collect()
}

/// Orthogonal projection onto span{√μ φ_i} in the lattice inner product.
#[derive(Debug, Clone)]
pub struct InvariantProjector {
    grid: VelocityGrid,
    raw: Vec<Distribution>,
    /// Orthonormal basis of the span (modified Gram–Schmidt).
    basis: Vec<Vec<f64>>,
}

impl InvariantProjector {
    pub fn new(grid: &VelocityGrid) -> Self {
        let raw = invariant_fields(grid);
        let dv = grid.cell_volume();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(5);
        for f in &raw {
            let mut e = f.values.clone();
            // two passes keep the basis orthogonal to round-off
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&e, b, dv);
                    e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = dot(&e, &e, dv).sqrt();
            e.iter_mut().for_each(|x| *x /= norm);
            basis.push(e);
        }
        InvariantProjector { grid: *grid, raw, basis }
    }

    pub fn fields(&self) -> &[Distribution] {
        &self.raw
    }

    /// `⟨f, √μ φ_i⟩` for each invariant.
    pub fn moments(&self, f: &Distribution) -> Result<[f64; 5]> {
        f.check_same_grid(&self.raw[0])?;
        let dv = self.grid.cell_volume();
        let mut out = [0.0; 5];
        for (o, e) in out.iter_mut().zip(&self.raw) {
            *o = dot(&f.values, &e.values, dv);
        }
        Ok(out)
    }

    pub fn project(&self, f: &Distribution) -> Result<Distribution> {
        f.check_same_grid(&self.raw[0])?;
        let dv = self.grid.cell_volume();
        let mut out = vec![0.0; f.values.len()];
        for b in &self.basis {
            let c = dot(&f.values, b, dv);
            out.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        Distribution::from_values(f.grid, out)
    }

    /// `(I - P) f`.
    pub fn complement(&self, f: &Distribution) -> Result<Distribution> {
        let p = self.project(f)?;
        f.add_scaled(-1.0, &p)
    }

    /// In-place `(I - P)` on raw node values.
    pub fn complement_in_place(&self, values: &mut [f64]) {
        let dv = self.grid.cell_volume();
        for b in &self.basis {
            let c = dot(values, b, dv);
            values.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}
