use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform Cartesian lattice on `[-v_max, v_max]^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    pub n_per_axis: usize,
    pub v_max: f64,
}

impl VelocityGrid {
    pub fn new(n_per_axis: usize, v_max: f64) -> Result<Self> {
        if n_per_axis < 2 {
            return Err(Error::invalid(format!("n_per_axis = {n_per_axis} must be >= 2")));
        }
        if !(v_max > 0.0) || !v_max.is_finite() {
            return Err(Error::invalid(format!("v_max = {v_max} must be positive")));
        }
        Ok(VelocityGrid { n_per_axis, v_max })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.v_max / (self.n_per_axis - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_per_axis.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of lattice index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        // Symmetric form keeps coord(i) = -coord(n-1-i) exactly.
        let c = 0.5 * (self.n_per_axis - 1) as f64;
        (i as f64 - c) * self.h()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n_per_axis + j) * self.n_per_axis + k
    }

    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let n = self.n_per_axis;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn velocity(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.ijk(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Volume element `h^3` of the lattice sum.
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(3)
    }

    pub fn same_as(&self, other: &VelocityGrid) -> bool {
        self.n_per_axis == other.n_per_axis && self.v_max == other.v_max
    }
}
