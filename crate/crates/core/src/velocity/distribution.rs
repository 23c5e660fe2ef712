use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::grid::VelocityGrid;
use crate::error::{Error, Result};

/// Scalar field on the nodes of a [`VelocityGrid`], stored row-major (`i, j, k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub grid: VelocityGrid,
    pub values: Vec<f64>,
}

impl Distribution {
    pub fn zeros(grid: VelocityGrid) -> Self {
        Distribution { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_values(grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Distribution { grid, values })
    }

    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: VelocityGrid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.velocity(i))).collect();
        Distribution { grid, values }
    }

    pub fn check_same_grid(&self, other: &Distribution) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Distribution { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `self + c * other`
    pub fn add_scaled(&self, c: f64, other: &Distribution) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(Distribution { grid: self.grid, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Binary layout: `n_per_axis` (u64 LE), `v_max` (f64 LE), then the node values (f64 LE).
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.grid.n_per_axis as u64).to_le_bytes())?;
        out.write_all(&self.grid.v_max.to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        input.read_exact(&mut b8)?;
        let v_max = f64::from_le_bytes(b8);
        if n > 1024 {
            return Err(Error::Format(format!("implausible n_per_axis {n}")));
        }
        let grid = VelocityGrid::new(n, v_max).map_err(|e| Error::Format(e.to_string()))?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            input.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        Ok(Distribution { grid, values })
    }

    /// Rows `v1,v2,v3,f` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "v1,v2,v3,f")?;
        for (i, f) in self.values.iter().enumerate() {
            let v = self.grid.velocity(i);
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", v[0], v[1], v[2], f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = VelocityGrid::new(5, 3.0).unwrap();
        let f = Distribution::from_fn(g, |v| v[0] - 2.0 * v[1] * v[2] + 1e-300);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 125);
        let back = Distribution::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert!(Distribution::read_binary(&buf[..40]).is_err());
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let g = VelocityGrid::new(3, 1.0).unwrap();
        assert!(Distribution::from_values(g, vec![0.0; 26]).is_err());
        let other = Distribution::zeros(VelocityGrid::new(4, 1.0).unwrap());
        assert!(Distribution::zeros(g).add_scaled(1.0, &other).is_err());
    }
}
