use std::f64::consts::PI;

use super::grid::VelocityGrid;

/// Node values of `μ = π^(-3/2) e^(-|v|^2)` and `√μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellianBackground {
    pub mu: Vec<f64>,
    pub sqrt_mu: Vec<f64>,
}

pub fn mu(v: [f64; 3]) -> f64 {
    PI.powf(-1.5) * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()
}

pub fn sqrt_mu(v: [f64; 3]) -> f64 {
    PI.powf(-0.75) * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp()
}

impl MaxwellianBackground {
    pub fn new(grid: &VelocityGrid) -> Self {
        let sqrt_mu: Vec<f64> = (0..grid.len()).map(|i| sqrt_mu(grid.velocity(i))).collect();
        let mu = (0..grid.len()).map(|i| mu(grid.velocity(i))).collect();
        MaxwellianBackground { mu, sqrt_mu }
    }

    pub fn max_mu(&self) -> f64 {
        PI.powf(-1.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_consistency_and_normalization() {
        let g = VelocityGrid::new(25, 6.0).unwrap();
        let m = MaxwellianBackground::new(&g);
        for (a, b) in m.mu.iter().zip(&m.sqrt_mu) {
            assert!((a - b * b).abs() <= 1e-15 * a.max(1e-300));
        }
        let total: f64 = m.mu.iter().sum::<f64>() * g.cell_volume();
        assert!((total - 1.0).abs() < 1e-10);
    }
}
