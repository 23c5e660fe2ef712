//! Velocity-domain discretization.

pub mod derivative;
pub mod distribution;
pub mod grid;
pub mod interp;
pub mod maxwellian;

pub use derivative::{partial_derivative, MultiIndex};
pub use distribution::Distribution;
pub use grid::VelocityGrid;
pub use interp::interpolate;
pub use maxwellian::MaxwellianBackground;

use crate::error::{Error, Result};

pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `w(v)^θ = (1 + |v|)^(γθ)`.
pub fn weight(v: [f64; 3], theta: f64, gamma: f64) -> f64 {
    (1.0 + norm3(v)).powf(gamma * theta)
}

/// Node values of `w^θ`.
pub fn weight_nodes(grid: &VelocityGrid, theta: f64, gamma: f64) -> Vec<f64> {
    (0..grid.len()).map(|i| weight(grid.velocity(i), theta, gamma)).collect()
}

/// `Σ h^3 w^(2θ) (ν) f g` over all nodes.
///
/// The lattice sum weights every node equally; for fields that vanish at
/// the box faces this agrees with the trapezoid rule and keeps symmetric
/// matrices self-adjoint in this inner product.
pub fn inner_product(
    f: &Distribution,
    g: &Distribution,
    weight_exponent: f64,
    gamma: f64,
    nu: Option<&[f64]>,
) -> Result<f64> {
    f.check_same_grid(g)?;
    if let Some(nu) = nu {
        if nu.len() != f.values.len() {
            return Err(Error::GridMismatch("collision frequency vector length".into()));
        }
    }
    let grid = f.grid;
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let mut term = f.values[i] * g.values[i];
        if weight_exponent != 0.0 {
            term *= weight(grid.velocity(i), 2.0 * weight_exponent, gamma);
        }
        if let Some(nu) = nu {
            term *= nu[i];
        }
        acc += term;
    }
    Ok(acc * grid.cell_volume())
}

/// Unweighted `⟨f, g⟩`.
pub fn dot(f: &[f64], g: &[f64], cell_volume: f64) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * cell_volume
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        assert_eq!(weight([0.0; 3], 3.7, -2.0), 1.0);
        assert_eq!(weight([1.0, 0.0, 0.0], 1.0, -2.0), 0.25);
        assert!(weight([3.0, -4.0, 1.0], 1.0, -0.5) <= 1.0);
    }

    #[test]
    fn sqrt_mu_is_normalized() {
        let g = VelocityGrid::new(24, 6.0).unwrap();
        let s = Distribution::from_fn(g, maxwellian::sqrt_mu);
        let n = inner_product(&s, &s, 0.0, -2.0, None).unwrap();
        assert!((n - 1.0).abs() < 1e-8);
    }
}
