//! Smooth test fields and initial data.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution as _, Normal, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{invariant_phi, InvariantProjector};
use crate::velocity::{maxwellian, Distribution, VelocityGrid};

/// Seeded generator used for every randomized field.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of 2–4 Gaussian bumps with centres in the ball `|c| <= 2.5`,
/// widths in `[0.7, 1.0]` and standard-normal amplitudes.
pub fn random_smooth_field<R: Rng>(grid: &VelocityGrid, rng: &mut R) -> Distribution {
    let count = rng.random_range(2..=4);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let bumps: Vec<([f64; 3], f64, f64)> = (0..count)
        .map(|_| {
            let dir: [f64; 3] = UnitSphere.sample(rng);
            let r = 2.5 * rng.random::<f64>().cbrt();
            let centre = [r * dir[0], r * dir[1], r * dir[2]];
            let width = rng.random_range(0.7..=1.0);
            (centre, width, normal.sample(rng))
        })
        .collect();
    Distribution::from_fn(*grid, |v| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let d2 = (v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2);
                a * (-d2 / (w * w)).exp()
            })
            .sum()
    })
}

/// Initial-data families for runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    /// `amplitude · (I - P) [√μ e^(-|v - c|^2 / w^2)]` with `c = (0.5, -0.3, 0.2)`.
    InvariantFreeBump { amplitude: f64, width: f64 },
    /// `amplitude · √μ φ_which`.
    MomentSeeded { amplitude: f64, which: usize },
    /// Binary distribution file.
    File { path: String },
}

pub const BUMP_CENTRE: [f64; 3] = [0.5, -0.3, 0.2];

pub fn initial_data(spec: &InitialData, grid: &VelocityGrid) -> Result<Distribution> {
    match spec {
        InitialData::Zero => Ok(Distribution::zeros(*grid)),
        InitialData::InvariantFreeBump { amplitude, width } => {
            if !(*width > 0.0) {
                return Err(Error::invalid(format!("bump width {width} must be positive")));
            }
            let c = BUMP_CENTRE;
            let bump = Distribution::from_fn(*grid, |v| {
                let d2 = (v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2);
                maxwellian::sqrt_mu(v) * (-d2 / (width * width)).exp()
            });
            Ok(InvariantProjector::new(grid).complement(&bump)?.scaled(*amplitude))
        }
        InitialData::MomentSeeded { amplitude, which } => {
            if *which > 4 {
                return Err(Error::invalid(format!("invariant index {which} not in 0..=4")));
            }
            Ok(Distribution::from_fn(*grid, |v| amplitude * invariant_phi(*which, v) * maxwellian::sqrt_mu(v)))
        }
        InitialData::File { path } => {
            let file = std::fs::File::open(path)?;
            let f = Distribution::read_binary(std::io::BufReader::new(file))?;
            if !f.grid.same_as(grid) {
                return Err(Error::GridMismatch(format!("{path}: {:?} vs configured {:?}", f.grid, grid)));
            }
            Ok(f)
        }
    }
}

/// `min_v (μ + √μ f)`.
pub fn min_density(f: &Distribution) -> f64 {
    (0..f.grid.len())
        .map(|i| {
            let v = f.grid.velocity(i);
            maxwellian::mu(v) + maxwellian::sqrt_mu(v) * f.values[i]
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_are_reproducible() {
        let g = VelocityGrid::new(8, 6.0).unwrap();
        let a = random_smooth_field(&g, &mut seeded_rng(7));
        let b = random_smooth_field(&g, &mut seeded_rng(7));
        let c = random_smooth_field(&g, &mut seeded_rng(8));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.is_finite());
    }

    #[test]
    fn bump_is_invariant_free_and_admissible() {
        let g = VelocityGrid::new(12, 6.0).unwrap();
        let f = initial_data(&InitialData::InvariantFreeBump { amplitude: 0.05, width: 1.0 }, &g).unwrap();
        for m in InvariantProjector::new(&g).moments(&f).unwrap() {
            assert!(m.abs() < 1e-14);
        }
        assert!(min_density(&f) >= 0.0);
        assert!(initial_data(&InitialData::MomentSeeded { amplitude: 1.0, which: 5 }, &g).is_err());
    }
}
