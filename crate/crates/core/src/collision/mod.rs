//! Collision operators for soft potentials with an angular cutoff.

pub mod frequency;
pub mod gamma;
pub mod geometry;
pub mod kernel;
pub mod linear;
pub mod probe;

pub use frequency::{collision_frequency, equivalence_constants, radial_kernel_integral};
pub use gamma::{apply_gamma, apply_gamma_batch, gamma_gain, gamma_gain_batch, gamma_loss};
pub use geometry::{post_collide, CollisionGeometry};
pub use kernel::{AngularKernel, AngularKind, SingularTreatment};
pub use linear::{apply_k, apply_k1, apply_k2, assemble_k_matrix, KMatrix, DEFAULT_NODE_BUDGET};
pub use probe::{probe_operator_bounds, ProbeReport, ProbeSettings};

use crate::error::{Error, Result};
use crate::sphere::SphereQuadrature;
use crate::velocity::{Distribution, VelocityGrid};

/// Collision frequency, geometry tables and (optionally) the dense `K` matrix for one grid.
#[derive(Debug, Clone)]
pub struct CollisionOperatorSet {
    pub geom: CollisionGeometry,
    /// Exact `ν` at the nodes.
    pub nu: Vec<f64>,
    pub k_matrix: Option<KMatrix>,
}

impl CollisionOperatorSet {
    pub fn new(
        grid: VelocityGrid,
        gamma: f64,
        kernel: AngularKernel,
        treatment: SingularTreatment,
        sphere: &SphereQuadrature,
    ) -> Result<Self> {
        let geom = CollisionGeometry::new(grid, gamma, kernel, treatment, sphere)?;
        let nu = collision_frequency(&grid, gamma, &kernel)?;
        Ok(CollisionOperatorSet { geom, nu, k_matrix: None })
    }

    /// Assembles and stores the dense `K` matrix.
    pub fn assemble(&mut self, node_budget: usize) -> Result<&KMatrix> {
        let m = assemble_k_matrix(&self.geom, node_budget)?;
        Ok(self.k_matrix.insert(m))
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.geom.grid
    }

    pub fn gamma(&self) -> f64 {
        self.geom.gamma
    }

    pub fn nu_max(&self) -> f64 {
        self.nu.iter().copied().fold(0.0, f64::max)
    }

    fn check(&self, f: &Distribution) -> Result<()> {
        if !self.geom.grid.same_as(&f.grid) {
            return Err(Error::GridMismatch(format!("{:?} vs operator grid {:?}", f.grid, self.geom.grid)));
        }
        Ok(())
    }

    pub fn apply_k1(&self, f: &Distribution) -> Result<Distribution> {
        apply_k1(&self.geom, f)
    }

    pub fn apply_k2(&self, f: &Distribution) -> Result<Distribution> {
        apply_k2(&self.geom, f)
    }

    /// `K f`, through the stored matrix when assembled.
    pub fn apply_k(&self, f: &Distribution) -> Result<Distribution> {
        self.check(f)?;
        match &self.k_matrix {
            Some(m) => Ok(Distribution { grid: f.grid, values: m.apply(&f.values) }),
            None => apply_k(&self.geom, f),
        }
    }

    /// `L f = ν f - K f`.
    pub fn apply_l(&self, f: &Distribution) -> Result<Distribution> {
        let k = self.apply_k(f)?;
        let values = f.values.iter().zip(&self.nu).zip(&k.values).map(|((x, n), kx)| n * x - kx).collect();
        Ok(Distribution { grid: f.grid, values })
    }

    pub fn apply_gamma(&self, f: &Distribution, g: &Distribution) -> Result<Distribution> {
        apply_gamma(&self.geom, f, g)
    }

    pub fn gamma_gain(&self, f: &Distribution, g: &Distribution) -> Result<Distribution> {
        gamma_gain(&self.geom, f, g)
    }

    pub fn gamma_loss(&self, f: &Distribution, g: &Distribution) -> Result<Distribution> {
        gamma_loss(&self.geom, f, g)
    }
}
