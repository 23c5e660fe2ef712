use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularKind {
    /// `B = C_B |cos θ|`
    AbsCos,
    /// `B = C_B`
    Constant,
}

/// Angular part `B(ω)` of the collision kernel, as a function of
/// `cos θ = (u - v)/|u - v| · ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularKernel {
    pub kind: AngularKind,
    pub c_b: f64,
}

impl Default for AngularKernel {
    fn default() -> Self {
        AngularKernel { kind: AngularKind::AbsCos, c_b: 1.0 }
    }
}

impl AngularKernel {
    pub fn new(kind: AngularKind, c_b: f64) -> Result<Self> {
        if !(c_b > 0.0) || !c_b.is_finite() {
            return Err(Error::invalid(format!("cutoff constant C_B = {c_b} must be positive")));
        }
        Ok(AngularKernel { kind, c_b })
    }

    pub fn eval(&self, cos_theta: f64) -> f64 {
        match self.kind {
            AngularKind::AbsCos => self.c_b * cos_theta.abs(),
            AngularKind::Constant => self.c_b,
        }
    }

    /// `b0 = ∫_{S^2} B dω`.
    pub fn b0(&self) -> f64 {
        match self.kind {
            AngularKind::AbsCos => 2.0 * PI * self.c_b,
            AngularKind::Constant => 4.0 * PI * self.c_b,
        }
    }
}

/// Treatment of the `|u - v|^γ` singularity in lattice sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SingularTreatment {
    /// Punctured lattice sum with zeta-function corrections at the origin
    /// and its six neighbours; the error is `O(h^(7+γ))` for smooth densities.
    Corrected,
    /// `(|u - v|^2 + ε^2)^(γ/2)` on every node pair.
    Softened { eps: f64 },
}

impl Default for SingularTreatment {
    fn default() -> Self {
        SingularTreatment::Corrected
    }
}
