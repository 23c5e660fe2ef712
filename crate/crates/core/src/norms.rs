//! Weighted Sobolev-type norms `|||f|||_k`, their `ν`-weighted versions,
//! the energies `E_k`, `𝓔_m` and the decay functional `y_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scale_factor::ScaleFactorTrajectory;
use crate::velocity::{norm3, partial_derivative, Distribution, MultiIndex, VelocityGrid};

/// Relative slack of the interpolation inequality test.
pub const INTERPOLATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConfig {
    /// Highest derivative order `N` in the norm sums.
    pub n_der: u32,
    /// Largest weight index.
    pub m: u32,
    /// Index of the decay functional `y_r`.
    pub r: u32,
    /// Weight exponent: `w = (1 + |v|)^γ`.
    pub gamma: f64,
}

impl NormConfig {
    pub fn new(n_der: u32, m: u32, r: u32, gamma: f64) -> Result<Self> {
        let cfg = NormConfig { n_der, m, r, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_der < 1 || self.n_der > 4 {
            return Err(Error::invalid(format!("derivative depth {} not in 1..=4", self.n_der)));
        }
        if !(self.r > 0 && self.r < self.m) {
            return Err(Error::invalid(format!("need 0 < r < m, got r = {}, m = {}", self.r, self.m)));
        }
        if !(self.gamma > -3.0 && self.gamma < 0.0) {
            return Err(Error::invalid(format!("gamma = {} outside (-3, 0)", self.gamma)));
        }
        Ok(())
    }
}

/// All partial derivatives `∂_β f` with `|β| <= N` of one field, reusable
/// across weight indices.
#[derive(Debug, Clone)]
pub struct DerivativeStack {
    grid: VelocityGrid,
    orders: Vec<u32>,
    fields: Vec<Vec<f64>>,
    /// `ln(1 + |v|)` per node.
    log_base: Vec<f64>,
}

impl DerivativeStack {
    pub fn new(f: &Distribution, n_der: u32) -> Result<Self> {
        let mut orders = Vec::new();
        let mut fields = Vec::new();
        for beta in MultiIndex::up_to(n_der) {
            orders.push(beta.order());
            fields.push(if beta.order() == 0 { f.values.clone() } else { partial_derivative(f, beta)?.values });
        }
        let log_base = (0..f.grid.len()).map(|i| norm3(f.grid.velocity(i)).ln_1p()).collect();
        Ok(DerivativeStack { grid: f.grid, orders, fields, log_base })
    }

    /// `Σ_β ‖w^(|β| - k) ∂_β f‖²`, optionally `ν`-weighted. `k` may be fractional.
    pub fn weighted_sum(&self, k: f64, gamma: f64, nu: Option<&[f64]>) -> f64 {
        let mut total = 0.0;
        for (order, d) in self.orders.iter().zip(&self.fields) {
            let expo = 2.0 * gamma * (*order as f64 - k);
            let mut acc = 0.0;
            for (i, x) in d.iter().enumerate() {
                let mut term = x * x * (expo * self.log_base[i]).exp();
                if let Some(nu) = nu {
                    term *= nu[i];
                }
                acc += term;
            }
            total += acc;
        }
        total * self.grid.cell_volume()
    }
}

fn check_nu(f: &Distribution, nu: &[f64]) -> Result<()> {
    if nu.len() != f.values.len() {
        return Err(Error::GridMismatch(format!("ν has {} entries, field has {}", nu.len(), f.values.len())));
    }
    Ok(())
}

/// `|||f|||²_k`.
pub fn triple_norm(f: &Distribution, k: u32, cfg: &NormConfig) -> Result<f64> {
    triple_norm_frac(f, k as f64, cfg)
}

/// `|||f|||²_k` for a real index `k`.
pub fn triple_norm_frac(f: &Distribution, k: f64, cfg: &NormConfig) -> Result<f64> {
    Ok(DerivativeStack::new(f, cfg.n_der)?.weighted_sum(k, cfg.gamma, None))
}

/// `|||f|||²_{ν,k}`.
pub fn triple_norm_nu(f: &Distribution, k: u32, cfg: &NormConfig, nu: &[f64]) -> Result<f64> {
    check_nu(f, nu)?;
    Ok(DerivativeStack::new(f, cfg.n_der)?.weighted_sum(k as f64, cfg.gamma, Some(nu)))
}

/// `|||f|||²_{ν,k} / |||f|||²_{(2k-1)/2}`, the diagnostic behind the
/// equivalence of the `ν`-norm with the half-shifted plain norm.
pub fn nu_equivalence_ratio(f: &Distribution, k: u32, cfg: &NormConfig, nu: &[f64]) -> Result<f64> {
    check_nu(f, nu)?;
    let stack = DerivativeStack::new(f, cfg.n_der)?;
    Ok(stack.weighted_sum(k as f64, cfg.gamma, Some(nu)) / stack.weighted_sum(k as f64 - 0.5, cfg.gamma, None))
}

/// `|||f|||²_k` and `|||f|||²_{ν,k}` for `k = 0..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSnapshot {
    pub triple_norm: Vec<f64>,
    pub triple_norm_nu: Vec<f64>,
}

pub fn norm_snapshot(f: &Distribution, cfg: &NormConfig, nu: &[f64]) -> Result<NormSnapshot> {
    check_nu(f, nu)?;
    let stack = DerivativeStack::new(f, cfg.n_der)?;
    let ks = 0..=cfg.m;
    Ok(NormSnapshot {
        triple_norm: ks.clone().map(|k| stack.weighted_sum(k as f64, cfg.gamma, None)).collect(),
        triple_norm_nu: ks.map(|k| stack.weighted_sum(k as f64, cfg.gamma, Some(nu))).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub triple_norm: Vec<f64>,
    pub triple_norm_nu: Vec<f64>,
    /// `E_k = ½|||f|||²_k + ∫ a_γ |||f|||²_{ν,k}`.
    pub e_k: Vec<f64>,
    /// `𝓔_m = Σ_k E_k`.
    pub script_e_m: f64,
    /// `y_r = Σ_{k<=r} |||f|||²_k`.
    pub y_r: f64,
}

impl EnergyReport {
    /// `y_s` for any `s <= m`.
    pub fn y(&self, s: u32) -> f64 {
        self.triple_norm.iter().take(s as usize + 1).sum()
    }
}

/// Builds energy reports sample by sample, integrating `a_γ |||f|||²_{ν,k}`
/// by the trapezoid rule over the stored samples.
#[derive(Debug, Clone)]
pub struct EnergyAccumulator {
    cfg: NormConfig,
    last: Option<(f64, Vec<f64>)>,
    integral: Vec<f64>,
}

impl EnergyAccumulator {
    pub fn new(cfg: NormConfig) -> Self {
        EnergyAccumulator { cfg, last: None, integral: vec![0.0; cfg.m as usize + 1] }
    }

    pub fn push(&mut self, t: f64, a_gamma: f64, snap: NormSnapshot) -> Result<EnergyReport> {
        let dissipation: Vec<f64> = snap.triple_norm_nu.iter().map(|x| a_gamma * x).collect();
        if let Some((t_prev, prev)) = &self.last {
            if !(t > *t_prev) {
                return Err(Error::invalid(format!("sample times not increasing: {t} after {t_prev}")));
            }
            let dt = t - t_prev;
            for ((acc, a), b) in self.integral.iter_mut().zip(prev).zip(&dissipation) {
                *acc += 0.5 * dt * (a + b);
            }
        }
        let e_k: Vec<f64> = snap.triple_norm.iter().zip(&self.integral).map(|(n, i)| 0.5 * n + i).collect();
        let report = EnergyReport {
            t,
            script_e_m: e_k.iter().sum(),
            y_r: snap.triple_norm.iter().take(self.cfg.r as usize + 1).sum(),
            e_k,
            triple_norm: snap.triple_norm,
            triple_norm_nu: snap.triple_norm_nu,
        };
        self.last = Some((t, dissipation));
        Ok(report)
    }
}

/// Energy reports for time-ordered samples `(t_i, f(t_i))`.
pub fn energy_series(
    samples: &[(f64, Distribution)],
    traj: &ScaleFactorTrajectory,
    cfg: &NormConfig,
    nu: &[f64],
) -> Result<Vec<EnergyReport>> {
    let mut acc = EnergyAccumulator::new(*cfg);
    samples
        .iter()
        .map(|(t, f)| {
            let a_gamma = traj.a_gamma(*t)?;
            acc.push(*t, a_gamma, norm_snapshot(f, cfg, nu)?)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|||f|||²_r <= (|||f|||²_{r-1})^(k/(k+1)) (|||f|||²_{r+k})^(1/(k+1))`.
pub fn interpolation_check(f: &Distribution, r: u32, k: u32, cfg: &NormConfig) -> Result<InterpolationCheck> {
    if r < 1 || k < 1 || r + k > cfg.m {
        return Err(Error::invalid(format!("need r >= 1, k >= 1, r + k <= m = {}, got r = {r}, k = {k}", cfg.m)));
    }
    let stack = DerivativeStack::new(f, cfg.n_der)?;
    let lhs = stack.weighted_sum(r as f64, cfg.gamma, None);
    let low = stack.weighted_sum(r as f64 - 1.0, cfg.gamma, None);
    let high = stack.weighted_sum((r + k) as f64, cfg.gamma, None);
    let kf = k as f64;
    let rhs = low.powf(kf / (kf + 1.0)) * high.powf(1.0 / (kf + 1.0));
    Ok(InterpolationCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + INTERPOLATION_SLACK) })
}

/// All `(r, k)` with `r >= 1`, `k >= 1`, `r + k <= m`.
pub fn admissible_pairs(m: u32) -> Vec<(u32, u32)> {
    (1..m).flat_map(|r| (1..=m - r).map(move |k| (r, k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::{inner_product, maxwellian};

    fn cfg() -> NormConfig {
        NormConfig::new(1, 3, 1, -2.0).unwrap()
    }

    #[test]
    fn zero_field_and_single_term() {
        let g = VelocityGrid::new(10, 5.0).unwrap();
        let z = Distribution::zeros(g);
        assert_eq!(triple_norm(&z, 2, &cfg()).unwrap(), 0.0);
        let f = Distribution::from_fn(g, |v| (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 3.0).exp());
        let plain = inner_product(&f, &f, 0.0, -2.0, None).unwrap();
        let c0 = NormConfig { n_der: 0, ..cfg() };
        assert!((triple_norm(&f, 0, &c0).unwrap() - plain).abs() <= 1e-14 * plain);
    }

    #[test]
    fn sqrt_mu_first_order_norm_by_nested_loops() {
        let g = VelocityGrid::new(12, 5.0).unwrap();
        let f = Distribution::from_fn(g, maxwellian::sqrt_mu);
        let got = triple_norm(&f, 0, &cfg()).unwrap();
        let mut want = 0.0;
        for i in 0..g.len() {
            let v = g.velocity(i);
            want += f.values[i] * f.values[i];
            for axis in 0..3 {
                let mut beta = [0u32; 3];
                beta[axis] = 1;
                let d = partial_derivative(&f, MultiIndex(beta)).unwrap().values[i];
                let w = (1.0 + norm3(v)).powf(-2.0);
                want += w * w * d * d;
            }
        }
        want *= g.cell_volume();
        assert!((got - want).abs() <= 1e-13 * want);
    }

    #[test]
    fn quadratic_scaling_and_monotonicity() {
        let g = VelocityGrid::new(10, 5.0).unwrap();
        let nu: Vec<f64> = (0..g.len()).map(|i| (1.0 + norm3(g.velocity(i))).powf(-2.0)).collect();
        let f = Distribution::from_fn(g, |v| (v[0] - 0.2).cos() * (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 2.0).exp());
        let c = cfg();
        let a = triple_norm_nu(&f, 1, &c, &nu).unwrap();
        let b = triple_norm_nu(&f.scaled(2.0), 1, &c, &nu).unwrap();
        assert!((b - 4.0 * a).abs() <= 1e-13 * b);
        let s = norm_snapshot(&f, &c, &nu).unwrap();
        assert!(s.triple_norm.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.triple_norm_nu.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn interpolation_on_sqrt_mu_and_index_errors() {
        let g = VelocityGrid::new(12, 6.0).unwrap();
        let f = Distribution::from_fn(g, maxwellian::sqrt_mu);
        assert!(interpolation_check(&f, 1, 1, &cfg()).unwrap().holds);
        let z = interpolation_check(&Distribution::zeros(g), 1, 2, &cfg()).unwrap();
        assert_eq!((z.lhs, z.rhs, z.holds), (0.0, 0.0, true));
        assert!(interpolation_check(&f, 0, 1, &cfg()).is_err());
        assert!(interpolation_check(&f, 2, 2, &cfg()).is_err());
        assert_eq!(admissible_pairs(3), vec![(1, 1), (1, 2), (2, 1)]);
    }

    #[test]
    fn config_contracts() {
        assert!(NormConfig::new(0, 3, 1, -2.0).is_err());
        assert!(NormConfig::new(2, 3, 3, -2.0).is_err());
        assert!(NormConfig::new(2, 3, 1, 0.5).is_err());
    }
}
