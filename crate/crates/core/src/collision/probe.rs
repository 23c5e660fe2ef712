//! Empirical constants of the operator inequalities, estimated as the
//! largest left/right ratio over a set of smooth test fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{random_smooth_field, seeded_rng};
use crate::velocity::{inner_product, maxwellian, partial_derivative, weight_nodes, Distribution, MultiIndex};

use super::CollisionOperatorSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    /// Random fields in addition to `√μ`, which is always probed first.
    pub samples: usize,
    pub theta_list: Vec<f64>,
    pub k_list: Vec<u32>,
    /// Derivative depth of the `Γ` estimate.
    pub n_der: u32,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings { samples: 8, theta_list: vec![0.0, 0.5, 1.0], k_list: vec![1, 2], n_der: 1, seed: 2024 }
    }
}

/// `max |⟨w^(2θ) K g1, g2⟩| / (‖w^θ g1‖_ν ‖w^θ g2‖_ν)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KBoundProbe {
    pub theta: f64,
    pub max_ratio: f64,
    /// Ratio for `g1 = g2 = √μ`.
    pub sqrt_mu_ratio: f64,
}

/// `C_k = max (½‖w^-k g‖²_ν - ⟨w^(-2k) L g, g⟩) / ‖g‖²_ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedLowerBoundProbe {
    pub k: u32,
    pub c_k: f64,
    /// The bracket for `g = √μ` alone.
    pub sqrt_mu_value: f64,
}

/// `max |⟨w^(2θ) ∂_β Γ₋(g1, g2), ∂_β g3⟩| / (Σ‖w^θ ∂ g1‖_ν Σ‖w^θ ∂ g2‖_ν ‖w^θ ∂_β g3‖_ν)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBoundProbe {
    pub theta: f64,
    pub beta: [u32; 3],
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n_per_axis: usize,
    pub v_max: f64,
    pub gamma: f64,
    pub sphere_pairs: usize,
    pub settings: ProbeSettings,
    pub k_bound: Vec<KBoundProbe>,
    pub weighted_lower_bound: Vec<WeightedLowerBoundProbe>,
    pub loss_bound: Vec<LossBoundProbe>,
}

fn weighted(f: &Distribution, w: &[f64]) -> Distribution {
    Distribution { grid: f.grid, values: f.values.iter().zip(w).map(|(a, b)| a * b).collect() }
}

pub fn probe_operator_bounds(ops: &CollisionOperatorSet, settings: &ProbeSettings) -> Result<ProbeReport> {
    if settings.samples < 1 {
        return Err(Error::invalid("probe needs at least one random sample"));
    }
    let grid = *ops.grid();
    let gamma = ops.gamma();
    let nu = ops.nu.as_slice();
    let mut rng = seeded_rng(settings.seed);
    let mut fields = vec![Distribution::from_fn(grid, maxwellian::sqrt_mu)];
    fields.extend((0..settings.samples).map(|_| random_smooth_field(&grid, &mut rng)));
    let nu_norm = |f: &Distribution, theta: f64| inner_product(f, f, theta, gamma, Some(nu)).map(f64::sqrt);

    let kf: Vec<Distribution> = fields.iter().map(|f| ops.apply_k(f)).collect::<Result<_>>()?;
    let mut k_bound = Vec::new();
    for &theta in &settings.theta_list {
        let mut max_ratio: f64 = 0.0;
        let mut sqrt_mu_ratio = 0.0;
        for (i, g1) in fields.iter().enumerate() {
            let n1 = nu_norm(g1, theta)?;
            for (j, g2) in fields.iter().enumerate() {
                let lhs = inner_product(&kf[i], g2, theta, gamma, None)?.abs();
                let ratio = lhs / (n1 * nu_norm(g2, theta)?);
                if i == 0 && j == 0 {
                    sqrt_mu_ratio = ratio;
                }
                max_ratio = max_ratio.max(ratio);
            }
        }
        k_bound.push(KBoundProbe { theta, max_ratio, sqrt_mu_ratio });
    }

    let lf: Vec<Distribution> = fields.iter().map(|f| ops.apply_l(f)).collect::<Result<_>>()?;
    let mut weighted_lower_bound = Vec::new();
    for &k in &settings.k_list {
        let theta = -(k as f64);
        let mut c_k = f64::NEG_INFINITY;
        let mut sqrt_mu_value = 0.0;
        for (i, g) in fields.iter().enumerate() {
            let lhs = inner_product(&lf[i], g, theta, gamma, None)?;
            let value = (0.5 * nu_norm(g, theta)?.powi(2) - lhs) / nu_norm(g, 0.0)?.powi(2);
            if i == 0 {
                sqrt_mu_value = value;
            }
            c_k = c_k.max(value);
        }
        weighted_lower_bound.push(WeightedLowerBoundProbe { k, c_k, sqrt_mu_value });
    }

    // Γ₋ triples (g1, g2, g3) cycle through the field list.
    let betas: Vec<MultiIndex> = MultiIndex::up_to(1);
    let triples: Vec<(usize, usize, usize)> =
        (0..fields.len()).map(|i| (i, (i + 1) % fields.len(), (i + 2) % fields.len())).collect();
    let derivs: Vec<Vec<Distribution>> = fields
        .iter()
        .map(|f| MultiIndex::up_to(settings.n_der).into_iter().map(|b| partial_derivative(f, b)).collect())
        .collect::<Result<_>>()?;
    let losses: Vec<Distribution> =
        triples.iter().map(|&(a, b, _)| ops.gamma_loss(&fields[a], &fields[b])).collect::<Result<_>>()?;
    let mut loss_bound = Vec::new();
    for &theta in &settings.theta_list {
        let w2 = weight_nodes(&grid, 2.0 * theta, gamma);
        for beta in &betas {
            let mut max_ratio: f64 = 0.0;
            for (t, &(a, b, c)) in triples.iter().enumerate() {
                let dl = partial_derivative(&losses[t], *beta)?;
                let dg3 = partial_derivative(&fields[c], *beta)?;
                let lhs = inner_product(&weighted(&dl, &w2), &dg3, 0.0, gamma, None)?.abs();
                let s1: f64 = derivs[a].iter().map(|d| nu_norm(d, theta)).sum::<Result<f64>>()?;
                let s2: f64 = derivs[b].iter().map(|d| nu_norm(d, theta)).sum::<Result<f64>>()?;
                let rhs = s1 * s2 * nu_norm(&dg3, theta)?;
                if rhs > 0.0 {
                    max_ratio = max_ratio.max(lhs / rhs);
                }
            }
            loss_bound.push(LossBoundProbe { theta, beta: beta.0, max_ratio });
        }
    }

    Ok(ProbeReport {
        n_per_axis: grid.n_per_axis,
        v_max: grid.v_max,
        gamma,
        sphere_pairs: ops.geom.omega.len(),
        settings: settings.clone(),
        k_bound,
        weighted_lower_bound,
        loss_bound,
    })
}
