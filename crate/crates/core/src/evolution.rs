//! Time integration of `∂_t f = a_γ(t) (-L f + Γ(f, f))`.

use serde::{Deserialize, Serialize};

use crate::collision::CollisionOperatorSet;
use crate::error::{Error, Result};
use crate::fields::min_density;
use crate::invariants::InvariantProjector;
use crate::norms::{norm_snapshot, EnergyAccumulator, EnergyReport, NormConfig};
use crate::scale_factor::ScaleFactorTrajectory;
use crate::velocity::{dot, maxwellian, Distribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub mode: Mode,
    /// First step; later steps grow by at most 2x up to the stability bound.
    pub dt: f64,
    pub t_end: f64,
    /// Step bound `dt <= cfl_safety / (a_γ(t) max ν)`.
    pub cfl_safety: f64,
    /// Steps between diagnostic samples.
    pub sample_every: usize,
    /// Evolve with `(I - P) L (I - P)` and `(I - P) Γ`, which conserve the
    /// collision invariants exactly.
    pub conservative: bool,
    /// Upper bound on `𝓔_m(0)` for nonlinear runs.
    pub small_data_threshold: f64,
    /// Abort once `‖f‖` exceeds this multiple of `‖f(0)‖`.
    pub blowup_factor: f64,
    pub max_steps: usize,
    /// Keep every sampled distribution in the record.
    pub store_distributions: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            mode: Mode::Linear,
            dt: 1e-3,
            t_end: 10.0,
            cfl_safety: 0.5,
            sample_every: 10,
            conservative: true,
            small_data_threshold: 1e-2,
            blowup_factor: 1e6,
            max_steps: 10_000_000,
            store_distributions: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::invalid(format!("cfl_safety = {} not in (0, 1]", self.cfl_safety)));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every must be at least 1"));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::invalid("blowup_factor must exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub norm_config: NormConfig,
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    pub a_gamma: Vec<f64>,
    /// Sampled distributions (empty unless requested).
    #[serde(skip)]
    pub distributions: Vec<Distribution>,
    pub energy: Vec<EnergyReport>,
    /// `⟨f, √μ φ_i⟩` per sample.
    pub moments: Vec<[f64; 5]>,
    /// `min_v (μ + √μ f)` per sample.
    pub min_density: Vec<f64>,
    /// `‖f‖` per sample.
    pub l2_norm: Vec<f64>,
    pub steps: usize,
    pub halvings: usize,
    pub max_halvings_per_step: usize,
    pub abort: Option<AbortInfo>,
}

impl TrajectoryRecord {
    pub fn y_series(&self, r: u32) -> Vec<f64> {
        self.energy.iter().map(|e| e.y(r)).collect()
    }
}

/// Right-hand side of the evolution equation, driven by a set of operators.
pub struct Evolution<'a> {
    ops: &'a CollisionOperatorSet,
    traj: &'a ScaleFactorTrajectory,
    projector: InvariantProjector,
}

impl<'a> Evolution<'a> {
    pub fn new(ops: &'a CollisionOperatorSet, traj: &'a ScaleFactorTrajectory) -> Result<Self> {
        if (ops.gamma() - traj.gamma()).abs() > 0.0 {
            return Err(Error::invalid(format!(
                "operator gamma {} differs from trajectory gamma {}",
                ops.gamma(),
                traj.gamma()
            )));
        }
        Ok(Evolution { ops, traj, projector: InvariantProjector::new(ops.grid()), })
    }

    pub fn projector(&self) -> &InvariantProjector {
        &self.projector
    }

    /// `a_γ(t) (-L f + [nonlinear] Γ(f, f))`.
    pub fn rhs(&self, f: &Distribution, t: f64, mode: Mode) -> Result<Distribution> {
        let a_gamma = self.traj.a_gamma(t)?;
        let mut out = self.ops.apply_l(f)?.scaled(-1.0);
        if mode == Mode::Nonlinear {
            out = out.add_scaled(1.0, &self.ops.apply_gamma(f, f)?)?;
        }
        Ok(out.scaled(a_gamma))
    }

    /// Same as [`Evolution::rhs`] with the collision operators restricted
    /// to the complement of the invariants.
    pub fn rhs_conservative(&self, f: &Distribution, t: f64, mode: Mode) -> Result<Distribution> {
        let a_gamma = self.traj.a_gamma(t)?;
        let fc = self.projector.complement(f)?;
        let mut out = self.ops.apply_l(&fc)?.scaled(-1.0);
        if mode == Mode::Nonlinear {
            out = out.add_scaled(1.0, &self.ops.apply_gamma(f, f)?)?;
        }
        self.projector.complement_in_place(&mut out.values);
        Ok(out.scaled(a_gamma))
    }

    fn eval(&self, f: &Distribution, t: f64, cfg: &EvolutionConfig) -> Result<Distribution> {
        if cfg.conservative {
            self.rhs_conservative(f, t, cfg.mode)
        } else {
            self.rhs(f, t, cfg.mode)
        }
    }

    fn rk4_step(&self, f: &Distribution, t: f64, dt: f64, cfg: &EvolutionConfig) -> Result<Distribution> {
        let k1 = self.eval(f, t, cfg)?;
        let k2 = self.eval(&f.add_scaled(0.5 * dt, &k1)?, t + 0.5 * dt, cfg)?;
        let k3 = self.eval(&f.add_scaled(0.5 * dt, &k2)?, t + 0.5 * dt, cfg)?;
        let k4 = self.eval(&f.add_scaled(dt, &k3)?, t + dt, cfg)?;
        let values = (0..f.values.len())
            .map(|i| f.values[i] + dt / 6.0 * (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] + k4.values[i]))
            .collect();
        Distribution::from_values(f.grid, values)
    }

    /// Largest step allowed at time `t`.
    pub fn stable_step(&self, t: f64, cfg: &EvolutionConfig) -> Result<f64> {
        Ok(cfg.cfl_safety / (self.traj.a_gamma(t)? * self.ops.nu_max()))
    }

    /// Integrates from `f0` at `t = 0` to `cfg.t_end`, sampling diagnostics
    /// every `cfg.sample_every` steps and at the final time.
    pub fn evolve(&self, f0: &Distribution, cfg: &EvolutionConfig, norms: &NormConfig) -> Result<TrajectoryRecord> {
        cfg.validate()?;
        norms.validate()?;
        if cfg.t_end > self.traj.t_end() {
            return Err(Error::TimeOutOfRange { t: cfg.t_end, t_end: self.traj.t_end() });
        }
        if !f0.is_finite() {
            return Err(Error::invalid("initial data has non-finite values"));
        }
        let grid = *self.ops.grid();
        if !f0.grid.same_as(&grid) {
            return Err(Error::GridMismatch(format!("{:?} vs operator grid {:?}", f0.grid, grid)));
        }
        let mut record = TrajectoryRecord {
            norm_config: *norms,
            times: Vec::new(),
            a: Vec::new(),
            a_gamma: Vec::new(),
            distributions: Vec::new(),
            energy: Vec::new(),
            moments: Vec::new(),
            min_density: Vec::new(),
            l2_norm: Vec::new(),
            steps: 0,
            halvings: 0,
            max_halvings_per_step: 0,
            abort: None,
        };
        let mut energy = EnergyAccumulator::new(*norms);
        let dv = grid.cell_volume();
        let l2 = |f: &Distribution| dot(&f.values, &f.values, dv).sqrt();
        let mut sample = |record: &mut TrajectoryRecord, t: f64, f: &Distribution| -> Result<()> {
            let state = self.traj.state_at(t)?;
            let a_gamma = self.traj.a_gamma(t)?;
            let report = energy.push(t, a_gamma, norm_snapshot(f, norms, &self.ops.nu)?)?;
            record.times.push(t);
            record.a.push(state.a);
            record.a_gamma.push(a_gamma);
            record.energy.push(report);
            record.moments.push(self.projector.moments(f)?);
            record.min_density.push(min_density(f));
            record.l2_norm.push(l2(f));
            if cfg.store_distributions {
                record.distributions.push(f.clone());
            }
            Ok(())
        };

        sample(&mut record, 0.0, f0)?;
        if cfg.mode == Mode::Nonlinear {
            let e0 = record.energy[0].script_e_m;
            if e0 > cfg.small_data_threshold {
                return Err(Error::invalid(format!(
                    "initial energy {e0:e} exceeds the small-data threshold {:e} for nonlinear runs",
                    cfg.small_data_threshold
                )));
            }
        }
        let norm0 = record.l2_norm[0];
        let mut f = f0.clone();
        let mut t = 0.0;
        let mut dt = cfg.dt.min(self.stable_step(0.0, cfg)?);
        let mut since_sample = 0;
        while t < cfg.t_end {
            if record.steps >= cfg.max_steps {
                record.abort = Some(AbortInfo { t, reason: format!("step limit {} reached", cfg.max_steps) });
                break;
            }
            let remaining = cfg.t_end - t;
            let mut h = dt.min(self.stable_step(t, cfg)?);
            // avoid a sliver of a final step
            if h >= remaining || remaining - h < 1e-9 * cfg.t_end {
                h = remaining;
            }
            let norm = l2(&f);
            let mut halvings = 0;
            let next = loop {
                let candidate = self.rk4_step(&f, t, h, cfg)?;
                let ok = candidate.is_finite() && l2(&candidate) <= 2.0 * norm + f64::MIN_POSITIVE;
                if ok || halvings >= 40 {
                    break candidate;
                }
                h *= 0.5;
                halvings += 1;
            };
            record.halvings += halvings;
            record.max_halvings_per_step = record.max_halvings_per_step.max(halvings);
            let last = h == remaining;
            t = if last { cfg.t_end } else { t + h };
            f = next;
            record.steps += 1;
            since_sample += 1;
            dt = 2.0 * h;
            let current = l2(&f);
            if !f.is_finite() || (norm0 > 0.0 && current > cfg.blowup_factor * norm0) {
                sample(&mut record, t, &f).ok();
                record.abort = Some(AbortInfo {
                    t,
                    reason: format!("norm {current:e} exceeds {:e} times the initial norm {norm0:e}", cfg.blowup_factor),
                });
                break;
            }
            if since_sample == cfg.sample_every || last {
                sample(&mut record, t, &f)?;
                since_sample = 0;
            }
        }
        Ok(record)
    }
}

/// Run diagnostics over a trajectory record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    /// `max_t |⟨f(t) - f(0), √μ φ_i⟩|` per invariant.
    pub moment_drift: [f64; 5],
    pub max_moment_drift: f64,
    pub min_density: f64,
    /// `min_density >= -1e-8 · max μ`.
    pub positivity_ok: bool,
    pub halvings: usize,
    pub max_halvings_per_step: usize,
    /// `max(0, Δy_r/Δt + ⟨a_γ |||f|||²_{ν,r}⟩)` per sample pair, with the
    /// dissipation averaged by the trapezoid rule.
    pub dissipation_residual: Vec<f64>,
    /// Largest residual relative to the averaged dissipation.
    pub max_relative_dissipation_residual: f64,
    pub y_r_nonincreasing: bool,
    pub aborted: bool,
}

/// Tolerance on `min (μ + √μ f)` relative to `max μ`.
pub const POSITIVITY_TOL: f64 = 1e-8;

pub fn monitor(record: &TrajectoryRecord) -> Result<MonitorSummary> {
    if record.times.is_empty() {
        return Err(Error::InsufficientData("empty trajectory record".into()));
    }
    let r = record.norm_config.r as usize;
    let m0 = record.moments[0];
    let mut moment_drift = [0.0; 5];
    for m in &record.moments {
        for i in 0..5 {
            moment_drift[i] = f64::max(moment_drift[i], (m[i] - m0[i]).abs());
        }
    }
    let min_density = record.min_density.iter().copied().fold(f64::INFINITY, f64::min);
    let max_mu = maxwellian::mu([0.0; 3]);
    let mut dissipation_residual = Vec::with_capacity(record.times.len().saturating_sub(1));
    let mut max_rel: f64 = 0.0;
    let mut nonincreasing = true;
    for i in 1..record.times.len() {
        let (e0, e1) = (&record.energy[i - 1], &record.energy[i]);
        let dt = record.times[i] - record.times[i - 1];
        let d0 = record.a_gamma[i - 1] * e0.triple_norm_nu[r];
        let d1 = record.a_gamma[i] * e1.triple_norm_nu[r];
        let avg = 0.5 * (d0 + d1);
        let res = ((e1.y_r - e0.y_r) / dt + avg).max(0.0);
        dissipation_residual.push(res);
        if res > 0.0 {
            max_rel = max_rel.max(if avg > 0.0 { res / avg } else { f64::INFINITY });
        }
        if e1.y_r > e0.y_r {
            nonincreasing = false;
        }
    }
    Ok(MonitorSummary {
        moment_drift,
        max_moment_drift: moment_drift.iter().copied().fold(0.0, f64::max),
        min_density,
        positivity_ok: min_density >= -POSITIVITY_TOL * max_mu,
        halvings: record.halvings,
        max_halvings_per_step: record.max_halvings_per_step,
        dissipation_residual,
        max_relative_dissipation_residual: max_rel,
        y_r_nonincreasing: nonincreasing,
        aborted: record.abort.is_some(),
    })
}
