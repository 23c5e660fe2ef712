//! Run configuration: TOML with one section per subsystem, plus bundled presets.

use serde::{Deserialize, Serialize};

use crate::collision::{AngularKernel, AngularKind, SingularTreatment};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionConfig, Mode};
use crate::fields::InitialData;
use crate::norms::NormConfig;
use crate::scale_factor::{critical_expansion_rate, expansion_rate_for_energy, GRAVITY};
use crate::sphere::{SphereQuadrature, SUPPORTED_COUNTS};
use crate::velocity::VelocityGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub gamma: f64,
    /// Initial expansion rate; exactly one of `adot0` and `e_a` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adot0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_a: Option<f64>,
    #[serde(default = "default_kernel")]
    pub kernel: AngularKind,
    #[serde(default = "one")]
    pub c_b: f64,
    /// Softening length; when absent the corrected lattice rule is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_reg: Option<f64>,
}

fn default_kernel() -> AngularKind {
    AngularKind::AbsCos
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_per_axis: usize,
    pub v_max: f64,
    pub sphere_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormsSection {
    pub n_der: u32,
    pub m: u32,
    pub r: u32,
    /// Envelope order of the decay verdict.
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub sample_every: usize,
    #[serde(default = "yes")]
    pub conservative: bool,
    #[serde(default = "small_data")]
    pub small_data_threshold: f64,
    #[serde(default = "blowup")]
    pub blowup_factor: f64,
}

fn yes() -> bool {
    true
}
fn small_data() -> f64 {
    1e-2
}
fn blowup() -> f64 {
    1e6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Tail fraction of the samples used by the verdict.
    #[serde(default = "half")]
    pub window: f64,
    /// Earliest time admitted into the tail window.
    #[serde(default = "ten")]
    pub t_min: f64,
    /// Step of the scale-factor integration.
    #[serde(default = "sf_dt")]
    pub scale_factor_dt: f64,
    /// Judge the run against the regime's decay envelope.
    #[serde(default = "yes")]
    pub decay_verdict: bool,
    /// Fail the run when an invariant moment drifts by more than this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_moment_drift: Option<f64>,
    /// Fail the run when the dissipation residual, relative to the
    /// dissipation, exceeds this at any sample pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dissipation_residual: Option<f64>,
}

fn half() -> f64 {
    0.5
}
fn ten() -> f64 {
    10.0
}
fn sf_dt() -> f64 {
    1e-3
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            window: half(),
            t_min: ten(),
            scale_factor_dt: sf_dt(),
            decay_verdict: true,
            max_moment_drift: None,
            max_dissipation_residual: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub samples: usize,
    pub theta_list: Vec<f64>,
    pub k_list: Vec<u32>,
    #[serde(default = "one_u32")]
    pub n_der: u32,
}

fn one_u32() -> u32 {
    1
}

/// Parameter lists whose Cartesian product a sweep runs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub e_a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_per_axis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// Wall-clock budget the run is expected to meet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_s: Option<f64>,
    pub physics: PhysicsSection,
    pub grid: GridSection,
    pub norms: NormsSection,
    pub evolution: EvolutionSection,
    pub initial: InitialData,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Largest product size accepted by a sweep.
pub const MAX_SWEEP_RUNS: usize = 64;

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Initial expansion rate, from `adot0` or from `E_a`.
    pub fn adot0(&self) -> Result<f64> {
        match (self.physics.adot0, self.physics.e_a) {
            (Some(a), None) => Ok(a),
            (None, Some(e)) => expansion_rate_for_energy(e),
            _ => Err(Error::Config("give exactly one of physics.adot0 and physics.e_a".into())),
        }
    }

    /// `E_a = ȧ0²/2 - 4π/3`, with the critical rate mapped to exactly zero.
    pub fn e_a(&self) -> Result<f64> {
        if let Some(e) = self.physics.e_a {
            return Ok(e);
        }
        let a = self.adot0()?;
        let crit = critical_expansion_rate();
        Ok(if ((a - crit) / crit).abs() <= 1e-12 { 0.0 } else { 0.5 * a * a - GRAVITY })
    }

    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.grid.n_per_axis, self.grid.v_max)
    }

    pub fn sphere(&self) -> Result<SphereQuadrature> {
        SphereQuadrature::with_nodes(self.grid.sphere_nodes)
    }

    pub fn kernel(&self) -> Result<AngularKernel> {
        AngularKernel::new(self.physics.kernel, self.physics.c_b)
    }

    pub fn treatment(&self) -> SingularTreatment {
        match self.physics.eps_reg {
            Some(eps) => SingularTreatment::Softened { eps },
            None => SingularTreatment::Corrected,
        }
    }

    pub fn norm_config(&self) -> Result<NormConfig> {
        NormConfig::new(self.norms.n_der, self.norms.m, self.norms.r, self.physics.gamma)
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        let e = &self.evolution;
        EvolutionConfig {
            mode: e.mode,
            dt: e.dt,
            t_end: e.t_end,
            cfl_safety: e.cfl_safety,
            sample_every: e.sample_every,
            conservative: e.conservative,
            small_data_threshold: e.small_data_threshold,
            blowup_factor: e.blowup_factor,
            ..EvolutionConfig::default()
        }
    }

    /// Re-checks every range contract of the downstream modules.
    pub fn validate(&self) -> Result<()> {
        let g = self.physics.gamma;
        if !(g > -3.0 && g < 0.0) {
            return Err(Error::Config(format!(
                "gamma = {g} is outside the soft-potential range -3 < gamma < 0"
            )));
        }
        let e_a = self.e_a()?;
        if e_a < 0.0 {
            return Err(Error::Config(format!("E_a = {e_a} is negative; only expanding backgrounds are supported")));
        }
        self.adot0()?;
        let wrap = |e: Error| Error::Config(e.to_string());
        self.grid().map_err(wrap)?;
        if !SUPPORTED_COUNTS.contains(&self.grid.sphere_nodes) {
            return Err(Error::Config(format!(
                "sphere_nodes = {} not among {SUPPORTED_COUNTS:?}",
                self.grid.sphere_nodes
            )));
        }
        self.kernel().map_err(wrap)?;
        if let Some(eps) = self.physics.eps_reg {
            if !(eps > 0.0) {
                return Err(Error::Config(format!("eps_reg = {eps} must be positive")));
            }
        }
        self.norm_config().map_err(wrap)?;
        let n = &self.norms;
        if !(n.k >= 1 && n.r + n.k <= n.m) {
            return Err(Error::Config(format!("need k >= 1 and r + k <= m, got r = {}, k = {}, m = {}", n.r, n.k, n.m)));
        }
        self.evolution_config().validate().map_err(wrap)?;
        let a = &self.analysis;
        if !(a.window > 0.0 && a.window <= 1.0) {
            return Err(Error::Config(format!("analysis.window = {} not in (0, 1]", a.window)));
        }
        if let Some(d) = a.max_moment_drift {
            if !(d >= 0.0) {
                return Err(Error::Config(format!("analysis.max_moment_drift = {d} must be nonnegative")));
            }
        }
        if !(a.scale_factor_dt > 0.0) || a.scale_factor_dt > self.evolution.t_end {
            return Err(Error::Config("analysis.scale_factor_dt must be positive and below t_end".into()));
        }
        if let InitialData::InvariantFreeBump { width, .. } = self.initial {
            if !(width > 0.0) {
                return Err(Error::Config(format!("bump width {width} must be positive")));
            }
        }
        if let InitialData::MomentSeeded { which, .. } = self.initial {
            if which > 4 {
                return Err(Error::Config(format!("invariant index {which} not in 0..=4")));
            }
        }
        if let Some(p) = &self.probe {
            if p.samples < 1 {
                return Err(Error::Config("probe.samples must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Configurations of a sweep: the Cartesian product of the listed values,
    /// each unlisted parameter taken from this config.
    pub fn expand_sweep(&self) -> Result<Vec<RunConfig>> {
        let s = self.sweep.clone().unwrap_or_default();
        if s.gamma.is_empty() && s.e_a.is_empty() && s.k.is_empty() && s.n_per_axis.is_empty() {
            return Err(Error::Config("sweep section lists no parameter values".into()));
        }
        let or_self = |v: &[f64], x: f64| if v.is_empty() { vec![x] } else { v.to_vec() };
        let gammas = or_self(&s.gamma, self.physics.gamma);
        let e_as: Vec<Option<f64>> = if s.e_a.is_empty() { vec![None] } else { s.e_a.iter().map(|e| Some(*e)).collect() };
        let ks = if s.k.is_empty() { vec![self.norms.k] } else { s.k.clone() };
        let ns = if s.n_per_axis.is_empty() { vec![self.grid.n_per_axis] } else { s.n_per_axis.clone() };
        let total = gammas.len() * e_as.len() * ks.len() * ns.len();
        if total > MAX_SWEEP_RUNS {
            return Err(Error::Config(format!("sweep of {total} runs exceeds the limit of {MAX_SWEEP_RUNS}")));
        }
        let mut out = Vec::with_capacity(total);
        for &gamma in &gammas {
            for e_a in &e_as {
                for &k in &ks {
                    for &n in &ns {
                        let mut c = self.clone();
                        c.sweep = None;
                        c.physics.gamma = gamma;
                        if let Some(e) = e_a {
                            c.physics.e_a = Some(*e);
                            c.physics.adot0 = None;
                        }
                        c.norms.k = k;
                        c.norms.m = c.norms.m.max(c.norms.r + k);
                        c.grid.n_per_axis = n;
                        c.name = format!("{}_{}", self.name, out.len());
                        c.validate()?;
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Names of the bundled presets.
pub const PRESETS: [&str; 6] =
    ["zero_data", "regime_iv_linear", "regime_i_linear", "regime_iii_linear", "nonlinear_small_data", "moment_conservation"];

fn base(name: &str, gamma: f64, adot0: f64, t_end: f64) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        seed: 7,
        out_dir: None,
        time_budget_s: None,
        physics: PhysicsSection { gamma, adot0: Some(adot0), e_a: None, kernel: AngularKind::AbsCos, c_b: 1.0, eps_reg: None },
        grid: GridSection { n_per_axis: 12, v_max: 6.0, sphere_nodes: 50 },
        norms: NormsSection { n_der: 2, m: 3, r: 1, k: 1 },
        evolution: EvolutionSection {
            mode: Mode::Linear,
            dt: 1e-4,
            t_end,
            cfl_safety: 0.9,
            sample_every: 2,
            conservative: true,
            small_data_threshold: small_data(),
            blowup_factor: blowup(),
        },
        initial: InitialData::InvariantFreeBump { amplitude: 0.05, width: 1.0 },
        analysis: AnalysisSection::default(),
        probe: None,
        sweep: None,
    }
}

/// A bundled preset by name.
pub fn preset(name: &str) -> Result<RunConfig> {
    let crit = critical_expansion_rate();
    let cfg = match name {
        "zero_data" => {
            let mut c = base(name, -2.5, 3.0, 20.0);
            c.grid.n_per_axis = 8;
            c.initial = InitialData::Zero;
            c.time_budget_s = Some(30.0);
            c
        }
        "regime_iv_linear" => {
            let mut c = base(name, -2.5, 3.0, 100.0);
            c.evolution.sample_every = 20;
            c.time_budget_s = Some(600.0);
            c
        }
        "regime_i_linear" => {
            let mut c = base(name, -1.5, crit, 1000.0);
            c.analysis.scale_factor_dt = 5e-3;
            c.time_budget_s = Some(600.0);
            c
        }
        "regime_iii_linear" => {
            let mut c = base(name, -2.0, 3.0, 1000.0);
            c.analysis.scale_factor_dt = 5e-3;
            c.time_budget_s = Some(900.0);
            c
        }
        "nonlinear_small_data" => {
            let mut c = base(name, -2.5, 1000.0, 100.0);
            c.evolution.mode = Mode::Nonlinear;
            c.grid.sphere_nodes = 12;
            c.analysis.decay_verdict = false;
            c.analysis.max_dissipation_residual = Some(1e-2);
            c.evolution.sample_every = 5;
            c.initial = InitialData::InvariantFreeBump { amplitude: 1e-4, width: 1.0 };
            c.time_budget_s = Some(900.0);
            c
        }
        "moment_conservation" => {
            let mut c = base(name, -2.5, 3.0, 20.0);
            c.grid.n_per_axis = 10;
            c.initial = InitialData::MomentSeeded { amplitude: 0.01, which: 1 };
            c.analysis.decay_verdict = false;
            c.analysis.max_moment_drift = Some(1e-12);
            c.time_budget_s = Some(120.0);
            c
        }
        _ => return Err(Error::Config(format!("unknown preset {name:?}; available: {PRESETS:?}"))),
    };
    cfg.validate()?;
    Ok(cfg)
}
