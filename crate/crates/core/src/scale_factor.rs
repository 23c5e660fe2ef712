//! Scale factor of the Newtonian expanding background.
//!
//! The scale factor obeys `a'' = -(4π/3) a^-2` with `a(0) = 1`. The energy
//! `E_a = a'^2 / 2 - (4π/3) / a` is conserved; `E_a = 0` is the critical
//! (parabolic) universe with closed form `a(t) = (sqrt(6π) t + 1)^(2/3)`.
//! Collisions are diluted by `a_γ(t) = a(t)^(-3-γ)`, whose running integral is
//! carried as a third state of the integrator.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::decay::{classify_regime, RegimeTag};
use crate::error::{Error, Result};

pub const GRAVITY: f64 = 4.0 * PI / 3.0;

/// Smallest initial expansion rate with `E_a >= 0`, i.e. `(8π/3)^(1/2)`.
pub fn critical_expansion_rate() -> f64 {
    (8.0 * PI / 3.0).sqrt()
}

/// Initial expansion rate giving energy `e_a` with `a(0) = 1`.
pub fn expansion_rate_for_energy(e_a: f64) -> Result<f64> {
    if !(e_a >= 0.0) || !e_a.is_finite() {
        return Err(Error::invalid(format!(
            "E_a = {e_a} must be finite and >= 0 (collapsing universes are not supported)"
        )));
    }
    Ok((2.0 * e_a + 2.0 * GRAVITY).sqrt())
}

/// Closed-form scale factor of the `E_a = 0` universe.
pub fn critical_scale_factor(t: f64) -> f64 {
    ((6.0 * PI).sqrt() * t + 1.0).powf(2.0 / 3.0)
}

/// Closed form of `∫_0^t a_γ(s) ds` for the `E_a = 0` universe.
pub fn critical_a_gamma_integral(gamma: f64, t: f64) -> f64 {
    let c = (6.0 * PI).sqrt();
    let q = 2.0 * (3.0 + gamma) / 3.0;
    let x = c * t + 1.0;
    if (q - 1.0).abs() < 1e-14 {
        x.ln() / c
    } else {
        (x.powf(1.0 - q) - 1.0) / ((1.0 - q) * c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactorState {
    pub t: f64,
    pub a: f64,
    pub adot: f64,
}

impl ScaleFactorState {
    pub fn energy(&self) -> f64 {
        energy_invariant(self)
    }
}

/// `E_a = a'^2 / 2 - (4π/3) / a`.
pub fn energy_invariant(state: &ScaleFactorState) -> f64 {
    0.5 * state.adot * state.adot - GRAVITY / state.a
}

#[derive(Debug, Clone)]
pub struct ScaleFactorTrajectory {
    gamma: f64,
    dt: f64,
    samples: Vec<ScaleFactorState>,
    a_gamma_integral: Vec<f64>,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > -3.0 && gamma < 0.0) {
        return Err(Error::invalid(format!(
            "gamma = {gamma} outside the soft-potential range (-3, 0)"
        )));
    }
    Ok(())
}

/// Integrates the scale factor with classical RK4 on a uniform grid.
///
/// The state is `(a, a', ∫a_γ)`; the integral component makes each step a
/// Simpson rule for `a_γ` on the RK stages.
pub fn solve_scale_factor(
    adot0: f64,
    gamma: f64,
    t_end: f64,
    dt: f64,
) -> Result<ScaleFactorTrajectory> {
    check_gamma(gamma)?;
    let crit = critical_expansion_rate();
    if !adot0.is_finite() || adot0 < crit * (1.0 - 1e-14) {
        return Err(Error::invalid(format!(
            "initial expansion rate {adot0} is below the critical value {crit}: \
             E_a < 0 describes a recollapsing universe"
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("dt = {dt} must be positive")));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!("t_end = {t_end} must be positive")));
    }

    let steps = (t_end / dt).ceil() as usize;
    let h = t_end / steps as f64;
    let p = -3.0 - gamma;
    let rhs = |y: [f64; 3]| -> [f64; 3] { [y[1], -GRAVITY / (y[0] * y[0]), y[0].powf(p)] };

    let mut samples = Vec::with_capacity(steps + 1);
    let mut integral = Vec::with_capacity(steps + 1);
    let mut y = [1.0, adot0, 0.0];
    samples.push(ScaleFactorState { t: 0.0, a: 1.0, adot: adot0 });
    integral.push(0.0);
    for i in 0..steps {
        let k1 = rhs(y);
        let k2 = rhs(axpy(y, 0.5 * h, k1));
        let k3 = rhs(axpy(y, 0.5 * h, k2));
        let k4 = rhs(axpy(y, h, k3));
        for j in 0..3 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !(y[0] > 0.0) || !y[0].is_finite() {
            return Err(Error::NumericalAbort {
                t: (i + 1) as f64 * h,
                reason: "scale factor left (0, ∞)".into(),
            });
        }
        samples.push(ScaleFactorState { t: (i + 1) as f64 * h, a: y[0], adot: y[1] });
        integral.push(y[2]);
    }
    Ok(ScaleFactorTrajectory { gamma, dt: h, samples, a_gamma_integral: integral })
}

fn axpy(y: [f64; 3], s: f64, k: [f64; 3]) -> [f64; 3] {
    [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]]
}

impl ScaleFactorTrajectory {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().map(|s| s.t).unwrap_or(0.0)
    }

    pub fn samples(&self) -> &[ScaleFactorState] {
        &self.samples
    }

    pub fn a_gamma_integral_samples(&self) -> &[f64] {
        &self.a_gamma_integral
    }

    /// Energy at `t = 0`.
    pub fn energy(&self) -> f64 {
        energy_invariant(&self.samples[0])
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy();
        self.samples
            .iter()
            .map(|s| (energy_invariant(s) - e0).abs())
            .fold(0.0, f64::max)
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let t_end = self.t_end();
        if !(t >= 0.0 && t <= t_end * (1.0 + 1e-12)) {
            return Err(Error::TimeOutOfRange { t, t_end });
        }
        let n = self.samples.len() - 1;
        let i = ((t / self.dt).floor() as usize).min(n.saturating_sub(1));
        let s = ((t - self.samples[i].t) / self.dt).clamp(0.0, 1.0);
        Ok((i, s))
    }

    /// State at `t` by cubic Hermite interpolation of the stored `(a, a')`.
    pub fn state_at(&self, t: f64) -> Result<ScaleFactorState> {
        let (i, s) = self.locate(t)?;
        let (l, r) = (&self.samples[i], &self.samples[i + 1]);
        let h = self.dt;
        let (ddl, ddr) = (-GRAVITY / (l.a * l.a), -GRAVITY / (r.a * r.a));
        let a = hermite(l.a, r.a, l.adot, r.adot, h, s);
        let adot = hermite(l.adot, r.adot, ddl, ddr, h, s);
        Ok(ScaleFactorState { t, a, adot })
    }

    pub fn a_at(&self, t: f64) -> Result<f64> {
        Ok(self.state_at(t)?.a)
    }

    /// `a_γ(t) = a(t)^(-3-γ)`.
    pub fn a_gamma(&self, t: f64) -> Result<f64> {
        Ok(self.a_at(t)?.powf(-3.0 - self.gamma))
    }

    /// `∫_0^t a_γ(s) ds`, Hermite-interpolated with the known derivative `a_γ`.
    pub fn a_gamma_integral(&self, t: f64) -> Result<f64> {
        let (i, s) = self.locate(t)?;
        let p = -3.0 - self.gamma;
        let (l, r) = (&self.samples[i], &self.samples[i + 1]);
        Ok(hermite(
            self.a_gamma_integral[i],
            self.a_gamma_integral[i + 1],
            l.a.powf(p),
            r.a.powf(p),
            self.dt,
            s,
        ))
    }

    /// Writes `t,a,adot,a_gamma,a_gamma_integral` rows, keeping every `stride`-th sample.
    pub fn write_csv<W: Write>(&self, mut out: W, stride: usize) -> Result<()> {
        writeln!(out, "t,a,adot,a_gamma,a_gamma_integral")?;
        let p = -3.0 - self.gamma;
        let stride = stride.max(1);
        let last = self.samples.len() - 1;
        for (i, (s, int)) in self.samples.iter().zip(&self.a_gamma_integral).enumerate() {
            if i % stride != 0 && i != last {
                continue;
            }
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                s.t,
                s.a,
                s.adot,
                s.a.powf(p),
                int
            )?;
        }
        Ok(())
    }
}

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Closed-form lower-bound shape for `∫_0^t a_γ` in each covered regime:
/// `ln(1+t)` for I and III, `(1+t)^(-1-2γ/3) - 1` for II, `(1+t)^(-2-γ) - 1` for IV.
pub fn a_gamma_integral_bound(regime: RegimeTag, t: f64, e_a: f64, gamma: f64) -> Result<f64> {
    let actual = classify_regime(e_a, gamma)?;
    if actual != regime {
        return Err(Error::RegimeMismatch(format!(
            "(E_a = {e_a}, gamma = {gamma}) is regime {actual:?}, not {regime:?}"
        )));
    }
    if t < 0.0 {
        return Err(Error::invalid(format!("t = {t} must be >= 0")));
    }
    Ok(bound_shape(regime, gamma, t))
}

pub(crate) fn bound_shape(regime: RegimeTag, gamma: f64, t: f64) -> f64 {
    match regime {
        RegimeTag::I | RegimeTag::III => (1.0 + t).ln(),
        RegimeTag::II => (1.0 + t).powf(-1.0 - 2.0 * gamma / 3.0) - 1.0,
        RegimeTag::IV => (1.0 + t).powf(-2.0 - gamma) - 1.0,
        RegimeTag::Uncovered => f64::NAN,
    }
}

/// Constant `C` with `∫_0^t a_γ >= C · shape(t)`.
///
/// Uses `a(t) <= A (1+t)^p`: for `E_a = 0`, `A = (6π)^(1/3)` and `p = 2/3`;
/// for `E_a > 0`, `a' <= a'(0)` gives `A = max(1, a'(0))` and `p = 1`.
/// Then `a_γ >= A^(-3-γ) (1+t)^(-q)` with `q = p (3+γ)`, and the integral of
/// `(1+s)^(-q)` is `shape / (1-q)` (or the logarithm when `q = 1`).
pub fn a_gamma_integral_bound_constant(regime: RegimeTag, adot0: f64, gamma: f64) -> Result<f64> {
    let e_a = 0.5 * adot0 * adot0 - GRAVITY;
    let actual = classify_regime(e_a, gamma)?;
    if actual != regime {
        return Err(Error::RegimeMismatch(format!(
            "(E_a = {e_a}, gamma = {gamma}) is regime {actual:?}, not {regime:?}"
        )));
    }
    let (amp, p) = match regime {
        RegimeTag::I | RegimeTag::II => ((6.0 * PI).powf(1.0 / 3.0), 2.0 / 3.0),
        RegimeTag::III | RegimeTag::IV => (adot0.max(1.0), 1.0),
        RegimeTag::Uncovered => unreachable!(),
    };
    let q = p * (3.0 + gamma);
    let lead = amp.powf(-3.0 - gamma);
    Ok(match regime {
        RegimeTag::I | RegimeTag::III => lead,
        _ => lead / (1.0 - q),
    })
}
