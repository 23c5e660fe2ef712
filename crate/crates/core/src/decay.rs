//! Regime classification, predicted decay envelopes, rate fitting and verdicts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when testing `E_a = 0` and the boundary values of `γ`.
pub const REGIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    /// `E_a = 0`, `γ = -3/2`
    I,
    /// `E_a = 0`, `-3 < γ < -3/2`
    II,
    /// `E_a > 0`, `γ = -2`
    III,
    /// `E_a > 0`, `-3 < γ < -2`
    IV,
    Uncovered,
}

impl RegimeTag {
    pub fn is_logarithmic(self) -> bool {
        matches!(self, RegimeTag::I | RegimeTag::III)
    }

    pub fn name(self) -> &'static str {
        match self {
            RegimeTag::I => "I",
            RegimeTag::II => "II",
            RegimeTag::III => "III",
            RegimeTag::IV => "IV",
            RegimeTag::Uncovered => "UNCOVERED",
        }
    }
}

/// Assigns `(E_a, γ)` to one of the four covered regimes or `Uncovered`.
///
/// `|E_a| <= REGIME_TOL` counts as the critical universe and `γ` within
/// `REGIME_TOL` of `-3/2` or `-2` counts as equal, so values produced by
/// round-off (e.g. `E_a` of the critical expansion rate) classify stably.
pub fn classify_regime(e_a: f64, gamma: f64) -> Result<RegimeTag> {
    if !(e_a >= -REGIME_TOL) || !e_a.is_finite() {
        return Err(Error::invalid(format!("E_a = {e_a} must be >= 0")));
    }
    if !(gamma > -3.0 && gamma < 0.0) {
        return Err(Error::invalid(format!("gamma = {gamma} outside (-3, 0)")));
    }
    let critical = e_a.abs() <= REGIME_TOL;
    let near = |x: f64| (gamma - x).abs() <= REGIME_TOL;
    Ok(if critical {
        if near(-1.5) {
            RegimeTag::I
        } else if gamma < -1.5 {
            RegimeTag::II
        } else {
            RegimeTag::Uncovered
        }
    } else if near(-2.0) {
        RegimeTag::III
    } else if gamma < -2.0 {
        RegimeTag::IV
    } else {
        RegimeTag::Uncovered
    })
}

/// Exponent of the power-law envelope (regimes II and IV) or the
/// logarithmic order `-k` (regimes I and III).
pub fn predicted_exponent(regime: RegimeTag, k: u32, gamma: f64) -> Result<f64> {
    let k = k as f64;
    match regime {
        RegimeTag::I | RegimeTag::III => Ok(-k),
        RegimeTag::II => Ok(k + 2.0 * gamma * k / 3.0),
        RegimeTag::IV => Ok(2.0 * k + gamma * k),
        RegimeTag::Uncovered => Err(Error::RegimeMismatch("no envelope for UNCOVERED parameters".into())),
    }
}

/// Envelope shape without its constant.
pub fn predicted_envelope(regime: RegimeTag, k: u32, gamma: f64, t: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("envelope order k must be >= 1"));
    }
    let p = predicted_exponent(regime, k, gamma)?;
    Ok(if regime.is_logarithmic() {
        (1.0 + (1.0 + t).ln()).powf(p)
    } else {
        (1.0 + t).powf(p)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `ln y` against `ln(1+t)`.
    pub power_slope: f64,
    pub power_residual: f64,
    /// Slope of `ln y` against `ln(1 + ln(1+t))`.
    pub log_order: f64,
    pub log_residual: f64,
    pub samples: usize,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - my - slope * (a - mx);
            e * e
        })
        .sum();
    (slope, (rss / n).sqrt())
}

/// Index of the first sample in the tail window: the last `window` fraction
/// of samples, further restricted to `t >= t_min`.
pub fn tail_start(times: &[f64], window: f64, t_min: f64) -> usize {
    let n = times.len();
    let by_fraction = n - ((window.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    let by_time = times.iter().position(|&t| t >= t_min).unwrap_or(n);
    by_fraction.max(by_time)
}

/// Least-squares decay fits on the last `window` fraction of `(t, y)` samples.
pub fn fit_decay(times: &[f64], values: &[f64], window: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::InsufficientData("times and values differ in length".into()));
    }
    let start = tail_start(times, window, f64::NEG_INFINITY);
    fit_range(&times[start..], &values[start..])
}

fn fit_range(times: &[f64], values: &[f64]) -> Result<DecayFit> {
    if times.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} samples in the tail window, need at least 10",
            times.len()
        )));
    }
    if let Some(bad) = values.iter().find(|&&y| !(y > f64::MIN_POSITIVE) || !y.is_finite()) {
        return Err(Error::Degenerate(format!("series value {bad:e} is not positive and normal")));
    }
    let ly: Vec<f64> = values.iter().map(|y| y.ln()).collect();
    let xp: Vec<f64> = times.iter().map(|t| t.ln_1p()).collect();
    let xl: Vec<f64> = times.iter().map(|t| t.ln_1p().ln_1p()).collect();
    let (power_slope, power_residual) = least_squares(&xp, &ly);
    let (log_order, log_residual) = least_squares(&xl, &ly);
    Ok(DecayFit { power_slope, power_residual, log_order, log_residual, samples: times.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub regime: RegimeTag,
    pub r: u32,
    pub k: u32,
    pub exponent_predicted: f64,
    pub exponent_fitted: Option<f64>,
    pub envelope_ratio_max: f64,
    /// Largest relative rise of `y_r / envelope` between consecutive samples
    /// in the final half of the tail window (0 when nonincreasing).
    pub tail_ratio_rise: f64,
    pub pass: bool,
}

/// Relative slack tolerated when testing that the envelope ratio is nonincreasing.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Verdict on a `(t, y_r)` series against the regime's envelope.
///
/// Passes when `y_r / envelope` is finite over the tail window and
/// nonincreasing over the final half of that window.
pub fn verdict_from_series(
    times: &[f64],
    y_r: &[f64],
    regime: RegimeTag,
    gamma: f64,
    r: u32,
    k: u32,
    m: u32,
    window: f64,
    t_min: f64,
) -> Result<DecayVerdict> {
    if !(r > 0 && r + k <= m && k >= 1) {
        return Err(Error::invalid(format!("need 0 < r < r + k <= m, got r={r}, k={k}, m={m}")));
    }
    if times.len() != y_r.len() {
        return Err(Error::InsufficientData("times and values differ in length".into()));
    }
    let exponent_predicted = predicted_exponent(regime, k, gamma)?;
    let start = tail_start(times, window, t_min);
    let (tt, ty) = (&times[start..], &y_r[start..]);
    if tt.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} samples in the tail window, need at least 10",
            tt.len()
        )));
    }
    if ty.iter().all(|&y| y == 0.0) {
        return Ok(DecayVerdict {
            regime,
            r,
            k,
            exponent_predicted,
            exponent_fitted: None,
            envelope_ratio_max: 0.0,
            tail_ratio_rise: 0.0,
            pass: true,
        });
    }
    let ratios: Vec<f64> = tt
        .iter()
        .zip(ty)
        .map(|(&t, &y)| predicted_envelope(regime, k, gamma, t).map(|e| y / e))
        .collect::<Result<_>>()?;
    let envelope_ratio_max = ratios.iter().copied().fold(0.0, f64::max);
    let half = ratios.len() / 2;
    let tail_ratio_rise = ratios[half..]
        .windows(2)
        .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else { 0.0 })
        .fold(0.0, f64::max);
    let exponent_fitted = fit_range(tt, ty)
        .ok()
        .map(|f| if regime.is_logarithmic() { f.log_order } else { f.power_slope });
    let finite = ratios.iter().all(|r| r.is_finite());
    Ok(DecayVerdict {
        regime,
        r,
        k,
        exponent_predicted,
        exponent_fitted,
        envelope_ratio_max,
        tail_ratio_rise,
        pass: finite && tail_ratio_rise <= MONOTONE_SLACK,
    })
}

/// Verdict on a trajectory record, using `y_r` rebuilt from its norm samples.
pub fn verdict(
    record: &crate::evolution::TrajectoryRecord,
    regime: RegimeTag,
    r: u32,
    k: u32,
    window: f64,
    t_min: f64,
) -> Result<DecayVerdict> {
    if let Some(abort) = &record.abort {
        return Err(Error::NumericalAbort { t: abort.t, reason: abort.reason.clone() });
    }
    let cfg = record.norm_config;
    verdict_from_series(&record.times, &record.y_series(r), regime, cfg.gamma, r, k, cfg.m, window, t_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_regime(0.0, -1.5).unwrap(), RegimeTag::I);
        assert_eq!(classify_regime(0.5, -2.0).unwrap(), RegimeTag::III);
        assert_eq!(classify_regime(0.0, -1.0).unwrap(), RegimeTag::Uncovered);
        assert_eq!(classify_regime(0.0, -2.25).unwrap(), RegimeTag::II);
        assert_eq!(classify_regime(1.0, -2.5).unwrap(), RegimeTag::IV);
        assert_eq!(classify_regime(1.0, -1.75).unwrap(), RegimeTag::Uncovered);
        assert!(classify_regime(-1.0, -2.0).is_err());
        assert!(classify_regime(0.0, 0.5).is_err());
    }

    #[test]
    fn envelope_examples() {
        let e = std::f64::consts::E;
        assert_relative_eq!(predicted_envelope(RegimeTag::I, 1, -1.5, e - 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(predicted_envelope(RegimeTag::II, 2, -2.25, 1.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(predicted_envelope(RegimeTag::IV, 1, -2.5, 3.0).unwrap(), 0.5, max_relative = 1e-15);
        assert!(predicted_envelope(RegimeTag::Uncovered, 1, -1.0, 1.0).is_err());
        assert!(predicted_envelope(RegimeTag::I, 0, -1.5, 1.0).is_err());
    }

    fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn fit_synthetic_power_law() {
        let t = log_grid(1.0, 1e3, 60);
        let y: Vec<f64> = t.iter().map(|t| (1.0 + t).powi(-1)).collect();
        let fit = fit_decay(&t, &y, 1.0).unwrap();
        assert!((fit.power_slope + 1.0).abs() < 1e-6);
        assert!(fit.power_residual < 1e-12);
    }

    #[test]
    fn fit_synthetic_log_law() {
        let t = log_grid(10.0, 1e4, 80);
        let y: Vec<f64> = t.iter().map(|t| (1.0 + t.ln_1p()).powi(-2)).collect();
        let fit = fit_decay(&t, &y, 1.0).unwrap();
        assert!((fit.log_order + 2.0).abs() < 1e-3);
    }

    #[test]
    fn fit_constant_and_degenerate() {
        let t = log_grid(1.0, 100.0, 20);
        let fit = fit_decay(&t, &vec![3.0; 20], 1.0).unwrap();
        assert_eq!(fit.power_slope, 0.0);
        let mut y = vec![1.0; 20];
        y[15] = 0.0;
        assert!(matches!(fit_decay(&t, &y, 1.0), Err(Error::Degenerate(_))));
        assert!(matches!(fit_decay(&t[..5], &y[..5], 1.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn verdict_on_zero_and_synthetic() {
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let v = verdict_from_series(&t, &vec![0.0; 100], RegimeTag::IV, -2.5, 1, 1, 3, 0.5, 10.0).unwrap();
        assert!(v.pass);
        let y: Vec<f64> = t.iter().map(|t| (1.0 + t).powf(-0.8)).collect();
        let v = verdict_from_series(&t, &y, RegimeTag::IV, -2.5, 1, 1, 3, 0.5, 10.0).unwrap();
        assert!(v.pass);
        assert!((v.exponent_fitted.unwrap() + 0.8).abs() < 1e-9);
        let y: Vec<f64> = t.iter().map(|t| (1.0 + t).powf(-0.2)).collect();
        let v = verdict_from_series(&t, &y, RegimeTag::IV, -2.5, 1, 1, 3, 0.5, 10.0).unwrap();
        assert!(!v.pass);
        assert!(verdict_from_series(&t, &y, RegimeTag::IV, -2.5, 2, 2, 3, 0.5, 10.0).is_err());
    }
}
