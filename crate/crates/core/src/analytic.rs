//! Closed-form photon numbers.
//!
//! Two families live here: the scattering result (stationary intracavity
//! number, outflux growing linearly in time) and the squeezing model with an
//! ad-hoc damping factor (exponential growth, or a peaked curve far below
//! threshold). The reconciliation between them is reported by
//! [`model_comparison`].

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `2ν₀/γ` for which the small-argument peak formula is accepted.
pub const PEAK_REGIME_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ScatteringStationary,
    SqueezingLossless,
    SqueezingDamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPrediction {
    pub n_intra: f64,
    /// Photons per second leaving the cavity.
    pub n_out_rate: f64,
    pub model: Model,
}

fn threshold(finesse: f64) -> f64 {
    PI / (2.0 * finesse)
}

fn check_below_threshold(beta: f64, finesse: f64) -> Result<()> {
    if !(beta >= 0.0) || !(finesse > 0.0) {
        return Err(Error::Domain(format!(
            "need beta >= 0 and F > 0, got beta={beta}, F={finesse}"
        )));
    }
    let thr = threshold(finesse);
    if beta >= thr {
        return Err(Error::Domain(format!(
            "beta={beta:e} is not below the oscillation threshold pi/(2F)={thr:e}"
        )));
    }
    Ok(())
}

/// Stationary intracavity number `(2m/3) β² (F/π)²`.
pub fn n_intra_scattering(beta: f64, finesse: f64, harmonic: u32) -> Result<f64> {
    check_below_threshold(beta, finesse)?;
    let f = finesse / PI;
    Ok(2.0 * harmonic as f64 / 3.0 * beta * beta * f * f)
}

/// Extracavity emission rate `(2/3) β² (F/π) (Ω/2π)`, photons/s.
pub fn n_out_rate_scattering(beta: f64, finesse: f64, omega: f64) -> Result<f64> {
    check_below_threshold(beta, finesse)?;
    Ok(2.0 / 3.0 * beta * beta * (finesse / PI) * (omega / (2.0 * PI)))
}

/// Lossless degenerate-mode number `sinh²(ν₀t)`.
pub fn n_squeezing_lossless(t: f64, nu0: f64) -> f64 {
    (nu0 * t).sinh().powi(2)
}

/// Intracavity number with the decay factor, `sinh²(ν₀t) e^{−γt}`.
pub fn n_damped(t: f64, nu0: f64, gamma: f64) -> f64 {
    n_squeezing_lossless(t, nu0) * (-gamma * t).exp()
}

/// Cumulative emitted number of the damped model, `sinh²(ν₀t)(1 − e^{−γt})`.
pub fn n_out_damped(t: f64, nu0: f64, gamma: f64) -> f64 {
    n_squeezing_lossless(t, nu0) * (-(-gamma * t).exp_m1())
}

/// Peak of `(ν₀t)² e^{−γt}`: returns `(2/γ, e^{−2}(2ν₀/γ)²)`.
///
/// Only meaningful far below threshold, taken here as `2ν₀/γ ≤ 0.1`.
pub fn stationary_peak(nu0: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0) || !(nu0 >= 0.0) {
        return Err(Error::Domain(format!(
            "need gamma > 0 and nu0 >= 0, got {gamma}, {nu0}"
        )));
    }
    let ratio = 2.0 * nu0 / gamma;
    if ratio > PEAK_REGIME_LIMIT {
        return Err(Error::Domain(format!(
            "2*nu0/gamma = {ratio:e} exceeds {PEAK_REGIME_LIMIT}; the short-time peak does not apply"
        )));
    }
    Ok((2.0 / gamma, ratio * ratio / (E * E)))
}

/// The peak level in its (β, F) form, `e^{−2} (βF/π)²`.
pub fn stationary_peak_from_beta(beta: f64, finesse: f64) -> Result<f64> {
    check_below_threshold(beta, finesse)?;
    let x = beta * finesse / PI;
    Ok(x * x / (E * E))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub beta: f64,
    pub finesse: f64,
    pub harmonic: u32,
    pub omega: f64,
    /// Stationary number of the scattering approach.
    pub n_scattering: f64,
    /// Peak number of the damped squeezing model.
    pub n_peak_damped: f64,
    /// `n_scattering / n_peak_damped`, or zero when both vanish.
    pub ratio: f64,
    /// `(2m/3) e²`, the ratio expected from the two closed forms.
    pub predicted_ratio: f64,
    pub n_out_rate_scattering: f64,
    /// γ implied by resonance, `Ω / (2mF)`.
    pub gamma: f64,
    /// Relative residual of `γ·n_scattering − n_out_rate_scattering`.
    pub flux_balance_residual: f64,
}

/// Side-by-side values of the stationary and damped-squeezing predictions.
pub fn model_comparison(
    beta: f64,
    finesse: f64,
    harmonic: u32,
    omega: f64,
) -> Result<ComparisonReport> {
    if harmonic < 1 {
        return Err(Error::Domain("harmonic must be >= 1".into()));
    }
    let n_scattering = n_intra_scattering(beta, finesse, harmonic)?;
    let n_peak = stationary_peak_from_beta(beta, finesse)?;
    let rate = n_out_rate_scattering(beta, finesse, omega)?;
    // Ω = 2mπc/L₀ and γ = πc/(F L₀) give γ = Ω/(2mF).
    let gamma = omega / (2.0 * harmonic as f64 * finesse);
    let balance = gamma * n_scattering;
    let residual = if rate == 0.0 {
        (balance - rate).abs()
    } else {
        ((balance - rate) / rate).abs()
    };
    Ok(ComparisonReport {
        beta,
        finesse,
        harmonic,
        omega,
        n_scattering,
        n_peak_damped: n_peak,
        ratio: if n_peak == 0.0 {
            0.0
        } else {
            n_scattering / n_peak
        },
        predicted_ratio: 2.0 * harmonic as f64 / 3.0 * E * E,
        n_out_rate_scattering: rate,
        gamma,
        flux_balance_residual: residual,
    })
}
