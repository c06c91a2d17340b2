//! Physical experiment descriptions and the dimensionless parameters derived
//! from them.
//!
//! Everything at this boundary is SI (angular frequencies in rad/s). The
//! pumped crystal is reduced to an apparent modulation of the cavity length,
//! `L(t) = L₀ + ε sin(Ωt − θ)`, and both the optical and the mechanical drive
//! end up as a single coupling `β = εΩ/c`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_813e-12;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Largest crystal length, as a fraction of the pump wavelength, for which
/// the spatially averaged index is accepted.
pub const THIN_CRYSTAL_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    /// Pump power `ħΩΦ`, W.
    pub power: f64,
    /// Angular frequency Ω, rad/s.
    pub frequency: f64,
    /// Phase θ_p at x = 0, rad.
    pub phase: f64,
    /// Transverse beam area, m².
    pub area: f64,
}

impl PumpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pump power must be >= 0, got {}",
                self.power
            )));
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pump frequency must be > 0, got {}",
                self.frequency
            )));
        }
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "pump area must be > 0, got {}",
                self.area
            )));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidConfig("pump phase must be finite".into()));
        }
        Ok(())
    }

    /// Pump wavelength in vacuum, m.
    pub fn wavelength(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig {
    /// Crystal length l, m.
    pub length: f64,
    /// Mean index n̄_s seen by the signal polarisation.
    pub index_s: f64,
    /// Mean index n̄_p seen by the pump polarisation.
    pub index_p: f64,
    /// Effective second-order susceptibility χ⁽²⁾_{s,s,p}, m/V.
    pub chi2: f64,
    /// Position x₀ of the crystal's left face, m.
    pub position: f64,
}

impl CrystalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "crystal length must be > 0, got {}",
                self.length
            )));
        }
        if !(self.index_s >= 1.0 && self.index_s.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "index_s must be >= 1, got {}",
                self.index_s
            )));
        }
        if !(self.index_p >= 1.0 && self.index_p.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "index_p must be >= 1, got {}",
                self.index_p
            )));
        }
        if !(self.chi2 >= 0.0 && self.chi2.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "chi2 must be >= 0, got {}",
                self.chi2
            )));
        }
        if !self.position.is_finite() {
            return Err(Error::InvalidConfig(
                "crystal position must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    /// Geometric mirror separation L_cav, m. When absent the optical length
    /// is chosen so that the drive sits on the requested resonance.
    pub length: Option<f64>,
    /// Intensity reflection coefficient r of each mirror.
    pub reflectivity: f64,
    /// Pump harmonic m, with Ω = 2mπc/L₀ at resonance.
    pub harmonic: u32,
    /// Fractional detuning δ, Ω = (2mπc/L₀)(1 + δ).
    pub detuning: f64,
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reflectivity > 0.0 && self.reflectivity < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "reflectivity must lie in (0, 1), got {}",
                self.reflectivity
            )));
        }
        if self.harmonic < 1 {
            return Err(Error::InvalidConfig("harmonic must be >= 1".into()));
        }
        if let Some(l) = self.length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "cavity length must be > 0, got {l}"
                )));
            }
        }
        if !(self.detuning.is_finite() && self.detuning > -1.0) {
            return Err(Error::InvalidConfig(format!(
                "detuning must be > -1, got {}",
                self.detuning
            )));
        }
        Ok(())
    }

    pub fn finesse(&self) -> f64 {
        finesse_from_reflectivity(self.reflectivity)
    }
}

/// `F = −π / ln r`, from F ≈ π/2ρ with r = e^{−2ρ}.
pub fn finesse_from_reflectivity(r: f64) -> f64 {
    -PI / r.ln()
}

/// Inverse of [`finesse_from_reflectivity`].
pub fn reflectivity_from_finesse(finesse: f64) -> f64 {
    (-PI / finesse).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveKind {
    Mechanical,
    Optical,
}

/// Amplitude of a mechanical drive, given either as a displacement or
/// directly as β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MechanicalAmplitude {
    Epsilon(f64),
    Beta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Drive {
    Optical {
        pump: PumpConfig,
        crystal: CrystalConfig,
    },
    Mechanical {
        amplitude: MechanicalAmplitude,
        frequency: f64,
        phase: f64,
    },
}

/// Complete physical description of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub drive: Drive,
    pub cavity: CavityConfig,
}

/// Drive strength and phase, common to both kinds of drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub beta: f64,
    pub theta: f64,
    /// Modulation amplitude ε, m.
    pub epsilon: f64,
    pub kind: DriveKind,
}

/// Dimensionless (and a few dimensional) parameters shared by the closed
/// forms and the scattering engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub drive: DriveParams,
    pub beta: f64,
    pub finesse: f64,
    pub reflectivity: f64,
    /// Amplitude loss parameter ρ with r = e^{−2ρ}.
    pub rho: f64,
    /// Single-pass time of flight L₀/c, s.
    pub tau: f64,
    /// Squeezing rate ν₀ = β/τ, 1/s.
    pub nu0: f64,
    /// Energy damping rate γ = π/(Fτ), 1/s.
    pub gamma: f64,
    /// Oscillation threshold π/(2F).
    pub threshold: f64,
    /// Index-modulation amplitude κ (zero for a mechanical drive).
    pub kappa: f64,
    /// Pump field amplitude E₀, V/m (zero for a mechanical drive).
    pub pump_amplitude: f64,
    /// Pump angular frequency Ω, rad/s.
    pub omega: f64,
    /// Mean optical length L₀, m.
    pub mean_length: f64,
    pub harmonic: u32,
    pub detuning: f64,
}

impl DerivedParams {
    /// Builds parameters directly from the dimensionless primary inputs
    /// (β, F, m, δ, θ) and a mean length.
    pub fn from_dimensionless(
        beta: f64,
        finesse: f64,
        harmonic: u32,
        detuning: f64,
        theta: f64,
        mean_length: f64,
    ) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be >= 0, got {beta}"
            )));
        }
        if !(finesse > 0.0 && finesse.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "finesse must be > 0, got {finesse}"
            )));
        }
        let cavity = CavityConfig {
            length: None,
            reflectivity: reflectivity_from_finesse(finesse),
            harmonic,
            detuning,
        };
        cavity.validate()?;
        if !(mean_length > 0.0 && mean_length.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mean length must be > 0, got {mean_length}"
            )));
        }
        let omega = resonant_frequency(mean_length, harmonic, detuning);
        let drive = DriveParams {
            beta,
            theta,
            epsilon: beta * SPEED_OF_LIGHT / omega,
            kind: DriveKind::Mechanical,
        };
        Ok(assemble(
            drive,
            finesse,
            cavity.reflectivity,
            omega,
            mean_length,
            harmonic,
            detuning,
            0.0,
            0.0,
        ))
    }

    /// Same parameters with a different β (and matching ε).
    pub fn with_beta(&self, beta: f64) -> Self {
        let mut out = *self;
        out.beta = beta;
        out.drive.beta = beta;
        out.drive.epsilon = beta * SPEED_OF_LIGHT / self.omega;
        out.nu0 = beta / self.tau;
        out
    }

    /// Same parameters with the finesse set exactly (and r, ρ, γ and the
    /// threshold to match).
    pub fn with_finesse(&self, finesse: f64) -> Self {
        let mut out = *self;
        out.finesse = finesse;
        out.reflectivity = reflectivity_from_finesse(finesse);
        out.rho = PI / (2.0 * finesse);
        out.gamma = PI / (finesse * self.tau);
        out.threshold = PI / (2.0 * finesse);
        out
    }

    /// Round-trip time 2L₀/c, s.
    pub fn round_trip_time(&self) -> f64 {
        2.0 * self.tau
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    drive: DriveParams,
    finesse: f64,
    reflectivity: f64,
    omega: f64,
    mean_length: f64,
    harmonic: u32,
    detuning: f64,
    kappa: f64,
    pump_amplitude: f64,
) -> DerivedParams {
    let tau = mean_length / SPEED_OF_LIGHT;
    DerivedParams {
        drive,
        beta: drive.beta,
        finesse,
        reflectivity,
        rho: PI / (2.0 * finesse),
        tau,
        nu0: drive.beta / tau,
        gamma: PI / (finesse * tau),
        threshold: PI / (2.0 * finesse),
        kappa,
        pump_amplitude,
        omega,
        mean_length,
        harmonic,
        detuning,
    }
}

/// `Ω = (2mπc/L₀)(1 + δ)`.
pub fn resonant_frequency(mean_length: f64, harmonic: u32, detuning: f64) -> f64 {
    2.0 * harmonic as f64 * PI * SPEED_OF_LIGHT / mean_length * (1.0 + detuning)
}

fn check_optical(pump: &PumpConfig, crystal: &CrystalConfig) -> Result<()> {
    pump.validate()?;
    crystal.validate()
}

/// Pump field amplitude `E₀ = sqrt(P / (2 ε₀ c A n̄_p))`, V/m.
pub fn pump_amplitude(pump: &PumpConfig, crystal: &CrystalConfig) -> Result<f64> {
    check_optical(pump, crystal)?;
    Ok((pump.power / (2.0 * EPSILON_0 * SPEED_OF_LIGHT * pump.area * crystal.index_p)).sqrt())
}

/// Dimensionless amplitude κ of the susceptibility modulation.
pub fn kappa(pump: &PumpConfig, crystal: &CrystalConfig) -> Result<f64> {
    Ok(pump_amplitude(pump, crystal)? * crystal.chi2)
}

/// Rejects crystals that are not thin compared with the pump wavelength.
pub fn check_thin_crystal(pump: &PumpConfig, crystal: &CrystalConfig) -> Result<()> {
    let limit = THIN_CRYSTAL_LIMIT * pump.wavelength();
    if crystal.length > limit {
        return Err(Error::ModelValidity(format!(
            "crystal length {:e} m exceeds {THIN_CRYSTAL_LIMIT} x pump wavelength ({limit:e} m); \
             the spatially averaged index does not apply",
            crystal.length
        )));
    }
    Ok(())
}

/// Apparent length-modulation amplitude `ε_opt = (l / 2n̄_s) κ`, m.
pub fn epsilon_opt(pump: &PumpConfig, crystal: &CrystalConfig) -> Result<f64> {
    let kappa = kappa(pump, crystal)?;
    check_thin_crystal(pump, crystal)?;
    Ok(crystal.length / (2.0 * crystal.index_s) * kappa)
}

/// Drive phase θ = θ_p + Ω n̄_p (x₀ + l/2)/c − π/2 of the averaged index.
pub fn optical_phase(pump: &PumpConfig, crystal: &CrystalConfig) -> f64 {
    pump.phase
        + pump.frequency * crystal.index_p * (crystal.position + crystal.length / 2.0)
            / SPEED_OF_LIGHT
        - PI / 2.0
}

/// Spatially averaged signal index `n_s(t) = n̄_s + (ε_opt/l) sin(Ωt − θ)`.
pub fn effective_index(t: f64, pump: &PumpConfig, crystal: &CrystalConfig) -> Result<f64> {
    let eps = epsilon_opt(pump, crystal)?;
    let theta = optical_phase(pump, crystal);
    Ok(crystal.index_s + eps / crystal.length * (pump.frequency * t - theta).sin())
}

/// Mean optical length `L₀ = L_cav + l (n̄_s − 1)`.
pub fn mean_length(cavity_length: f64, crystal: Option<&CrystalConfig>) -> f64 {
    match crystal {
        Some(c) => cavity_length + c.length * (c.index_s - 1.0),
        None => cavity_length,
    }
}

/// Apparent cavity length `L(t) = L₀ + ε sin(Ωt − θ)`.
pub fn cavity_length(t: f64, derived: &DerivedParams) -> f64 {
    derived.mean_length + derived.drive.epsilon * (derived.omega * t - derived.drive.theta).sin()
}

/// `β = εΩ/c`.
pub fn beta_from_epsilon(epsilon: f64, omega: f64) -> f64 {
    epsilon * omega / SPEED_OF_LIGHT
}

/// β of the pumped crystal, `ε_opt Ω / c`.
pub fn beta_optical(pump: &PumpConfig, crystal: &CrystalConfig) -> Result<f64> {
    Ok(beta_from_epsilon(
        epsilon_opt(pump, crystal)?,
        pump.frequency,
    ))
}

/// Drive strength, phase and amplitude for either kind of drive.
pub fn drive_params(drive: &Drive) -> Result<DriveParams> {
    match drive {
        Drive::Optical { pump, crystal } => {
            let epsilon = epsilon_opt(pump, crystal)?;
            Ok(DriveParams {
                beta: beta_from_epsilon(epsilon, pump.frequency),
                theta: optical_phase(pump, crystal),
                epsilon,
                kind: DriveKind::Optical,
            })
        }
        Drive::Mechanical {
            amplitude,
            frequency,
            phase,
        } => {
            if !(*frequency > 0.0 && frequency.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "drive frequency must be > 0, got {frequency}"
                )));
            }
            let (epsilon, beta) = match *amplitude {
                MechanicalAmplitude::Epsilon(e) => {
                    if !(e >= 0.0 && e.is_finite()) {
                        return Err(Error::InvalidConfig(format!(
                            "epsilon must be >= 0, got {e}"
                        )));
                    }
                    (e, beta_from_epsilon(e, *frequency))
                }
                MechanicalAmplitude::Beta(b) => {
                    if !(b >= 0.0 && b.is_finite()) {
                        return Err(Error::InvalidConfig(format!("beta must be >= 0, got {b}")));
                    }
                    (b * SPEED_OF_LIGHT / frequency, b)
                }
            };
            Ok(DriveParams {
                beta,
                theta: *phase,
                epsilon,
                kind: DriveKind::Mechanical,
            })
        }
    }
}

/// Converts a physical experiment into [`DerivedParams`].
pub fn derive(experiment: &Experiment) -> Result<DerivedParams> {
    let cavity = &experiment.cavity;
    cavity.validate()?;
    let drive = drive_params(&experiment.drive)?;
    let (omega, crystal, kappa, e0) = match &experiment.drive {
        Drive::Optical { pump, crystal } => (
            pump.frequency,
            Some(crystal),
            kappa(pump, crystal)?,
            pump_amplitude(pump, crystal)?,
        ),
        Drive::Mechanical { frequency, .. } => (*frequency, None, 0.0, 0.0),
    };
    let m = cavity.harmonic as f64;
    let (l0, detuning) = match cavity.length {
        Some(l_cav) => {
            if cavity.detuning != 0.0 {
                return Err(Error::InvalidConfig(
                    "give either the cavity length or the detuning, not both".into(),
                ));
            }
            let l0 = mean_length(l_cav, crystal);
            (l0, omega * l0 / (2.0 * m * PI * SPEED_OF_LIGHT) - 1.0)
        }
        None => (
            2.0 * m * PI * SPEED_OF_LIGHT * (1.0 + cavity.detuning) / omega,
            cavity.detuning,
        ),
    };
    if !(l0 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "mean optical length must be > 0, got {l0}"
        )));
    }
    Ok(assemble(
        drive,
        cavity.finesse(),
        cavity.reflectivity,
        omega,
        l0,
        cavity.harmonic,
        detuning,
        kappa,
        e0,
    ))
}
