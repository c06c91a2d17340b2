//! File-level experiment configuration.
//!
//! Field names carry their SI unit. Frequencies are ordinary frequencies in
//! Hz and become angular frequencies here, at the boundary.

use std::f64::consts::PI;

use casimir_core::engine::RunSpec;
use casimir_core::modes::Sidebands;
use casimir_core::units::{
    derive, reflectivity_from_finesse, CavityConfig, CrystalConfig, DerivedParams, Drive,
    Experiment, MechanicalAmplitude, PumpConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<PumpSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crystal: Option<CrystalSection>,
    pub cavity: CavitySection,
    pub drive: DriveSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub power_watts: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
    pub area_m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    pub length_m: f64,
    pub index_signal: f64,
    pub index_pump: f64,
    pub chi2_m_per_v: f64,
    #[serde(default)]
    pub position_m: f64,
}

/// Exactly one of `reflectivity` and `finesse` must be given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflectivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finesse: Option<f64>,
    #[serde(default = "one")]
    pub harmonic: u32,
    #[serde(default)]
    pub detuning: f64,
    /// Mirror separation; when given, the detuning follows from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_m: Option<f64>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DriveSection {
    /// Pumped crystal described by the `pump` and `crystal` sections.
    Optical,
    /// Moving mirror. Exactly one of `epsilon_m`, `beta` and `beta_rel`
    /// (β in units of the threshold π/2F) sets the amplitude.
    Mechanical {
        frequency_hz: f64,
        #[serde(default)]
        phase_rad: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon_m: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta_rel: Option<f64>,
    },
}

/// Optional overrides of the engine defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidebands: Option<Sidebands>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_round_trips: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationarity_tol: Option<f64>,
    /// Window width in units of 1/γ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationarity_window_gamma: Option<f64>,
}

/// Parses a config, reporting the failing field path with line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Parse(format!("at `{path}`: {}", e.into_inner()))
    })?;
    de.end().map_err(|e| CliError::Parse(e.to_string()))?;
    config.check_structure()?;
    Ok(config)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Canonical pretty JSON, newline terminated.
pub fn emit_config(config: &ExperimentConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}

fn exactly_one(what: &str, given: &[(&str, bool)]) -> Result<(), CliError> {
    let count = given.iter().filter(|(_, g)| *g).count();
    if count != 1 {
        let names: Vec<&str> = given.iter().map(|(n, _)| *n).collect();
        return Err(CliError::Parse(format!(
            "{what}: give exactly one of {}",
            names.join(" / ")
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    fn check_structure(&self) -> Result<(), CliError> {
        exactly_one(
            "cavity",
            &[
                ("reflectivity", self.cavity.reflectivity.is_some()),
                ("finesse", self.cavity.finesse.is_some()),
            ],
        )?;
        match self.drive {
            DriveSection::Optical => {
                if self.pump.is_none() || self.crystal.is_none() {
                    return Err(CliError::Parse(
                        "optical drive needs `pump` and `crystal` sections".into(),
                    ));
                }
            }
            DriveSection::Mechanical {
                epsilon_m,
                beta,
                beta_rel,
                ..
            } => {
                if self.pump.is_some() || self.crystal.is_some() {
                    return Err(CliError::Parse(
                        "`pump` and `crystal` sections only apply to the optical drive".into(),
                    ));
                }
                exactly_one(
                    "drive",
                    &[
                        ("epsilon_m", epsilon_m.is_some()),
                        ("beta", beta.is_some()),
                        ("beta_rel", beta_rel.is_some()),
                    ],
                )?;
            }
        }
        Ok(())
    }

    pub fn finesse(&self) -> f64 {
        match (self.cavity.finesse, self.cavity.reflectivity) {
            (Some(f), _) => f,
            (None, Some(r)) => casimir_core::units::finesse_from_reflectivity(r),
            (None, None) => f64::NAN,
        }
    }

    pub fn experiment(&self) -> Result<Experiment, CliError> {
        self.check_structure()?;
        let reflectivity = match (self.cavity.reflectivity, self.cavity.finesse) {
            (Some(r), _) => r,
            (None, Some(f)) => {
                if !(f > 0.0 && f.is_finite()) {
                    return Err(casimir_core::Error::InvalidConfig(format!(
                        "finesse must be > 0, got {f}"
                    ))
                    .into());
                }
                reflectivity_from_finesse(f)
            }
            (None, None) => unreachable!("checked above"),
        };
        let cavity = CavityConfig {
            length: self.cavity.length_m,
            reflectivity,
            harmonic: self.cavity.harmonic,
            detuning: self.cavity.detuning,
        };
        let drive = match self.drive {
            DriveSection::Optical => {
                let (p, c) = (self.pump.expect("checked"), self.crystal.expect("checked"));
                Drive::Optical {
                    pump: PumpConfig {
                        power: p.power_watts,
                        frequency: 2.0 * PI * p.frequency_hz,
                        phase: p.phase_rad,
                        area: p.area_m2,
                    },
                    crystal: CrystalConfig {
                        length: c.length_m,
                        index_s: c.index_signal,
                        index_p: c.index_pump,
                        chi2: c.chi2_m_per_v,
                        position: c.position_m,
                    },
                }
            }
            DriveSection::Mechanical {
                frequency_hz,
                phase_rad,
                epsilon_m,
                beta,
                beta_rel,
            } => {
                let amplitude = match (epsilon_m, beta, beta_rel) {
                    (Some(e), _, _) => MechanicalAmplitude::Epsilon(e),
                    (_, Some(b), _) => MechanicalAmplitude::Beta(b),
                    (_, _, Some(rel)) => {
                        MechanicalAmplitude::Beta(rel * PI / (2.0 * self.finesse()))
                    }
                    _ => unreachable!("checked above"),
                };
                Drive::Mechanical {
                    amplitude,
                    frequency: 2.0 * PI * frequency_hz,
                    phase: phase_rad,
                }
            }
        };
        Ok(Experiment { drive, cavity })
    }

    pub fn derived(&self) -> Result<DerivedParams, CliError> {
        let derived = derive(&self.experiment()?)?;
        Ok(match self.cavity.finesse {
            Some(f) => derived.with_finesse(f),
            None => derived,
        })
    }

    /// Engine run for this config: defaults plus the `run` overrides.
    pub fn run_spec(&self) -> Result<RunSpec, CliError> {
        let mut spec = RunSpec::new(self.derived()?)?;
        let run = &self.run;
        if let Some(k) = run.modes {
            spec = spec.with_modes(k)?;
        }
        if let Some(n) = run.max_round_trips {
            spec = spec.with_round_trips(n);
        }
        if let Some(n) = run.record_every {
            spec.record_every = n;
        }
        if let Some(s) = run.sidebands {
            spec.sidebands = s;
        }
        if let Some(tol) = run.stationarity_tol {
            spec.stationarity_tol = tol;
        }
        if let Some(w) = run.stationarity_window_gamma {
            spec.stationarity_window = w;
        }
        spec.validate()?;
        Ok(spec)
    }
}
