//! Subcommand bodies. Each returns the artifacts as strings; writing them is
//! left to the caller.

use std::f64::consts::PI;

use casimir_core::analytic::{
    model_comparison, n_damped, n_intra_scattering, n_out_damped, n_out_rate_scattering,
    n_squeezing_lossless, stationary_peak_from_beta, ComparisonReport,
};
use casimir_core::engine::{
    self, measure_outflux_slope, LinearFit, RunSpec, SimulationResult, Verdict,
};
use casimir_core::modes::Sidebands;
use casimir_core::units::{DerivedParams, DriveKind};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::grid::{apply_point, Grid, GridKey, GridPoint};
use crate::output::{fmt_f64, fmt_opt, sanitize_cell, to_json, Table};

/// Default analytic horizon, in units of 1/γ.
pub const DEFAULT_T_MAX_GAMMA: f64 = 6.0;
pub const DEFAULT_POINTS: usize = 601;
/// Tolerance on `ratio/m − 1` when judging the factor-m scaling.
pub const M_SCALING_TOL: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeriveReport {
    pub kind: DriveKind,
    pub beta: f64,
    pub beta_over_threshold: f64,
    pub threshold_beta: f64,
    pub theta_rad: f64,
    pub epsilon_m: f64,
    pub kappa: f64,
    pub pump_amplitude_v_per_m: f64,
    pub pump_frequency_hz: f64,
    pub omega_rad_per_s: f64,
    pub finesse: f64,
    pub reflectivity: f64,
    pub rho: f64,
    pub harmonic: u32,
    pub detuning: f64,
    pub mean_length_m: f64,
    pub tau_s: f64,
    pub nu0_per_s: f64,
    pub gamma_per_s: f64,
}

impl From<&DerivedParams> for DeriveReport {
    fn from(d: &DerivedParams) -> Self {
        DeriveReport {
            kind: d.drive.kind,
            beta: d.beta,
            beta_over_threshold: d.beta / d.threshold,
            threshold_beta: d.threshold,
            theta_rad: d.drive.theta,
            epsilon_m: d.drive.epsilon,
            kappa: d.kappa,
            pump_amplitude_v_per_m: d.pump_amplitude,
            pump_frequency_hz: d.omega / (2.0 * PI),
            omega_rad_per_s: d.omega,
            finesse: d.finesse,
            reflectivity: d.reflectivity,
            rho: d.rho,
            harmonic: d.harmonic,
            detuning: d.detuning,
            mean_length_m: d.mean_length,
            tau_s: d.tau,
            nu0_per_s: d.nu0,
            gamma_per_s: d.gamma,
        }
    }
}

pub fn derive_report(config: &ExperimentConfig) -> Result<DeriveReport, CliError> {
    Ok(DeriveReport::from(&config.derived()?))
}

pub fn compare_report(config: &ExperimentConfig) -> Result<ComparisonReport, CliError> {
    let d = config.derived()?;
    Ok(model_comparison(d.beta, d.finesse, d.harmonic, d.omega)?)
}

pub const ANALYTIC_COLUMNS: [&str; 8] = [
    "t",
    "gamma_t",
    "n_scattering",
    "n_squeeze_lossless",
    "n_damped",
    "n_out_damped",
    "n_out_scattering_cum",
    "n_out_rate_scattering",
];

/// Evenly spaced times on `[0, t_max]`; a single point is `t = 0`.
pub fn time_grid(t_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Parse("time grid needs at least one point".into()));
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::Parse(format!("t_max must be > 0, got {t_max}")));
    }
    Ok((0..points)
        .map(|i| t_max * i as f64 / (points - 1) as f64)
        .collect())
}

/// Every closed-form curve on a time grid (`t_max` defaults to 6/γ).
pub fn analytic_table(
    config: &ExperimentConfig,
    t_max: Option<f64>,
    points: usize,
) -> Result<Table, CliError> {
    let d = config.derived()?;
    let n_scat = n_intra_scattering(d.beta, d.finesse, d.harmonic)?;
    let rate = n_out_rate_scattering(d.beta, d.finesse, d.omega)?;
    let times = time_grid(t_max.unwrap_or(DEFAULT_T_MAX_GAMMA / d.gamma), points)?;
    let mut table = Table::new(&ANALYTIC_COLUMNS);
    for t in times {
        table.push_numbers(&[
            t,
            d.gamma * t,
            n_scat,
            n_squeezing_lossless(t, d.nu0),
            n_damped(t, d.nu0, d.gamma),
            n_out_damped(t, d.nu0, d.gamma),
            rate * t,
            rate,
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Predictions {
    pub n_scattering: Option<f64>,
    pub n_out_rate_scattering: Option<f64>,
    pub n_peak_damped: Option<f64>,
    pub t_peak_damped_s: f64,
    pub log_slope_damped_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ratios {
    pub level_to_scattering: Option<f64>,
    pub outflux_to_scattering: Option<f64>,
    pub level_to_peak_damped: Option<f64>,
    /// Outflux slope over `γ · level`.
    pub flux_balance: Option<f64>,
    pub log_slope_to_damped: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub kind: DriveKind,
    pub beta: f64,
    pub beta_over_threshold: f64,
    pub finesse: f64,
    pub harmonic: u32,
    pub detuning: f64,
    pub modes: usize,
    pub sidebands: Sidebands,
    pub nu0_per_s: f64,
    pub gamma_per_s: f64,
    pub round_trip_time_s: f64,
    pub round_trips: u64,
    pub stopped_early: bool,
    pub verdict: Verdict,
    pub outflux_fit: Option<LinearFit>,
    pub predictions: Predictions,
    pub ratios: Ratios,
}

impl SimulationSummary {
    pub fn level(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Stationary { level, .. } => Some(level),
            _ => None,
        }
    }

    pub fn outflux_rate(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Stationary { outflux_rate, .. } => Some(outflux_rate),
            _ => None,
        }
    }

    pub fn log_slope(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Growing { log_slope, .. } => Some(log_slope),
            _ => None,
        }
    }

    pub fn t_s(&self) -> Option<f64> {
        match self.verdict {
            Verdict::Stationary { t_s, .. } => Some(t_s),
            _ => None,
        }
    }
}

fn ratio(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b != 0.0 => Some(a / b),
        _ => None,
    }
}

pub fn summarize(spec: &RunSpec, result: &SimulationResult) -> SimulationSummary {
    let d = &spec.derived;
    let predictions = Predictions {
        n_scattering: n_intra_scattering(d.beta, d.finesse, d.harmonic).ok(),
        n_out_rate_scattering: n_out_rate_scattering(d.beta, d.finesse, d.omega).ok(),
        n_peak_damped: stationary_peak_from_beta(d.beta, d.finesse).ok(),
        t_peak_damped_s: 2.0 / d.gamma,
        log_slope_damped_per_s: 2.0 * d.nu0 - d.gamma,
    };
    let mut summary = SimulationSummary {
        kind: d.drive.kind,
        beta: d.beta,
        beta_over_threshold: d.beta / d.threshold,
        finesse: d.finesse,
        harmonic: d.harmonic,
        detuning: d.detuning,
        modes: spec.basis.count(),
        sidebands: spec.sidebands,
        nu0_per_s: d.nu0,
        gamma_per_s: d.gamma,
        round_trip_time_s: d.round_trip_time(),
        round_trips: result.round_trips,
        stopped_early: result.stopped_early,
        verdict: result.verdict,
        outflux_fit: measure_outflux_slope(result).ok(),
        ratios: Ratios {
            level_to_scattering: None,
            outflux_to_scattering: None,
            level_to_peak_damped: None,
            flux_balance: None,
            log_slope_to_damped: None,
        },
        predictions,
    };
    let level = summary.level();
    summary.ratios = Ratios {
        level_to_scattering: ratio(level, summary.predictions.n_scattering),
        outflux_to_scattering: ratio(
            summary.outflux_rate(),
            summary.predictions.n_out_rate_scattering,
        ),
        level_to_peak_damped: ratio(level, summary.predictions.n_peak_damped),
        flux_balance: ratio(summary.outflux_rate(), level.map(|l| l * d.gamma)),
        log_slope_to_damped: ratio(
            summary.log_slope(),
            Some(summary.predictions.log_slope_damped_per_s),
        ),
    };
    summary
}

pub struct SimulationArtifacts {
    pub series: Table,
    pub spectrum: Table,
    pub summary: SimulationSummary,
}

impl SimulationArtifacts {
    pub fn summary_json(&self) -> String {
        to_json(&self.summary)
    }
}

pub fn simulate(config: &ExperimentConfig) -> Result<SimulationArtifacts, CliError> {
    let spec = config.run_spec()?;
    let result = engine::run(&spec)?;
    Ok(artifacts(&spec, &result))
}

pub fn artifacts(spec: &RunSpec, result: &SimulationResult) -> SimulationArtifacts {
    let gamma = spec.derived.gamma;
    let mut series = Table::new(&["t", "gamma_t", "n_intra", "n_out_cum"]);
    for i in 0..result.times.len() {
        let t = result.times[i];
        series.push_numbers(&[t, gamma * t, result.n_intra[i], result.n_out_cum[i]]);
    }
    let mut spectrum = Table::new(&["k", "omega_rad_per_s", "n_k"]);
    let omegas = spec.basis.frequencies();
    for (i, &n) in result.spectrum.iter().enumerate() {
        spectrum.push(vec![(i + 1).to_string(), fmt_f64(omegas[i]), fmt_f64(n)]);
    }
    SimulationArtifacts {
        series,
        spectrum,
        summary: summarize(spec, result),
    }
}

/// Columns shared by a simulation summary and a sweep row.
pub const SUMMARY_COLUMNS: [&str; 17] = [
    "beta",
    "beta_over_threshold",
    "finesse",
    "harmonic",
    "detuning",
    "modes",
    "verdict",
    "t_s",
    "level",
    "outflux_rate",
    "log_slope",
    "round_trips",
    "stopped_early",
    "n_scattering",
    "level_to_scattering",
    "outflux_to_scattering",
    "flux_balance",
];

pub fn summary_row(s: &SimulationSummary) -> Vec<String> {
    vec![
        fmt_f64(s.beta),
        fmt_f64(s.beta_over_threshold),
        fmt_f64(s.finesse),
        s.harmonic.to_string(),
        fmt_f64(s.detuning),
        s.modes.to_string(),
        s.verdict.name().to_string(),
        fmt_opt(s.t_s()),
        fmt_opt(s.level()),
        fmt_opt(s.outflux_rate()),
        fmt_opt(s.log_slope()),
        s.round_trips.to_string(),
        s.stopped_early.to_string(),
        fmt_opt(s.predictions.n_scattering),
        fmt_opt(s.ratios.level_to_scattering),
        fmt_opt(s.ratios.outflux_to_scattering),
        fmt_opt(s.ratios.flux_balance),
    ]
}

pub fn sweep_header() -> Vec<&'static str> {
    let mut h = vec!["index"];
    h.extend(SUMMARY_COLUMNS);
    h.extend(["level_ratio_to_m1", "m_scaling_consistent", "error"]);
    h
}

/// Row of the same grid point with `m = 1`, if the grid sweeps `m`.
fn m1_partner(points: &[GridPoint], point: &GridPoint) -> Option<usize> {
    if !point.iter().any(|(k, _)| *k == GridKey::Harmonic) {
        return None;
    }
    let target: GridPoint = point
        .iter()
        .map(|&(k, v)| {
            if k == GridKey::Harmonic {
                (k, 1.0)
            } else {
                (k, v)
            }
        })
        .collect();
    points.iter().position(|p| *p == target)
}

/// Runs every grid point; failed points keep their row with an error.
pub fn sweep_table(
    config: &ExperimentConfig,
    grid: &Grid,
    workers: usize,
) -> Result<Table, CliError> {
    let points = grid.points();
    let specs: Vec<Result<RunSpec, CliError>> = points
        .iter()
        .map(|p| apply_point(config, p).and_then(|c| c.run_spec()))
        .collect();
    let runnable: Vec<RunSpec> = specs
        .iter()
        .filter_map(|s| s.as_ref().ok().cloned())
        .collect();
    let mut results = engine::sweep(&runnable, workers)?.into_iter();

    let outcomes: Vec<Result<SimulationSummary, CliError>> = specs
        .into_iter()
        .map(|spec| {
            let spec = spec?;
            let result = results.next().expect("one result per runnable spec")?;
            Ok(summarize(&spec, &result))
        })
        .collect();

    let mut table = Table::new(&sweep_header());
    for (i, outcome) in outcomes.iter().enumerate() {
        let mut row = vec![i.to_string()];
        match outcome {
            Ok(s) => {
                row.extend(summary_row(s));
                let base = m1_partner(&points, &points[i])
                    .and_then(|j| outcomes[j].as_ref().ok())
                    .and_then(|b| b.level());
                let r = ratio(s.level(), base);
                row.push(fmt_opt(r));
                row.push(
                    r.map(|r| ((r / s.harmonic as f64 - 1.0).abs() <= M_SCALING_TOL).to_string())
                        .unwrap_or_default(),
                );
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(
                    String::new(),
                    SUMMARY_COLUMNS.len() + 2,
                ));
                row.push(sanitize_cell(&format!("{}: {e}", e.category())));
            }
        }
        table.push(row);
    }
    Ok(table)
}
