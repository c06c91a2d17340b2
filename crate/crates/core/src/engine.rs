//! Stroboscopic evolution of the cavity state, one round trip per step.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{photon_numbers, round_trip_channel, GaussianState, ModeBasis, Sidebands};
use crate::units::DerivedParams;

pub const DEFAULT_TOL: f64 = 1e-3;
/// Stationarity window, in units of 1/γ.
pub const DEFAULT_WINDOW: f64 = 10.0;
/// Upper bound on stored samples per run.
pub const MAX_SAMPLES: u64 = 100_000;
/// Intracavity photon number at which a run is considered runaway and stopped.
pub const RUNAWAY_PHOTONS: f64 = 1e12;
/// Minimum R² of the log-linear fit for a growing verdict.
pub const GROWTH_R2: f64 = 0.99;

/// Everything needed to reproduce one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub derived: DerivedParams,
    pub basis: ModeBasis,
    pub sidebands: Sidebands,
    pub max_round_trips: u64,
    pub record_every: u64,
    pub stationarity_tol: f64,
    /// Window width in units of 1/γ.
    pub stationarity_window: f64,
}

impl RunSpec {
    /// Spec with default basis size, horizon and detector settings.
    pub fn new(derived: DerivedParams) -> Result<Self> {
        let basis = ModeBasis::for_params(&derived, None)?;
        let max_round_trips = default_round_trips(derived.finesse);
        Ok(RunSpec {
            derived,
            basis,
            sidebands: Sidebands::default(),
            max_round_trips,
            record_every: default_record_every(max_round_trips),
            stationarity_tol: DEFAULT_TOL,
            stationarity_window: DEFAULT_WINDOW,
        })
    }

    /// Replaces the horizon and rescales `record_every` to match.
    pub fn with_round_trips(mut self, round_trips: u64) -> Self {
        self.max_round_trips = round_trips;
        self.record_every = default_record_every(round_trips);
        self
    }

    pub fn with_modes(mut self, modes: usize) -> Result<Self> {
        self.basis = ModeBasis::for_params(&self.derived, Some(modes))?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_round_trips < 1 {
            return Err(Error::InvalidConfig("max_round_trips must be >= 1".into()));
        }
        if self.record_every < 1 {
            return Err(Error::InvalidConfig("record_every must be >= 1".into()));
        }
        if !(self.stationarity_tol > 0.0 && self.stationarity_tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stationarity_tol must lie in (0, 1), got {}",
                self.stationarity_tol
            )));
        }
        if !(self.stationarity_window > 0.0 && self.stationarity_window.is_finite()) {
            return Err(Error::InvalidConfig(
                "stationarity_window must be > 0".into(),
            ));
        }
        if self.basis.harmonic() != self.derived.harmonic {
            return Err(Error::Consistency(
                "basis harmonic differs from the drive harmonic".into(),
            ));
        }
        Ok(())
    }
}

/// `ceil(60 F/π)` round trips: twelve default windows.
pub fn default_round_trips(finesse: f64) -> u64 {
    ((60.0 * finesse / std::f64::consts::PI).ceil() as u64).max(64)
}

/// Smallest stride keeping at most [`MAX_SAMPLES`] recorded samples.
pub fn default_record_every(round_trips: u64) -> u64 {
    round_trips.div_ceil(MAX_SAMPLES).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Verdict {
    Stationary {
        t_s: f64,
        level: f64,
        outflux_rate: f64,
    },
    Growing {
        log_slope: f64,
        r2: f64,
    },
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Stationary { .. } => "stationary",
            Verdict::Growing { .. } => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// Sample times, s.
    pub times: Vec<f64>,
    pub n_intra: Vec<f64>,
    pub n_out_cum: Vec<f64>,
    /// Final photon number of each mode `k = 1..=K`.
    pub spectrum: Vec<f64>,
    pub verdict: Verdict,
    pub round_trips: u64,
    /// The run hit [`RUNAWAY_PHOTONS`] before `max_round_trips`.
    pub stopped_early: bool,
    pub gamma: f64,
}

/// Least-squares line through `(t, y)` with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub rms_residual: f64,
    pub samples: usize,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InsufficientData(format!(
            "linear fit needs >= 2 paired samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "linear fit over a single abscissa".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r2,
        rms_residual: (ss_res / nf).sqrt(),
        samples: n,
    })
}

/// Earliest time after which consecutive windowed means of `values` agree to
/// within `tol`, together with the settled level.
///
/// Windows have width `window/γ` and start at `times[0]`; only complete
/// windows count. The level is the mean over the windows after `t_s`.
pub fn detect_stationary(
    times: &[f64],
    values: &[f64],
    tol: f64,
    window: f64,
    gamma: f64,
) -> Result<Option<(f64, f64)>> {
    if times.len() != values.len() {
        return Err(Error::Consistency(
            "times and values differ in length".into(),
        ));
    }
    if !(gamma > 0.0) || !(window > 0.0) {
        return Err(Error::InvalidConfig("window and gamma must be > 0".into()));
    }
    let width = window / gamma;
    let Some((&t0, &t_end)) = times.first().zip(times.last()) else {
        return Err(Error::InsufficientData("empty series".into()));
    };
    let count = ((t_end - t0) / width * (1.0 + 1e-12)).floor() as usize;
    if count < 3 {
        return Err(Error::InsufficientData(format!(
            "series spans {count} windows of width {width:e} s; need 3"
        )));
    }

    let mut sums = vec![0.0; count];
    let mut hits = vec![0usize; count];
    for (&t, &v) in times.iter().zip(values) {
        let i = ((t - t0) / width).floor() as usize;
        if i < count {
            sums[i] += v;
            hits[i] += 1;
        }
    }
    if hits.iter().any(|&h| h == 0) {
        return Err(Error::InsufficientData(
            "a stationarity window holds no samples".into(),
        ));
    }
    let means: Vec<f64> = sums.iter().zip(&hits).map(|(s, &h)| s / h as f64).collect();

    let agree = |a: f64, b: f64| {
        let scale = a.abs().max(b.abs());
        scale == 0.0 || (a - b).abs() < tol * scale
    };
    let mut first = None;
    for i in (0..count - 1).rev() {
        if agree(means[i], means[i + 1]) {
            first = Some(i);
        } else {
            break;
        }
    }
    Ok(first.map(|i| {
        let later = &means[i + 1..];
        let level = later.iter().sum::<f64>() / later.len() as f64;
        (t0 + (i + 1) as f64 * width, level)
    }))
}

/// Log-linear fit over the last third of the positive samples.
pub fn growth_fit(times: &[f64], values: &[f64]) -> Result<LinearFit> {
    let start = times.len() - times.len() / 3;
    let (x, y): (Vec<f64>, Vec<f64>) = times[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::InsufficientData(
            "fewer than 3 positive samples for a growth fit".into(),
        ));
    }
    linear_fit(&x, &y)
}

fn outflux_fit(times: &[f64], n_out_cum: &[f64], t_s: f64) -> Result<LinearFit> {
    let start = times.partition_point(|&t| t < t_s);
    linear_fit(&times[start..], &n_out_cum[start..])
}

/// Slope of the cumulative outflux after the stationary time, photons/s.
pub fn measure_outflux_slope(result: &SimulationResult) -> Result<LinearFit> {
    match result.verdict {
        Verdict::Stationary { t_s, .. } => outflux_fit(&result.times, &result.n_out_cum, t_s),
        other => Err(Error::Domain(format!(
            "outflux slope needs a stationary verdict, got {}",
            other.name()
        ))),
    }
}

fn classify(times: &[f64], n_intra: &[f64], n_out_cum: &[f64], spec: &RunSpec) -> Verdict {
    let gamma = spec.derived.gamma;
    if let Ok(Some((t_s, level))) = detect_stationary(
        times,
        n_intra,
        spec.stationarity_tol,
        spec.stationarity_window,
        gamma,
    ) {
        if let Ok(fit) = outflux_fit(times, n_out_cum, t_s) {
            return Verdict::Stationary {
                t_s,
                level,
                outflux_rate: fit.slope,
            };
        }
    }
    match growth_fit(times, n_intra) {
        Ok(fit) if fit.slope > 0.0 && fit.r2 >= GROWTH_R2 => Verdict::Growing {
            log_slope: fit.slope,
            r2: fit.r2,
        },
        _ => Verdict::Inconclusive,
    }
}

/// Evolves the vacuum for `max_round_trips` round trips.
pub fn run(spec: &RunSpec) -> Result<SimulationResult> {
    spec.validate()?;
    let round_trip = round_trip_channel(&spec.derived, &spec.basis, spec.sidebands)?;
    let channel = round_trip.channel();
    let dt = spec.derived.round_trip_time();
    let modes = spec.basis.count();
    let dim = 2 * modes;

    let mut state = GaussianState::vacuum(modes);
    let mut scratch = DMatrix::zeros(dim, dim);
    let capacity = (spec.max_round_trips / spec.record_every + 2) as usize;
    let mut times = Vec::with_capacity(capacity);
    let mut n_intra = Vec::with_capacity(capacity);
    let mut n_out_cum = Vec::with_capacity(capacity);
    times.push(0.0);
    n_intra.push(0.0);
    n_out_cum.push(0.0);

    let mut emitted = 0.0;
    let mut stopped_early = false;
    let mut steps = 0;
    for n in 1..=spec.max_round_trips {
        emitted += round_trip.outflux(state.covariance());
        channel.apply_into(state.covariance_mut(), &mut scratch);
        steps = n;
        let total = state.total_photons();
        if !total.is_finite() {
            return Err(Error::NumericalInstability {
                step: n,
                eigenvalue: f64::NAN,
            });
        }
        state.check_reduced_modes(n)?;
        let runaway = total > RUNAWAY_PHOTONS;
        if n % spec.record_every == 0 || n == spec.max_round_trips || runaway {
            state.check_physical(n)?;
            times.push(n as f64 * dt);
            n_intra.push(total.max(0.0));
            n_out_cum.push(emitted);
        }
        if runaway {
            stopped_early = true;
            break;
        }
    }

    let verdict = classify(&times, &n_intra, &n_out_cum, spec);
    Ok(SimulationResult {
        times,
        n_intra,
        n_out_cum,
        spectrum: photon_numbers(&state),
        verdict,
        round_trips: steps,
        stopped_early,
        gamma: spec.derived.gamma,
    })
}

/// Scalar digest of a run, one row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub verdict: String,
    pub t_s: Option<f64>,
    pub level: Option<f64>,
    pub outflux_rate: Option<f64>,
    pub log_slope: Option<f64>,
    pub final_n_intra: f64,
    pub final_n_out: f64,
    pub round_trips: u64,
    pub stopped_early: bool,
}

impl SimulationResult {
    pub fn summary(&self) -> RunSummary {
        let (t_s, level, outflux_rate, log_slope) = match self.verdict {
            Verdict::Stationary {
                t_s,
                level,
                outflux_rate,
            } => (Some(t_s), Some(level), Some(outflux_rate), None),
            Verdict::Growing { log_slope, .. } => (None, None, None, Some(log_slope)),
            Verdict::Inconclusive => (None, None, None, None),
        };
        RunSummary {
            verdict: self.verdict.name().to_string(),
            t_s,
            level,
            outflux_rate,
            log_slope,
            final_n_intra: *self.n_intra.last().unwrap_or(&0.0),
            final_n_out: *self.n_out_cum.last().unwrap_or(&0.0),
            round_trips: self.round_trips,
            stopped_early: self.stopped_early,
        }
    }
}

/// Runs every spec on up to `workers` threads; results keep input order.
pub fn sweep(specs: &[RunSpec], workers: usize) -> Result<Vec<Result<SimulationResult>>> {
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| specs.par_iter().map(run).collect()))
}
