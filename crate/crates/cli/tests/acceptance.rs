//! Acceptance criteria A1–A9. Prints one line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use casimir_cli::commands::{derive_report, sweep_table};
use casimir_cli::config::parse_config;
use casimir_cli::grid::Grid;
use casimir_core::analytic::{
    n_intra_scattering, n_out_rate_scattering, stationary_peak, stationary_peak_from_beta,
};
use casimir_core::engine::{measure_outflux_slope, run, RunSpec, Verdict};
use casimir_core::modes::{
    drive_generator, round_trip_channel, ModeBasis, Sidebands, SYMPLECTIC_TOL,
};
use casimir_core::units::DerivedParams;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn params(beta_rel: f64, finesse: f64, m: u32) -> DerivedParams {
    let beta = beta_rel * PI / (2.0 * finesse);
    DerivedParams::from_dimensionless(beta, finesse, m, 0.0, 0.0, 1e-6).expect("valid parameters")
}

fn round_trips(multiple_of_f_over_pi: f64, finesse: f64) -> u64 {
    (multiple_of_f_over_pi * finesse / PI).ceil() as u64
}

const OPTICAL: &str = r#"{
    "pump": {"power_watts": 1.0, "frequency_hz": 3e14, "area_m2": 1e-10},
    "crystal": {"length_m": 1e-7, "index_signal": 1.0, "index_pump": 1.0, "chi2_m_per_v": 1e-11},
    "cavity": {"finesse": 1e4, "harmonic": 1},
    "drive": {"kind": "optical"}
}"#;

fn a1() -> Outcome {
    let report = derive_report(&parse_config(OPTICAL).unwrap()).unwrap();
    let kappa_ok = within(report.kappa, 0.5e-5, 5e-5);
    let beta_ok = within(report.beta, 1e-6 / 5.0, 1e-6 * 5.0);
    Outcome {
        pass: kappa_ok && beta_ok,
        detail: format!(
            "kappa={:.4e} in [5e-6,5e-5]: {kappa_ok}; beta_opt={:.4e} within x5 of 1e-6: {beta_ok}",
            report.kappa, report.beta
        ),
    }
}

fn a2() -> Outcome {
    let optical = n_out_rate_scattering(1e-6, 1e4, 2.0 * PI * 3e14).unwrap();
    let mechanical = n_out_rate_scattering(1e-9, 1e4, 2.0 * PI * 5e8).unwrap();
    let o = within(optical, 3e4, 3e5);
    let m = within(mechanical, 3e-7, 3e-6);
    Outcome {
        pass: o && m,
        detail: format!("optical rate={optical:.4e}/s in [3e4,3e5]: {o}; mechanical rate={mechanical:.4e}/s in [3e-7,3e-6]: {m}"),
    }
}

fn a3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst_threshold: f64 = 0.0;
    let mut worst_balance: f64 = 0.0;
    for _ in 0..100 {
        let finesse = 10f64.powf(rng.random_range(0.5..6.0));
        let m = rng.random_range(1..=5u32);
        let length = 10f64.powf(rng.random_range(-7.0..1.0));
        let d = DerivedParams::from_dimensionless(0.0, finesse, m, 0.0, 0.0, length).unwrap();
        let at_threshold = d.with_beta(d.threshold);
        worst_threshold = worst_threshold.max(rel(2.0 * at_threshold.nu0, d.gamma));

        let beta = rng.random_range(0.0..0.999) * d.threshold;
        let n = n_intra_scattering(beta, finesse, m).unwrap();
        let rate = n_out_rate_scattering(beta, finesse, d.omega).unwrap();
        if rate > 0.0 {
            worst_balance = worst_balance.max(rel(d.gamma * n, rate));
        }
    }
    Outcome {
        pass: worst_threshold <= 1e-12 && worst_balance <= 1e-12,
        detail: format!("max |2nu0(thr)/gamma-1|={worst_threshold:.2e}; max |gamma*N/rate-1|={worst_balance:.2e} (100 sets; tol 1e-12)"),
    }
}

/// Maximiser of `(ν₀t)² e^{−γt}`: golden section to bracket, then bisection
/// on the sign of the derivative `t e^{−γt}(2 − γt)`.
fn numeric_peak(nu0: f64, gamma: f64) -> (f64, f64) {
    let f = |t: f64| (nu0 * t).powi(2) * (-gamma * t).exp();
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 20.0 / gamma);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let slope = |t: f64| t * (-gamma * t).exp() * (2.0 - gamma * t);
    let (mut lo, mut hi) = (a * 0.5, b * 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, f(t))
}

fn a4() -> Outcome {
    let (beta, finesse) = (1e-6, 1e4);
    let tau = 1e-9;
    let (nu0, gamma) = (beta / tau, PI / (finesse * tau));
    let (t_closed, n_closed) = stationary_peak(nu0, gamma).unwrap();
    let (t_num, n_num) = numeric_peak(nu0, gamma);
    let peak_ok = rel(t_num, t_closed) <= 1e-9 && rel(n_num, n_closed) <= 1e-9;
    // e^{-2}(βF/π)² evaluated independently.
    let frozen = 1.371_233_108_610_463_6e-6;
    let value = stationary_peak_from_beta(beta, finesse).unwrap();
    let value_ok = rel(value, frozen) <= 1e-6 && format!("{value:.3e}") == "1.371e-6";
    Outcome {
        pass: peak_ok && value_ok,
        detail: format!(
            "gamma t*={:.12}; rel err t {:.1e}, N {:.1e} (tol 1e-9); e^-2(beta F/pi)^2={value:.6e} vs 1.371e-6 (1e-6 rel): {value_ok}",
            t_num * gamma,
            rel(t_num, t_closed),
            rel(n_num, n_closed)
        ),
    }
}

fn a5() -> Outcome {
    let finesse = 100.0;
    let d = params(0.1, finesse, 1);
    let spec = RunSpec::new(d)
        .unwrap()
        .with_modes(14)
        .unwrap()
        .with_round_trips(round_trips(40.0, finesse));
    let result = run(&spec).unwrap();
    let Verdict::Stationary {
        level,
        outflux_rate,
        ..
    } = result.verdict
    else {
        return Outcome {
            pass: false,
            detail: format!("verdict {} (expected stationary)", result.verdict.name()),
        };
    };
    let slope = measure_outflux_slope(&result).unwrap().slope;
    let eq_level = n_intra_scattering(d.beta, finesse, 1).unwrap();
    let eq_rate = n_out_rate_scattering(d.beta, finesse, d.omega).unwrap();
    let level_ok = rel(level, eq_level) <= 0.3;
    let rate_ok = rel(slope, eq_rate) <= 0.3;
    let balance_ok = rel(slope, d.gamma * level) <= 0.1;
    debug_assert_eq!(slope, outflux_rate);
    Outcome {
        pass: level_ok && rate_ok && balance_ok,
        detail: format!(
            "stationary; N/N_scat={:.4} (±30%: {level_ok}); slope/rate_scat={:.4} (±30%: {rate_ok}); slope/(gamma N)={:.4} (±10%: {balance_ok})",
            level / eq_level,
            slope / eq_rate,
            slope / (d.gamma * level)
        ),
    }
}

fn a6() -> Outcome {
    let finesse = 100.0;
    let above = params(2.0, finesse, 1);
    let spec = RunSpec::new(above)
        .unwrap()
        .with_modes(14)
        .unwrap()
        .with_round_trips(round_trips(20.0, finesse));
    let r = run(&spec).unwrap();
    let expected = 2.0 * above.nu0 - above.gamma;
    let (grow_ok, slope_detail) = match r.verdict {
        Verdict::Growing { log_slope, .. } => (
            rel(log_slope, expected) <= 0.3,
            format!("log_slope/(2nu0-gamma)={:.4}", log_slope / expected),
        ),
        v => (false, format!("verdict {}", v.name())),
    };
    let below = params(0.5, finesse, 1);
    let spec = RunSpec::new(below)
        .unwrap()
        .with_modes(14)
        .unwrap()
        .with_round_trips(round_trips(40.0, finesse));
    let r = run(&spec).unwrap();
    let below_ok = matches!(r.verdict, Verdict::Stationary { .. });
    Outcome {
        pass: grow_ok && below_ok,
        detail: format!(
            "2 thr: growing, {slope_detail} (±30%: {grow_ok}); 0.5 thr: {} ({below_ok})",
            r.verdict.name()
        ),
    }
}

fn a7() -> Outcome {
    let finesse = 1e4;
    let d = params(0.05, finesse, 1);
    let horizon = 0.1 / d.gamma;
    let mut spec = RunSpec::new(d)
        .unwrap()
        .with_round_trips((horizon / d.round_trip_time()).floor() as u64);
    spec.record_every = 1;
    let r = run(&spec).unwrap();
    let mut worst: (f64, f64) = (0.0, 0.0);
    let mut samples = 0;
    for (&t, &n) in r.times.iter().zip(&r.n_intra).skip(1) {
        if d.nu0 * t <= 0.05 && d.gamma * t <= 0.1 {
            samples += 1;
            let e = rel(n, (d.nu0 * t).powi(2));
            if e > worst.0 {
                worst = (e, d.gamma * t);
            }
        }
    }
    Outcome {
        pass: samples > 0 && worst.0 <= 0.05,
        detail: format!(
            "{samples} samples; max |N/(nu0 t)^2-1|={:.4} at gamma t={:.4} (tol 0.05)",
            worst.0, worst.1
        ),
    }
}

fn a8() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut worst_defect: f64 = 0.0;
    for side in [Sidebands::Pairs, Sidebands::Full] {
        for m in 1..=3u32 {
            for &beta in &[1e-4, 1e-2, 0.1] {
                let basis = ModeBasis::new(ModeBasis::default_count(m), m, 0.0, 1e-6).unwrap();
                worst_defect =
                    worst_defect.max(drive_generator(beta, 0.7, &basis, side).unwrap().defect());
            }
        }
    }
    let ok = worst_defect <= SYMPLECTIC_TOL;
    pass &= ok;
    notes.push(format!("symplectic defect {worst_defect:.1e}: {ok}"));

    let mut cp_ok = true;
    for side in [Sidebands::Pairs, Sidebands::Full] {
        for m in 1..=3u32 {
            let d = params(0.9, 50.0, m);
            let basis = ModeBasis::for_params(&d, None).unwrap();
            cp_ok &= round_trip_channel(&d, &basis, side)
                .and_then(|rt| rt.channel().validate())
                .is_ok();
        }
    }
    pass &= cp_ok;
    notes.push(format!("complete positivity: {cp_ok}"));

    let d = params(0.5, 100.0, 1);
    let mut spec = RunSpec::new(d).unwrap().with_round_trips(1_000_000);
    spec.record_every = 100;
    let long = run(&spec);
    let ok = long
        .as_ref()
        .map(|r| r.round_trips == 1_000_000)
        .unwrap_or(false);
    pass &= ok;
    notes.push(format!("physical over 1e6 steps: {ok}"));

    let zero = run(&RunSpec::new(params(0.0, 100.0, 2)).unwrap()).unwrap();
    let ok = zero
        .n_intra
        .iter()
        .chain(&zero.n_out_cum)
        .chain(&zero.spectrum)
        .all(|&n| n == 0.0);
    pass &= ok;
    notes.push(format!("beta=0 => N=0: {ok}"));

    let mut worst_pair: f64 = 0.0;
    for m in 2..=3u32 {
        let r = run(&RunSpec::new(params(0.4, 50.0, m)).unwrap()).unwrap();
        for k in 1..(2 * m as usize) {
            worst_pair = worst_pair.max(rel(r.spectrum[k - 1], r.spectrum[2 * m as usize - k - 1]));
        }
    }
    let ok = worst_pair <= 1e-6;
    pass &= ok;
    notes.push(format!("pair symmetry {worst_pair:.1e}: {ok}"));

    let mut worst_trunc: f64 = 0.0;
    for m in 1..=2u32 {
        let d = params(0.3, 50.0, m);
        let k = ModeBasis::default_count(m);
        let level = |modes: usize| match run(&RunSpec::new(d).unwrap().with_modes(modes).unwrap())
            .unwrap()
            .verdict
        {
            Verdict::Stationary { level, .. } => level,
            _ => f64::NAN,
        };
        let e = rel(level(2 * k), level(k));
        worst_trunc = if e.is_nan() {
            f64::INFINITY
        } else {
            worst_trunc.max(e)
        };
    }
    let ok = worst_trunc < 0.01;
    pass &= ok;
    notes.push(format!(
        "truncation change on doubling K {worst_trunc:.1e}: {ok}"
    ));

    Outcome {
        pass,
        detail: notes.join("; "),
    }
}

fn a9() -> Outcome {
    let config = parse_config(
        r#"{"cavity": {"finesse": 100}, "drive": {"kind": "mechanical", "frequency_hz": 5e8, "beta_rel": 0.1}}"#,
    )
    .unwrap();
    let table = sweep_table(&config, &Grid::parse("m=1,2,3").unwrap(), 3).unwrap();
    let ratio = table.column("level_ratio_to_m1").unwrap();
    let consistent = table.column("m_scaling_consistent").unwrap();
    let reported = table.rows.len() == 3 && table.rows.iter().all(|r| !r[ratio].is_empty());
    let cells: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("{} ({})", r[ratio], r[consistent]))
        .collect();
    Outcome {
        pass: reported,
        detail: format!(
            "level ratios to m=1 [consistent with m within 30%]: {} (reported, not asserted)",
            cells.join(", ")
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("A1", a1, Duration::from_secs(1)),
        ("A2", a2, Duration::from_secs(1)),
        ("A3", a3, Duration::from_secs(1)),
        ("A4", a4, Duration::from_secs(1)),
        ("A5", a5, Duration::from_secs(60)),
        ("A6", a6, Duration::from_secs(120)),
        ("A7", a7, Duration::from_secs(10)),
        ("A8", a8, Duration::from_secs(300)),
        ("A9", a9, Duration::from_secs(300)),
    ];
    let mut failed = Vec::new();
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        println!(
            "{name} {} | {} | {:.2}s (budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        if !pass {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        std::process::exit(1);
    }
}
