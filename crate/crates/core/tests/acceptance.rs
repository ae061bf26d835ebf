//! Exit criteria for the toolkit. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coolsim::device::ValveCalibration;
use coolsim::harness::{
    default_phantom_report, simulate_sensor_transient, SensorTransientScenario, SENSOR_VELOCITIES,
};
use coolsim::psychophys::{
    calibrate_observer, fit_levels, monte_carlo_jnd, LevelCount, ResponseMap, ScheduleConfig,
    QUARTILE_Z,
};
use coolsim::thermo::{
    body_mass, equilibrium_temperature, heat_absorbed, temperature_drop, AirState, BodyPatch,
    CoolingCoefficient, NozzleGeometry,
};
use coolsim::{Precision, Preset};

const COMPARISON_LEVELS: [f64; 7] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn ac1_coefficients() -> Outcome {
    // quotients written out from the raw material constants, kJ and mm as printed
    let silicon_hand = (1.005 * 1.37 * 19.64 * 1e-6) / (1.6 * 970.0 * 1600.0 * 1e-6 * 2.0 * 1e-3);
    let skin_hand = (1.005 * 1.37 * 19.64 * 1e-6) / (10.514 * 1200.0 * 1600.0 * 1e-6 * 0.2 * 1e-3);
    let ks = Preset::Silicon.setup().coefficient();
    let kk = Preset::Skin.setup().coefficient();
    let ok = ks.rounded(3).value() == 0.005
        && kk.rounded(3).value() == 0.007
        && rel(ks.value(), silicon_hand) < 1e-9
        && rel(kk.value(), skin_hand) < 1e-9;
    check(
        ok,
        format!(
            "k_silicon={:.6e} (hand {silicon_hand:.6e}, rounds {}), k_skin={:.6e} (hand {skin_hand:.6e}, rounds {})",
            ks.value(),
            ks.rounded(3).value(),
            kk.value(),
            kk.rounded(3).value()
        ),
    )
}

fn ac2_skin_prediction() -> Outcome {
    let skin = Preset::Skin.setup();
    let published = skin
        .drop(3.0, 3.0, Precision::Published)
        .map_err(|e| e.to_string())?;
    let exact = skin
        .drop(3.0, 3.0, Precision::Exact)
        .map_err(|e| e.to_string())?;
    check(
        (published - 2.88).abs() <= 0.01,
        format!("dT_skin(u=3,t=3) = {published:.4} K with published coefficients (full precision {exact:.4} K)"),
    )
}

fn ac3_phantom_report() -> Outcome {
    let report = default_phantom_report(Precision::Published);
    let rows = &report.rows;
    let measured: Vec<Option<f64>> = rows.iter().map(|r| r.measured).collect();
    let mut ok = measured == [Some(0.41), Some(0.79), Some(1.15)]
        && rows.iter().map(|r| r.velocity).eq([1.0, 2.0, 3.0]);
    ok &= rows
        .iter()
        .all(|r| r.theoretical >= r.measured.unwrap_or(f64::INFINITY));
    ok &= rows
        .windows(2)
        .all(|w| w[1].abs_error.unwrap() > w[0].abs_error.unwrap());
    let exact = default_phantom_report(Precision::Exact);
    ok &= exact
        .rows
        .windows(2)
        .all(|w| w[1].abs_error.unwrap() > w[0].abs_error.unwrap());
    let summary: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{}:{:.3}/{:.2}/{:.3}",
                r.velocity,
                r.theoretical,
                r.measured.unwrap_or(f64::NAN),
                r.abs_error.unwrap_or(f64::NAN)
            )
        })
        .collect();
    check(
        ok,
        format!("u:theory/measured/error = {}", summary.join(" ")),
    )
}

fn ac4_properties() -> Outcome {
    const DRAWS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();
    for i in 0..DRAWS {
        let air = AirState {
            specific_heat: rng.random_range(500.0..2000.0),
            density: rng.random_range(0.5..2.0),
            temperature: rng.random_range(230.0..280.0),
        };
        let nozzle = NozzleGeometry {
            outlet_area: rng.random_range(1e-6..1e-4),
            standoff: 5e-3,
        };
        let body = BodyPatch {
            specific_heat: rng.random_range(1e3..2e4),
            density: rng.random_range(500.0..2000.0),
            area: rng.random_range(1e-4..1e-2),
            thickness: rng.random_range(1e-4..5e-3),
            temperature: rng.random_range(285.0..315.0),
        };
        let k = coolsim::thermo::cooling_coefficient(&air, &nozzle, &body);
        let (ts, ta) = (body.temperature, air.temperature);
        let u = rng.random_range(0.01..4.0);
        let t = rng.random_range(0.01..10.0);
        let du = rng.random_range(0.01..1.0);
        let drop = |u: f64, t: f64| temperature_drop(k, u, t, ts, ta).unwrap();

        if !(drop(u + du, t) > drop(u, t) && drop(u, t + du) > drop(u, t)) {
            failures.push(format!("#{i} monotonicity"));
        }
        if rel(drop(u, t), drop(t, u)) > 1e-12 {
            failures.push(format!("#{i} u*t symmetry"));
        }
        let tf = equilibrium_temperature(k, u, t, ts, ta).unwrap();
        if ((drop(u, t) + tf) - ts).abs() > 1e-12 * ts {
            failures.push(format!("#{i} T_s identity"));
        }
        let q = heat_absorbed(u, &nozzle, &air, t, tf).unwrap();
        let loss = body.specific_heat * body_mass(&body) * drop(u, t);
        if rel(q, loss) > 1e-9 {
            failures.push(format!("#{i} energy {q} vs {loss}"));
        }
        let d = drop(u, t);
        let far = drop(u, 1e12 / (k.value() * u));
        if !(d >= 0.0 && d < ts - ta && (far - (ts - ta)).abs() < 1e-9 * (ts - ta)) {
            failures.push(format!("#{i} bounds/asymptote"));
        }
    }
    // swapped u and t at the spec's sample point
    let k = CoolingCoefficient::new(0.0067).unwrap();
    let a = temperature_drop(k, 2.0, 3.0, 306.15, 257.15).unwrap();
    let b = temperature_drop(k, 3.0, 2.0, 306.15, 257.15).unwrap();
    if a != b {
        failures.push("(2,3) vs (3,2)".into());
    }
    check(
        failures.is_empty(),
        format!(
            "{DRAWS} draws x 5 properties, {} failures {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn ac5_fit_recovery() -> Outcome {
    const TRIALS: u64 = 10_000;
    const REPLICATES: u64 = 5;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for rep in 0..REPLICATES {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + rep);
        let levels: Vec<LevelCount> = COMPARISON_LEVELS
            .iter()
            .map(|&v| {
                let p = coolsim::psychophys::normal::cdf(v - 2.0);
                let k = (0..TRIALS).filter(|_| rng.random_bool(p)).count() as u64;
                LevelCount { v, n: TRIALS, k }
            })
            .collect();
        let fit = fit_levels(&levels).map_err(|e| e.to_string())?;
        worst.0 = worst.0.max((fit.mu - 2.0).abs());
        worst.1 = worst.1.max((fit.sigma - 1.0).abs());
        worst.2 = worst.2.max((fit.jnd - QUARTILE_Z * fit.sigma).abs());
    }
    check(
        worst.0 < 0.02 && worst.1 < 0.02 && worst.2 < 1e-9,
        format!(
            "{REPLICATES} datasets of {TRIALS}/level: max |mu-2|={:.4}, max |sigma-1|={:.4}, max |jnd-z*sigma|={:.1e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn ac6_jnd_level() -> Outcome {
    const TARGET: f64 = 1.2818;
    const BAND: f64 = 0.15;
    let observer =
        calibrate_observer(TARGET, ResponseMap::default(), 2.0).map_err(|e| e.to_string())?;
    let summary = monte_carlo_jnd(
        &ScheduleConfig::default(),
        &observer,
        &ValveCalibration::default(),
        1000,
        1,
    )
    .map_err(|e| e.to_string())?;
    check(
        (summary.mean_jnd - TARGET).abs() <= BAND,
        format!(
            "noise_sd={:.4}; {} sessions ({} degenerate): mean JND {:.4} m/s, SD {:.4} (target {TARGET} +/- {BAND})",
            observer.noise_sd, summary.sessions, summary.degenerate, summary.mean_jnd, summary.sd_jnd
        ),
    )
}

fn ac7_sensor_ordering() -> Outcome {
    let scenario = SensorTransientScenario::default();
    let series = simulate_sensor_transient(&scenario).map_err(|e| e.to_string())?;
    let velocities: Vec<f64> = series.iter().map(|s| s.velocity).collect();
    let mut ok = velocities == SENSOR_VELOCITIES;
    let mut comparisons = 0;
    for pair in series.windows(2) {
        for (slow, fast) in pair[0].samples.iter().zip(&pair[1].samples) {
            comparisons += 1;
            ok &= slow.0 == fast.0 && (fast.1 < slow.1 || slow.0 == 0.0);
        }
    }
    check(
        ok,
        format!(
            "{} series, {comparisons} pointwise comparisons; T(3 s) from {:.2} K (0 m/s) to {:.2} K (3.5 m/s)",
            series.len(),
            series[0].final_temperature(),
            series.last().unwrap().final_temperature()
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_coolsim"))
        .args(args)
        .env_remove("COOLSIM_SEED")
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("`coolsim {}` exited with {status}", args.join(" ")))
    }
}

fn ac8_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name);
    let s = |path: &Path| path.to_str().unwrap().to_string();
    let mut identical = Vec::new();
    for (cmd, extra) in [("exp2", vec![]), ("psy-run", vec!["--seed", "42"])] {
        let (a, b) = (p(&format!("{cmd}-a")), p(&format!("{cmd}-b")));
        for out in [&a, &b] {
            let mut args = vec![cmd.to_string(), "--out".into(), s(out)];
            args.extend(extra.iter().map(|x| x.to_string()));
            run_cli(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
        }
        let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        identical.push((cmd, x == y && !x.is_empty(), x.len()));
    }
    check(
        identical.iter().all(|r| r.1),
        identical
            .iter()
            .map(|(c, same, n)| {
                format!(
                    "{c}: {} ({n} bytes)",
                    if *same { "identical" } else { "DIFFERENT" }
                )
            })
            .collect::<Vec<_>>()
            .join(", "),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1 coefficient reproduction", ac1_coefficients),
        ("AC2 skin prediction 2.88 K", ac2_skin_prediction),
        ("AC3 phantom comparison report", ac3_phantom_report),
        ("AC4 cooling model property suite", ac4_properties),
        ("AC5 psychometric fit recovery", ac5_fit_recovery),
        ("AC6 calibrated observer JND level", ac6_jnd_level),
        ("AC7 sensor transient ordering", ac7_sensor_ordering),
        ("AC8 CLI determinism", ac8_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.2}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.2}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
