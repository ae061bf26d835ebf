use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use coolsim::config::{Mode, ScenarioConfig};
use coolsim::harness::{
    comparison_csv, comparison_svg, run_phantom_experiment, simulate_sensor_transient,
    transient_csv, SILICON_REFERENCES,
};
use coolsim::io::{read_to_string, write_atomic};
use coolsim::psychophys::{
    calibrate_observer, fit_psychometric, monte_carlo_jnd, parse_trials_csv, simulate_session,
    trials_csv, ResponseMap, ScheduleConfig,
};
use coolsim::thermo::celsius_to_kelvin;
use coolsim::{Error, Precision, Preset};

const DEFAULT_TARGET_JND: f64 = 1.2818;

#[derive(Parser)]
#[command(name = "coolsim", version, about = "Cold thermal display simulator")]
struct Cli {
    /// Scenario JSON; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the cooling model once.
    Model(ModelArgs),
    /// Simulate sensor transients at several velocities.
    Exp1(Exp1Args),
    /// Compare phantom model drops with the reference measurements.
    Exp2(Exp2Args),
    /// Simulate one constant-stimuli session.
    PsyRun(PsyRunArgs),
    /// Fit a psychometric function to a trial CSV.
    PsyFit(PsyFitArgs),
    /// Choose observer noise for a target JND.
    Calibrate(CalibrateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    C,
    K,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Exact,
    Published,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Exact => Precision::Exact,
            PrecisionArg::Published => Precision::Published,
        }
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        Ok(v) => Err(format!("{v} must be finite and >= 0")),
        Err(e) => Err(e.to_string()),
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match non_negative(s)? {
        v if v > 0.0 => Ok(v),
        v => Err(format!("{v} must be > 0")),
    }
}

fn preset_arg(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_parser = preset_arg)]
    preset: Option<Preset>,
    /// Flow velocity, m/s.
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    u: f64,
    /// Exposure, s.
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    t: f64,
    /// Initial body temperature.
    #[arg(long, allow_negative_numbers = true)]
    ts: Option<f64>,
    /// Cold air temperature.
    #[arg(long, allow_negative_numbers = true)]
    ta: Option<f64>,
    /// Unit of --ts/--ta.
    #[arg(long, value_enum, default_value = "k")]
    unit: Unit,
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
}

#[derive(Args)]
struct Exp1Args {
    #[arg(long, value_delimiter = ',', value_parser = non_negative)]
    velocities: Option<Vec<f64>>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Exp2Args {
    #[arg(long, value_parser = preset_arg)]
    preset: Option<Preset>,
    #[arg(long, value_delimiter = ',', value_parser = non_negative)]
    velocities: Option<Vec<f64>>,
    #[arg(long, value_parser = positive)]
    duration: Option<f64>,
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct PsyRunArgs {
    #[arg(long, env = "COOLSIM_SEED")]
    seed: Option<u64>,
    /// Observer JSON written by `calibrate`.
    #[arg(long)]
    observer: Option<PathBuf>,
    /// Calibrate a default observer to this JND when no observer is given.
    #[arg(long, value_parser = positive)]
    target_jnd: Option<f64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsyFitArgs {
    /// Trial CSV.
    #[arg(long)]
    trials: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, value_parser = positive)]
    target_jnd: Option<f64>,
    /// Re-simulate this many sessions and report the mean fitted JND.
    #[arg(long)]
    sessions: Option<usize>,
    #[arg(long, env = "COOLSIM_SEED")]
    seed: Option<u64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn emit(path: Option<&Path>, contents: &str) -> coolsim::Result<()> {
    match path {
        Some(p) => {
            write_atomic(p, contents)?;
            info!("wrote {}", p.display());
            Ok(())
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_kelvin(value: f64, unit: Unit) -> f64 {
    match unit {
        Unit::C => celsius_to_kelvin(value),
        Unit::K => value,
    }
}

fn cmd_model(cfg: &ScenarioConfig, args: &ModelArgs) -> coolsim::Result<()> {
    cfg.require_for(Mode::Model)?;
    let cfg = ScenarioConfig {
        preset: args.preset.or(cfg.preset),
        ..cfg.clone()
    };
    let mut setup = cfg.cooling_setup(Preset::Skin)?;
    if let Some(ts) = args.ts {
        setup = setup.with_body_temperature(to_kelvin(ts, args.unit));
    }
    if let Some(ta) = args.ta {
        setup = setup.with_air_temperature(to_kelvin(ta, args.unit));
    }
    setup.validate()?;
    let precision = args
        .precision
        .map(Precision::from)
        .or(cfg.precision)
        .unwrap_or(Precision::Exact);
    let formula = setup.formula(precision);
    let drop = formula.drop(args.u, args.t)?;
    let tf = formula.final_temperature(args.u, args.t)?;
    let name = cfg.preset.map_or("skin", Preset::name);
    println!("preset: {name}");
    println!(
        "precision: {}",
        serde_json::to_string(&precision)?.trim_matches('"')
    );
    println!("u: {} m/s", args.u);
    println!("t: {} s", args.t);
    println!(
        "k: {} 1/m (used {})",
        setup.coefficient().value(),
        formula.k
    );
    println!("delta_T_s: {drop} K ({:.2} K)", drop);
    println!("T_f: {tf} K ({:.2} K)", tf);
    Ok(())
}

fn cmd_exp1(cfg: &ScenarioConfig, args: &Exp1Args) -> coolsim::Result<()> {
    cfg.require_for(Mode::Exp1)?;
    let mut scenario = cfg.sensor.clone().unwrap_or_default();
    if let Some(v) = args.velocities.clone().or_else(|| cfg.velocities.clone()) {
        scenario.velocities = v;
    }
    if let Some(cold) = cfg.vortex_cold_temperature()? {
        scenario.cold_temperature = cold;
    }
    let series = simulate_sensor_transient(&scenario)?;
    emit(
        args.out.as_deref().or(cfg.output.as_deref()),
        &transient_csv(&series),
    )
}

fn cmd_exp2(cfg: &ScenarioConfig, args: &Exp2Args) -> coolsim::Result<()> {
    cfg.require_for(Mode::Exp2)?;
    let cfg = ScenarioConfig {
        preset: args.preset.or(cfg.preset),
        ..cfg.clone()
    };
    let setup = cfg.cooling_setup(Preset::Silicon)?;
    let velocities = args
        .velocities
        .clone()
        .or_else(|| cfg.velocities.clone())
        .unwrap_or_else(|| SILICON_REFERENCES.iter().map(|r| r.velocity).collect());
    let duration = args.duration.or(cfg.duration).unwrap_or(3.0);
    let precision = args
        .precision
        .map(Precision::from)
        .or(cfg.precision)
        .unwrap_or(Precision::Published);
    let report = run_phantom_experiment(
        &setup,
        &velocities,
        duration,
        precision,
        &SILICON_REFERENCES,
        &cfg.valve_calibration()?,
    )?;
    let csv = comparison_csv(&report);
    // render everything before touching the filesystem
    let svg = args
        .svg
        .as_deref()
        .or(cfg.svg.as_deref())
        .map(|p| (p, comparison_svg(&report)));
    emit(args.out.as_deref().or(cfg.output.as_deref()), &csv)?;
    if let Some((path, svg)) = svg {
        write_atomic(path, &svg)?;
    }
    Ok(())
}

fn schedule_config(cfg: &ScenarioConfig, seed: Option<u64>) -> ScheduleConfig {
    let mut schedule = cfg.schedule.clone().unwrap_or_default();
    schedule.rng_seed = seed.or(cfg.seed).unwrap_or(schedule.rng_seed);
    schedule
}

fn cmd_psy_run(cfg: &ScenarioConfig, args: &PsyRunArgs) -> coolsim::Result<()> {
    cfg.require_for(Mode::PsyRun)?;
    let schedule = schedule_config(cfg, args.seed);
    let observer = match (&args.observer, &cfg.observer) {
        (Some(path), _) => serde_json::from_str(&read_to_string(path)?)?,
        (None, Some(o)) if args.target_jnd.is_none() => o.clone(),
        _ => calibrate_observer(
            args.target_jnd
                .or(cfg.target_jnd)
                .unwrap_or(DEFAULT_TARGET_JND),
            ResponseMap::default(),
            schedule.standard,
        )?,
    };
    let records = simulate_session(&schedule, &observer, &cfg.valve_calibration()?)?;
    emit(
        args.out.as_deref().or(cfg.output.as_deref()),
        &trials_csv(&records),
    )
}

fn cmd_psy_fit(cfg: &ScenarioConfig, args: &PsyFitArgs) -> coolsim::Result<()> {
    let cfg = ScenarioConfig {
        trials: args.trials.clone().or_else(|| cfg.trials.clone()),
        ..cfg.clone()
    };
    cfg.require_for(Mode::PsyFit)?;
    let path = cfg.trials.as_deref().expect("checked above");
    let records = parse_trials_csv(&read_to_string(path)?, path)?;
    let fit = fit_psychometric(&records)?;
    emit(
        args.out.as_deref().or(cfg.output.as_deref()),
        &(fit.to_json() + "\n"),
    )
}

fn cmd_calibrate(cfg: &ScenarioConfig, args: &CalibrateArgs) -> coolsim::Result<()> {
    let cfg = ScenarioConfig {
        target_jnd: args.target_jnd.or(cfg.target_jnd),
        ..cfg.clone()
    };
    cfg.require_for(Mode::Calibrate)?;
    let schedule = schedule_config(&cfg, args.seed);
    let target = cfg.target_jnd.expect("checked above");
    let map = cfg
        .observer
        .as_ref()
        .map(|o| o.response_map)
        .unwrap_or_default();
    let observer = calibrate_observer(target, map, schedule.standard)?;
    let mut out = serde_json::to_value(&observer)?;
    if let Some(n) = args.sessions.or(cfg.sessions).filter(|&n| n > 0) {
        let summary = monte_carlo_jnd(
            &schedule,
            &observer,
            &cfg.valve_calibration()?,
            n,
            schedule.rng_seed,
        )?;
        eprintln!(
            "{} sessions: mean JND {:.4} m/s, SD {:.4} m/s, {} degenerate",
            n, summary.mean_jnd, summary.sd_jnd, summary.degenerate
        );
        out["monte_carlo"] = serde_json::to_value(&summary)?;
    }
    emit(
        args.out.as_deref().or(cfg.output.as_deref()),
        &(serde_json::to_string_pretty(&out)? + "\n"),
    )
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::DegenerateData(_) | Error::NonConvergence(_) => 3,
        Error::InvalidParameter { .. }
        | Error::UnknownPreset(_)
        | Error::InvalidScenario(_)
        | Error::InvalidCalibration(_)
        | Error::VelocityOutOfRange { .. }
        | Error::PressureOutOfBand { .. }
        | Error::Unreachable(_) => 2,
        Error::MalformedRow { .. } | Error::Io { .. } | Error::Json(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(ScenarioConfig::default()), ScenarioConfig::load)
        .and_then(|cfg| match &cli.command {
            Command::Model(a) => cmd_model(&cfg, a),
            Command::Exp1(a) => cmd_exp1(&cfg, a),
            Command::Exp2(a) => cmd_exp2(&cfg, a),
            Command::PsyRun(a) => cmd_psy_run(&cfg, a),
            Command::PsyFit(a) => cmd_psy_fit(&cfg, a),
            Command::Calibrate(a) => cmd_calibrate(&cfg, a),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
