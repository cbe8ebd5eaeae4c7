//! `gaitsynth` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::builder::{build_library, BuilderConfig};
use crate::error::{Error, Result};
use crate::gaitlib_io::{load_library, save_library};
use crate::plant::{read_log, run_scenario, write_log, PlantParams, Scenario};
use crate::stability::{analyze, epsilon_at_vertices, verify_log, AnalysisConfig, StabilityReport, VerifySlack};
use crate::synthesizer::Desired;

/// Exit code for a failed check (gain gate or constraint verification).
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gaitsynth",
    version,
    about = "Multi-period gait synthesis, walking simulation and stability analysis"
)]
pub struct Cli {
    /// Seed for the quasi-random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// `key=value` override applied after the input file is parsed.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a gait library from a builder config.
    BuildLibrary {
        #[arg(short = 'c', long = "config")]
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Run a closed-loop scenario and write the tick log.
    Simulate {
        #[arg(short = 'l', long = "library")]
        library: PathBuf,
        #[arg(short = 's', long = "scenario")]
        scenario: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Estimate the stability constants of a library.
    Analyze {
        #[arg(short = 'l', long = "library")]
        library: PathBuf,
        #[arg(long)]
        kx: f64,
        #[arg(long)]
        ky: f64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Check a tick log against a stability report.
    Verify {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(short = 'r', long = "report")]
        report: PathBuf,
    },
}

fn split_overrides(overrides: &[String]) -> Result<Vec<(String, String)>> {
    overrides
        .iter()
        .map(|o| {
            o.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::InvalidArgument(format!("override `{o}` is not key=value")))
        })
        .collect()
}

fn float_override(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("override {key}: invalid number `{value}`")))
}

fn count_override(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("override {key}: invalid count `{value}`")))
}

fn build(config: &Path, output: &Path, overrides: &[String]) -> Result<i32> {
    let cfg = BuilderConfig::load(config, overrides)?;
    let lib = build_library(&cfg)?;
    save_library(&lib, output)?;
    let eps = epsilon_at_vertices(&lib, &PlantParams::default());
    println!(
        "built {} gaits + standing ({} periods x {} vx x {} rvy x {} lvy) -> {}",
        lib.len(),
        lib.periods().len(),
        lib.vx_grid().len(),
        lib.rvy_grid().len(),
        lib.lvy_grid().len(),
        output.display()
    );
    println!(
        "periodicity check: max |P_map - label| = {:.3e} (x), {:.3e} (y) m/s over {} gaits, {} failed",
        eps.eps_x, eps.eps_y, eps.samples, eps.excluded
    );
    Ok(0)
}

fn simulate(library: &Path, scenario: &Path, output: Option<&Path>, overrides: &[String]) -> Result<i32> {
    let lib = load_library(library)?;
    let sc = Scenario::load(scenario, overrides)?;
    let out = run_scenario(&sc, &lib)?;
    let log_path = output.map(Path::to_path_buf).or_else(|| sc.log.clone());
    if let Some(p) = &log_path {
        write_log(&out.rows, p)?;
    }
    println!("step  t_impact  stance  T      vx-       vy-       vx+       vy+       sat trunc");
    for s in &out.steps {
        println!(
            "{:4}  {:8.3}  {}       {:.3}  {:+.5}  {:+.5}  {:+.5}  {:+.5}  {}   {}",
            s.index,
            s.time,
            s.stance.letter(),
            s.period,
            s.v[0],
            s.v[1],
            s.v[0],
            s.v[1],
            u8::from(s.saturated),
            u8::from(s.truncated)
        );
    }
    for t in &out.stops {
        println!("returned to standing at {t:.3} s");
    }
    if let Some(m) = &out.message {
        println!("{m}");
    }
    println!(
        "{:?}: {} ticks, {} steps{}",
        out.status,
        out.rows.len(),
        out.steps.len(),
        log_path.map_or_else(String::new, |p| format!(", log {}", p.display()))
    );
    Ok(out.status.code())
}

fn run_analyze(library: &Path, kx: f64, ky: f64, output: &Path, seed: u64, overrides: &[String]) -> Result<i32> {
    let lib = load_library(library)?;
    let mut cfg = AnalysisConfig {
        kx,
        ky,
        seed,
        library: Some(library.display().to_string()),
        ..AnalysisConfig::default()
    };
    for (k, v) in split_overrides(overrides)? {
        match k.as_str() {
            "eps_samples" => cfg.eps_samples = count_override(&k, &v)?,
            "delta_samples" => cfg.delta_samples = count_override(&k, &v)?,
            "lipschitz_pairs" => cfg.lipschitz_pairs = count_override(&k, &v)?,
            "probe" => cfg.probe = float_override(&k, &v)?,
            "vx_d" => cfg.vx_d = float_override(&k, &v)?,
            "b" => cfg.b = float_override(&k, &v)?,
            _ => return Err(Error::InvalidArgument(format!("unknown analyze override `{k}`"))),
        }
    }
    let report = analyze(&lib, &cfg)?;
    report.save(output)?;
    println!(
        "eps = ({:.3e}, {:.3e}) m/s, delta = ({:.4}, {:.4}), K = {:.4}",
        report.eps_x, report.eps_y, report.delta_x, report.delta_y, report.lipschitz
    );
    println!(
        "k1 = {:.4}, k2 = {:.4}, k3 = {:.4}, k4 = {:.4} (worst-case k1 {:.4}, k2 {:.4})",
        report.k1, report.k2, report.k3, report.k4, report.k1_worst, report.k2_worst
    );
    if report.gate {
        println!("gain gate: pass");
        Ok(0)
    } else {
        println!(
            "gain gate: FAIL; admissible kx in ({}, {}), ky in ({}, {})",
            report.interval_x.0, report.interval_x.1, report.interval_y.0, report.interval_y.1
        );
        Ok(EXIT_CHECK_FAILED)
    }
}

fn run_verify(input: &Path, report_path: &Path, overrides: &[String]) -> Result<i32> {
    let report = StabilityReport::load(report_path)?;
    let mut desired = Desired::new(0.0, 0.3, -0.3, 0);
    let mut library = report.library.clone().map(PathBuf::from);
    let mut slack = VerifySlack::default();
    for (k, v) in split_overrides(overrides)? {
        match k.as_str() {
            "vx_d" => desired.vx = float_override(&k, &v)?,
            "vy_r" => desired.vy_right = float_override(&k, &v)?,
            "vy_l" => desired.vy_left = float_override(&k, &v)?,
            "library" => library = Some(PathBuf::from(v)),
            "slack_v" => slack.velocity = float_override(&k, &v)?,
            "slack_p" => slack.position = float_override(&k, &v)?,
            _ => return Err(Error::InvalidArgument(format!("unknown verify override `{k}`"))),
        }
    }
    let library =
        library.ok_or_else(|| Error::InvalidArgument("report names no library; pass --set library=<path>".into()))?;
    let lib = load_library(&library)?;
    let rows = read_log(input)?;
    let result = verify_log(&rows, &report, &lib, &desired, slack)?;
    print!("{}", result.table());
    Ok(if result.passed() { 0 } else { EXIT_CHECK_FAILED })
}

/// Parses `args` and runs the subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::BuildLibrary { config, output } => build(config, output, &cli.overrides),
        Command::Simulate {
            library,
            scenario,
            output,
        } => simulate(library, scenario, output.as_deref(), &cli.overrides),
        Command::Analyze {
            library,
            kx,
            ky,
            output,
        } => run_analyze(library, *kx, *ky, output, cli.seed, &cli.overrides),
        Command::Verify { input, report } => run_verify(input, report, &cli.overrides),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
