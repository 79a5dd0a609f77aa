mod output;
mod run;
mod scenario;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use subchain::radiation::{dipole_axis_at, Vec3, EVANESCENCE_RESOLUTION};
use subchain::validate::{run_validation, Bound, ValidationOptions};
use subchain::{magic_angle, Axis, ChainConfig, Model, PlaneSpec};

use crate::output::{provenance, write_atomic};
use crate::run::{deviation_notes, run_intensity, run_scenario, spectrum_table};
use crate::scenario::{InitialState, IntensityTask, Loaded, ScenarioError, SpectrumTask, Task};

#[derive(Parser)]
#[command(name = "subchain", version, about = "Spectra, dynamics and radiated fields of atomic chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decay-rate and shift curves versus Bloch phase x, written as CSV
    Spectrum(SpectrumArgs),
    /// Run coupled-dipole scenarios from JSON files
    Dynamics(DynamicsArgs),
    /// Radiated intensity on a plane, written as CSV and PGM
    Intensity(IntensityArgs),
    /// Run the identity and oracle suites
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SpectrumArgs {
    /// Scenario file with spectrum tasks (instead of the chain flags)
    #[arg(long, conflicts_with_all = ["n", "a", "model", "grid_points", "out"])]
    scenario: Option<PathBuf>,
    /// Number of atoms
    #[arg(long, required_unless_present = "scenario")]
    n: Option<usize>,
    /// Lattice phase a = k0 d (radians)
    #[arg(long, required_unless_present = "scenario")]
    a: Option<f64>,
    /// Comma-separated models: scalar, vector:<angle>, vector:magic
    #[arg(long, value_delimiter = ',', default_value = "scalar")]
    model: Vec<String>,
    /// Read dipole angles in degrees
    #[arg(long)]
    degrees: bool,
    #[arg(long, default_value_t = subchain::spectrum::DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Output CSV (stdout if absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for scenario outputs
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Report the largest gap between the exact and sinc routes
    #[arg(long)]
    validate: bool,
}

#[derive(Args)]
struct DynamicsArgs {
    /// Scenario files; their scenarios run concurrently (SUBCHAIN_THREADS caps the pool)
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Only parse and validate the files
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct IntensityArgs {
    /// Scenario file with intensity tasks (instead of the chain flags)
    #[arg(long, conflicts_with_all = ["n", "a", "state", "normal", "offset", "u_range", "v_range", "resolution", "dipole_axis", "dipole_angle", "out_prefix"])]
    scenario: Option<PathBuf>,
    #[arg(long, required_unless_present = "scenario")]
    n: Option<usize>,
    /// Lattice phase a = k0 d (radians)
    #[arg(long, required_unless_present = "scenario")]
    a: Option<f64>,
    /// uniform, most-subradiant, timed-dicke, zero or single:<site>
    #[arg(long, default_value = "uniform")]
    state: String,
    /// Plane normal: x, y or z
    #[arg(long, default_value = "x")]
    normal: String,
    /// Plane position along its normal (units of d)
    #[arg(long, default_value_t = 5.0)]
    offset: f64,
    /// In-plane range lo,hi along the first axis (default: chain plus margins)
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    u_range: Option<Vec<f64>>,
    /// In-plane range lo,hi along the second axis (default: chain plus margins)
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    v_range: Option<Vec<f64>>,
    #[arg(long, default_value_t = EVANESCENCE_RESOLUTION)]
    resolution: usize,
    /// Dipole orientation x,y,z
    #[arg(long, value_delimiter = ',', num_args = 3, allow_negative_numbers = true, conflicts_with = "dipole_angle")]
    dipole_axis: Option<Vec<f64>>,
    /// Dipole angle to the chain axis, in the x-z plane
    #[arg(long)]
    dipole_angle: Option<f64>,
    #[arg(long)]
    degrees: bool,
    /// Output path without extension; .csv and .pgm are appended
    #[arg(long, default_value = "intensity")]
    out_prefix: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Reduced problem sizes
    #[arg(long)]
    quick: bool,
    /// Also write the report as JSON
    #[arg(long)]
    json: Option<PathBuf>,
    /// Flip the collective decay in the energy-balance run
    #[arg(long, hide = true)]
    inject_kernel_sign_error: bool,
}

/// Bad flag values, reported with exit code 2 like clap's own errors.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn to_radians(v: f64, degrees: bool) -> f64 {
    if degrees {
        v.to_radians()
    } else {
        v
    }
}

fn parse_model(spec: &str, degrees: bool) -> Result<Model> {
    let spec = spec.trim();
    if spec == "scalar" {
        return Ok(Model::Scalar);
    }
    let angle = spec
        .strip_prefix("vector:")
        .or_else(|| spec.strip_prefix("vectorial:"))
        .ok_or_else(|| usage(format!("unknown model '{spec}' (expected scalar or vector:<angle>)")))?;
    let delta = if angle == "magic" {
        magic_angle()
    } else {
        let v: f64 = angle.parse().map_err(|_| usage(format!("bad dipole angle '{angle}'")))?;
        to_radians(v, degrees)
    };
    Ok(Model::Vectorial { delta })
}

fn parse_state(spec: &str) -> Result<InitialState> {
    Ok(match spec {
        "uniform" => InitialState::Uniform,
        "most-subradiant" => InitialState::MostSubradiant,
        "timed-dicke" => InitialState::TimedDicke,
        "zero" => InitialState::Zero,
        _ => {
            let site = spec
                .strip_prefix("single:")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| usage(format!("unknown state '{spec}'")))?;
            InitialState::SingleExcited(site)
        }
    })
}

fn parse_axis(spec: &str) -> Result<Axis> {
    match spec {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        _ => Err(usage(format!("plane normal must be x, y or z, got '{spec}'"))),
    }
}

/// Scenario-file errors are input errors as well.
fn load(path: &Path) -> Result<Loaded> {
    scenario::load(path).map_err(|e: ScenarioError| usage(e.to_string()))
}

fn print_report(report: &run::Report) {
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    for n in &report.notes {
        println!("{n}");
    }
}

/// Run every scenario of `files` accepted by `keep`, concurrently.
/// With `check_only` the files are validated and nothing runs.
fn run_files(
    files: &[PathBuf],
    out_dir: &Path,
    kind: &str,
    keep: fn(Task<'_>) -> bool,
    check_only: bool,
) -> Result<()> {
    let loaded: Vec<Loaded> = files.iter().map(|p| load(p)).collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for l in &loaded {
        for s in &l.file.scenarios {
            if !keep(s.task().expect("checked at load time")) {
                return Err(usage(format!("{}: scenario '{}' is not a {kind} task", l.path.display(), s.name)));
            }
            jobs.push((l, s));
        }
    }
    if check_only {
        for (l, s) in &jobs {
            println!("ok {} {}", l.path.display(), s.name);
        }
        return Ok(());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SUBCHAIN_THREADS") {
        let n: usize = v.parse().map_err(|_| usage(format!("SUBCHAIN_THREADS='{v}' is not a count")))?;
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build()?;
    let results: Vec<Result<run::Report>> =
        pool.install(|| jobs.par_iter().map(|(l, s)| run_scenario(s, &l.base, out_dir)).collect());
    let mut failed = None;
    for ((_, s), r) in jobs.iter().zip(results) {
        match r {
            Ok(report) => {
                println!("[{}]", s.name);
                print_report(&report);
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                failed.get_or_insert(s.name.clone());
            }
        }
    }
    match failed {
        Some(name) => bail!("scenario '{name}' failed"),
        None => Ok(()),
    }
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<()> {
    if let Some(path) = &args.scenario {
        return run_files(std::slice::from_ref(path), &args.out_dir, "spectrum", |t| matches!(t, Task::Spectrum(_)), false);
    }
    let (n, a) = (args.n.expect("required by clap"), args.a.expect("required by clap"));
    let models = args.model.iter().map(|m| parse_model(m, args.degrees)).collect::<Result<Vec<_>>>()?;
    for m in &models {
        ChainConfig::new(n, a, *m).map_err(|e| usage(e.to_string()))?;
    }
    if args.grid_points < 2 {
        return Err(usage("--grid-points must be at least 2"));
    }
    let task = SpectrumTask { n_atoms: n, a, models, grid_points: args.grid_points };
    let (table, deviation) = spectrum_table(&task, provenance("spectrum", &task))?;
    match &args.out {
        Some(path) => {
            table.save(path)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock)?;
            lock.flush()?;
        }
    }
    if args.validate {
        for note in deviation_notes(&task.models, &deviation) {
            eprintln!("{note}");
        }
    }
    Ok(())
}

fn cmd_dynamics(args: DynamicsArgs) -> Result<()> {
    run_files(&args.scenarios, &args.out_dir, "dynamics", |t| matches!(t, Task::Dynamics(_)), args.check)
}

fn pair(v: &Option<Vec<f64>>, flag: &str) -> Result<Option<(f64, f64)>> {
    match v.as_deref() {
        None => Ok(None),
        Some([lo, hi]) => Ok(Some((*lo, *hi))),
        Some(_) => Err(usage(format!("--{flag} takes lo,hi"))),
    }
}

fn cmd_intensity(args: IntensityArgs) -> Result<()> {
    if let Some(path) = &args.scenario {
        return run_files(std::slice::from_ref(path), &args.out_dir, "intensity", |t| matches!(t, Task::Intensity(_)), false);
    }
    let (n, a) = (args.n.expect("required by clap"), args.a.expect("required by clap"));
    let chain = ChainConfig::scalar(n, a).map_err(|e| usage(e.to_string()))?;
    let dipole_axis: Vec3 = match (&args.dipole_axis, args.dipole_angle) {
        (Some(v), _) => [v[0], v[1], v[2]],
        (None, Some(angle)) => dipole_axis_at(to_radians(angle, args.degrees)),
        (None, None) => subchain::radiation::DEFAULT_DIPOLE_AXIS,
    };
    let default = subchain::radiation::evanescence_plane(&chain, args.resolution);
    let plane = PlaneSpec {
        normal_axis: parse_axis(&args.normal)?,
        offset: args.offset,
        u_range: pair(&args.u_range, "u-range")?.unwrap_or(default.u_range),
        v_range: pair(&args.v_range, "v-range")?.unwrap_or(default.v_range),
        resolution: args.resolution,
    };
    plane.validate(&chain).map_err(|e| usage(e.to_string()))?;
    if args.out_prefix.file_name().is_none() {
        return Err(usage("--out-prefix needs a file name"));
    }
    let state = parse_state(&args.state)?;
    let task = IntensityTask { chain, state, plane: Some(plane), dipole_axis };
    let report = run_intensity("intensity", &task, Path::new("."), &args.out_dir.join(&args.out_prefix))?;
    print_report(&report);
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<bool> {
    let report = run_validation(ValidationOptions {
        quick: args.quick,
        inject_kernel_sign_error: args.inject_kernel_sign_error,
    });
    for c in &report.checks {
        let op = match c.kind {
            Bound::Below => "<",
            Bound::Above => ">",
        };
        println!(
            "{} {}: {:.3e} ({op} {:.1e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        );
    }
    if let Some(path) = &args.json {
        let json = serde_json::to_string_pretty(&report)?;
        write_atomic(path, |w| writeln!(w, "{json}"))?;
    }
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a).map(|_| true),
        Command::Dynamics(a) => cmd_dynamics(a).map(|_| true),
        Command::Intensity(a) => cmd_intensity(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_specs() {
        assert_eq!(parse_model("scalar", false).unwrap(), Model::Scalar);
        assert_eq!(parse_model("vector:0", false).unwrap(), Model::Vectorial { delta: 0.0 });
        let Model::Vectorial { delta } = parse_model("vector:90", true).unwrap() else { panic!() };
        assert!((delta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(parse_model("vector:magic", false).unwrap(), Model::Vectorial { delta: magic_angle() });
        assert!(parse_model("tensor", false).unwrap_err().is::<UsageError>());
        assert!(parse_model("vector:abc", false).is_err());
    }

    #[test]
    fn state_specs() {
        assert_eq!(parse_state("single:7").unwrap(), InitialState::SingleExcited(7));
        assert_eq!(parse_state("most-subradiant").unwrap(), InitialState::MostSubradiant);
        assert!(parse_state("single:x").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
