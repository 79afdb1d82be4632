//! `tetradf`: solve, simulate, sweep and report from the command line.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 degenerate solve.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use tetradf::harness::{
    run_sweep, summary_table, AngleGrid, ChordRadius, SweepConfig, SweepSummary,
};
use tetradf::sim::{plane_lags_m, spherical_lags_m, SourceSpec};
use tetradf::solver::{solve_degraded, solve_full};
use tetradf::{Error, SignHint, TdoaSample, TdoaUnit, TetraArray, Vertex};

/// Caps the worker threads used by `sweep`.
const THREADS_ENV: &str = "TETRADF_THREADS";

#[derive(Parser)]
#[command(
    name = "tetradf",
    version,
    about = "Direction finding on a regular-tetrahedron TDOA array"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one set of readings; prints a JSON estimate.
    Solve(SolveArgs),
    /// Simulate readings for a source; prints JSON.
    Simulate(SimulateArgs),
    /// Run an error sweep from a config file.
    Sweep(SweepArgs),
    /// Print the summary table of a sweep JSON file.
    Report(ReportArgs),
}

#[derive(Args)]
struct ArrayArgs {
    /// Config file to take the array parameters from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge length, meters.
    #[arg(long)]
    edge_length: Option<f64>,
    /// Propagation speed, m/s.
    #[arg(long)]
    speed: Option<f64>,
}

impl ArrayArgs {
    fn build(&self) -> anyhow::Result<TetraArray> {
        let base = match &self.config {
            Some(path) => CliConfig::load(path)?,
            None => CliConfig::default(),
        };
        let edge = self.edge_length.unwrap_or(base.edge_length_m);
        let speed = self.speed.unwrap_or(base.propagation_speed_mps);
        Ok(TetraArray::new(edge, speed)?)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Four readings in vertex order a b c d (three with --degraded), or `-`
    /// to read the JSON printed by `simulate` from stdin.
    #[arg(required = true, allow_negative_numbers = true)]
    values: Vec<String>,
    /// Unit of the readings: s or m.
    #[arg(long, default_value = "s")]
    unit: String,
    /// Solve from the three receivers of one face.
    #[arg(long)]
    degraded: bool,
    /// Vertex whose receiver is lost in degraded mode.
    #[arg(long, default_value = "d")]
    shielded: String,
    /// Side of the face the source is known to be on: above or below.
    #[arg(long)]
    sign_hint: Option<String>,
    #[command(flatten)]
    array: ArrayArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(allow_negative_numbers = true)]
    bearing_deg: f64,
    #[arg(allow_negative_numbers = true)]
    elevation_deg: f64,
    /// Source range from the array centroid, meters.
    #[arg(
        long,
        conflicts_with = "far_field",
        required_unless_present = "far_field",
        allow_negative_numbers = true
    )]
    range: Option<f64>,
    /// Plane wave from a source at infinity.
    #[arg(long)]
    far_field: bool,
    #[command(flatten)]
    array: ArrayArgs,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Override the CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the JSON output path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    summary: PathBuf,
}

/// Flat sweep config. Relative output paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CliConfig {
    edge_length_m: f64,
    propagation_speed_mps: f64,
    ranges_m: Vec<f64>,
    bearing_start_deg: f64,
    bearing_stop_deg: f64,
    bearing_step_deg: f64,
    elevation_start_deg: f64,
    elevation_stop_deg: f64,
    elevation_step_deg: f64,
    csv_path: PathBuf,
    json_path: PathBuf,
    chord_radius: ChordRadius,
}

impl Default for CliConfig {
    fn default() -> Self {
        let s = SweepConfig::default();
        CliConfig {
            edge_length_m: s.edge_length_m,
            propagation_speed_mps: s.propagation_speed_mps,
            ranges_m: s.ranges_m,
            bearing_start_deg: s.bearing.start_deg,
            bearing_stop_deg: s.bearing.stop_deg,
            bearing_step_deg: s.bearing.step_deg,
            elevation_start_deg: s.elevation.start_deg,
            elevation_stop_deg: s.elevation.stop_deg,
            elevation_step_deg: s.elevation.step_deg,
            csv_path: "sweep.csv".into(),
            json_path: "sweep_summary.json".into(),
            chord_radius: s.chord_radius,
        }
    }
}

impl CliConfig {
    fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn sweep(&self) -> SweepConfig {
        SweepConfig {
            edge_length_m: self.edge_length_m,
            propagation_speed_mps: self.propagation_speed_mps,
            ranges_m: self.ranges_m.clone(),
            bearing: AngleGrid::new(
                self.bearing_start_deg,
                self.bearing_stop_deg,
                self.bearing_step_deg,
            ),
            elevation: AngleGrid::new(
                self.elevation_start_deg,
                self.elevation_stop_deg,
                self.elevation_step_deg,
            ),
            chord_radius: self.chord_radius,
        }
    }
}

/// What `simulate` prints and `solve -` reads back.
#[derive(Debug, Serialize, Deserialize)]
struct SimulatedSample {
    bearing_deg: f64,
    elevation_deg: f64,
    range_m: Option<f64>,
    seconds: [f64; 4],
    meters: [f64; 4],
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_failure(&e),
    }
}

fn report_failure(e: &anyhow::Error) -> ExitCode {
    let core = e.chain().find_map(|c| c.downcast_ref::<Error>());
    let degenerate = core.is_some_and(|c| match c {
        Error::SweepPoint { source, .. } => source.is_degenerate(),
        other => other.is_degenerate(),
    });
    let body = json!({
        "error": core.map_or("usage", error_kind),
        "message": format!("{e:#}"),
    });
    eprintln!("{body}");
    ExitCode::from(if degenerate { 2 } else { 1 })
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter { .. } => "invalid_parameter",
        Error::InvalidSample(_) => "invalid_sample",
        Error::AtInfinity { .. } => "at_infinity",
        Error::DegenerateReadings => "degenerate_readings",
        Error::BearingUndefined { .. } => "bearing_undefined",
        Error::Coplanar { .. } => "coplanar",
        Error::InsufficientPoints { .. } => "insufficient_points",
        Error::SweepPoint { .. } => "sweep_point",
        Error::Io(_) => "io",
    }
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn parse_values(raw: &[String]) -> anyhow::Result<Vec<f64>> {
    raw.iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| anyhow!("`{s}` is not a number"))
        })
        .collect()
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let array = args.array.build()?;
    let unit: TdoaUnit = args.unit.parse()?;

    let values = if args.values == ["-"] {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .context("reading stdin")?;
        let sim: SimulatedSample =
            serde_json::from_str(&text).context("parsing simulated sample")?;
        if args.degraded {
            // keep the face's receivers, in face order
            let shielded: Vertex = args.shielded.parse()?;
            shielded
                .others()
                .iter()
                .map(|v| sim.meters[v.index()])
                .collect()
        } else {
            sim.meters.to_vec()
        }
    } else {
        let v = parse_values(&args.values)?;
        let speed = array.propagation_speed();
        match unit {
            TdoaUnit::Meters => v,
            TdoaUnit::Seconds => v.into_iter().map(|s| s * speed).collect(),
        }
    };

    let estimate = if args.degraded {
        let lags: [f64; 3] = values
            .try_into()
            .map_err(|v: Vec<f64>| anyhow!("--degraded needs 3 readings, got {}", v.len()))?;
        let shielded: Vertex = args.shielded.parse()?;
        let hint = args
            .sign_hint
            .as_deref()
            .map(str::parse::<SignHint>)
            .transpose()?;
        solve_degraded(lags, &array.face(shielded), hint)?
    } else {
        let lags: [f64; 4] = values
            .try_into()
            .map_err(|v: Vec<f64>| anyhow!("need 4 readings, got {}", v.len()))?;
        solve_full(&TdoaSample::meters(lags)?, &array)?
    };
    print_json(&estimate)
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let array = args.array.build()?;
    let (source, meters) = match args.range {
        Some(range) => {
            let s = SourceSpec::at_range(args.bearing_deg, args.elevation_deg, range);
            (s, spherical_lags_m(&s, &array)?)
        }
        None => {
            let s = SourceSpec::far_field(args.bearing_deg, args.elevation_deg);
            (s, plane_lags_m(&s, &array)?)
        }
    };
    print_json(&SimulatedSample {
        bearing_deg: source.bearing_deg,
        elevation_deg: source.elevation_deg,
        range_m: args.range,
        seconds: meters.map(|m| m / array.propagation_speed()),
        meters,
    })
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let cfg = CliConfig::load(&args.config)?;
    let sweep = cfg.sweep();
    sweep
        .validate()
        .with_context(|| format!("invalid config {}", args.config.display()))?;
    configure_threads()?;

    let base = args.config.parent().unwrap_or(Path::new("."));
    let csv_path = args.csv.unwrap_or_else(|| base.join(&cfg.csv_path));
    let json_path = args.json.unwrap_or_else(|| base.join(&cfg.json_path));

    let report = run_sweep(&sweep)?;
    let create = |p: &Path| {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        File::create(p).with_context(|| format!("creating {}", p.display()))
    };
    report.write_csv(BufWriter::new(create(&csv_path)?))?;
    report.write_json(BufWriter::new(create(&json_path)?))?;
    print!("{}", report.summary_table());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.summary)
        .with_context(|| format!("reading {}", args.summary.display()))?;
    let summary: SweepSummary = serde_json::from_str(&text).context("parsing sweep summary")?;
    if summary.ranges.is_empty() {
        bail!("summary has no ranges");
    }
    print!("{}", summary_table(&summary.ranges));
    Ok(())
}
