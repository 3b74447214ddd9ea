//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use wmac_core::memory::{KeyDesign, Reallocation};
use wmac_core::scenario::{preset, ControllerKind, ScenarioSpec};
use wmac_core::simulation::SimConfig;

use crate::error::{exit, CliError, Result};
use crate::scenario_file::load_scenario_file;
use crate::summary::{write_summary_json, RunReport, SummaryDocument};
use crate::trace_csv::{write_trace_csv, TraceLayout};
use crate::{runner, table, verify};

/// Default output directory when neither `--out` nor this variable is set
/// is `wmac-out` in the working directory.
pub const OUT_DIR_ENV: &str = "WMAC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "wmac-out";

#[derive(Debug, Parser)]
#[command(
    name = "wmac",
    version,
    about = "Working-memory augmented adaptive control of a two-link arm"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one controller on one scenario.
    Run(RunArgs),
    /// Simulate all four controllers and print the SRMSE table.
    Compare(CompareArgs),
    /// Run the property and oracle checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerArg {
    Nn,
    MannSoft,
    MannHard,
    MannProposed,
}

impl From<ControllerArg> for ControllerKind {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Nn => ControllerKind::Nn,
            ControllerArg::MannSoft => ControllerKind::MannSoft,
            ControllerArg::MannHard => ControllerKind::MannHard,
            ControllerArg::MannProposed => ControllerKind::MannProposed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeyArg {
    State,
    Rep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReallocArg {
    Off,
    Initial,
    Always,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Preset number (0-6) or path to a TOML scenario file.
    #[arg(long)]
    pub scenario: String,
    /// Integration step in seconds.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    /// End time in seconds; shorter runs drop the later jumps.
    #[arg(long = "t-end", allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Seed for the weight initialisation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $WMAC_OUT_DIR, else ./wmac-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub controller: Option<ControllerArg>,
    /// Key design of the memory controllers.
    #[arg(long, value_enum)]
    pub key: Option<KeyArg>,
    /// Reallocation policy of the proposed controller.
    #[arg(long, value_enum)]
    pub realloc: Option<ReallocArg>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Skip the full-length scenario runs.
    #[arg(long)]
    pub quick: bool,
}

/// Preset number or scenario file.
pub fn resolve_scenario(arg: &str) -> Result<ScenarioSpec> {
    if let Ok(id) = arg.parse::<u32>() {
        return preset(id)
            .ok_or_else(|| CliError::BadFlag(format!("--scenario: no preset {id}, expected 0-6 or a file")));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::BadFlag(format!(
            "--scenario: `{arg}` is neither a preset number nor an existing file"
        )));
    }
    load_scenario_file(path)
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Scenario and integrator settings after applying the common flags.
pub fn resolve_common(common: &Common) -> Result<(ScenarioSpec, SimConfig)> {
    let mut spec = resolve_scenario(&common.scenario)?;
    if let Some(t_end) = common.t_end {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(CliError::BadFlag(format!("--t-end must be positive, got {t_end}")));
        }
        spec = spec.truncated(t_end);
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let mut sim = SimConfig::from_scenario(&spec);
    if let Some(dt) = common.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CliError::BadFlag(format!("--dt must be positive, got {dt}")));
        }
        sim.dt = dt;
    }
    sim.validate().map_err(|e| CliError::BadFlag(e.to_string()))?;
    Ok((spec, sim))
}

pub fn resolve_run(args: &RunArgs) -> Result<(ScenarioSpec, SimConfig)> {
    let (mut spec, sim) = resolve_common(&args.common)?;
    if let Some(c) = args.controller {
        spec = spec.with_controller(c.into());
    }
    if let Some(k) = args.key {
        spec.controller.key = match k {
            KeyArg::State => KeyDesign::State,
            KeyArg::Rep => KeyDesign::Representation,
        };
    }
    if let Some(r) = args.realloc {
        if spec.controller.kind != ControllerKind::MannProposed && r != ReallocArg::Off {
            return Err(CliError::BadFlag(format!(
                "--realloc applies to mann-proposed only, not {}",
                spec.controller.kind.name()
            )));
        }
        spec.controller.reallocation = match r {
            ReallocArg::Off => Reallocation::Off,
            ReallocArg::Initial => Reallocation::InitialPhase,
            ReallocArg::Always => Reallocation::Always,
        };
    }
    spec.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((spec, sim))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn trace_file(dir: &Path, kind: ControllerKind) -> PathBuf {
    dir.join(format!("trace-{}.csv", kind.name()))
}

pub fn run_command(args: &RunArgs, stdout: &mut dyn Write) -> Result<()> {
    let (spec, sim) = resolve_run(args)?;
    let output = runner::run(&spec, &sim)?;
    let dir = out_dir(&args.common.out);
    create_dir(&dir)?;
    write_trace_csv(
        &output.trace,
        &TraceLayout::for_spec(&spec),
        &trace_file(&dir, spec.controller.kind),
    )?;
    let report = RunReport::new(runner::label(&spec), &spec, &sim, &output);
    let doc = SummaryDocument {
        runs: vec![report],
        tables: Vec::new(),
    };
    write_summary_json(&doc, &dir.join("summary.json"))?;
    let s = &output.summary;
    let _ = writeln!(
        stdout,
        "{}: SRMSE x 10^3 = {:.3} / {:.3} (t > 10 s: {:.3} / {:.3}), {} reallocation(s); output in {}",
        runner::label(&spec),
        1e3 * s.srmse[0],
        1e3 * s.srmse[1],
        1e3 * s.srmse_after[0],
        1e3 * s.srmse_after[1],
        output.reallocations,
        dir.display()
    );
    Ok(())
}

pub fn compare_command(args: &CompareArgs, stdout: &mut dyn Write) -> Result<()> {
    let (spec, sim) = resolve_common(&args.common)?;
    let comparison = runner::compare(&spec, &sim)?;
    let dir = out_dir(&args.common.out);
    create_dir(&dir)?;
    for (s, run) in &comparison.runs {
        write_trace_csv(
            &run.trace,
            &TraceLayout::for_spec(s),
            &trace_file(&dir, s.controller.kind),
        )?;
    }
    write_summary_json(&comparison.document, &dir.join("summary.json"))?;
    let text = table::render_all(&comparison.document.tables);
    let path = dir.join("table.txt");
    std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
    let _ = writeln!(stdout, "scenario {}\n{text}", spec.id);
    Ok(())
}

pub fn verify_command(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<()> {
    let checks = verify::run_all(!args.quick);
    for c in &checks {
        let _ = writeln!(stdout, "{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(stdout, "{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        return Err(CliError::Verify(failed));
    }
    Ok(())
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Run(a) => run_command(a, stdout),
        Command::Compare(a) => compare_command(a, stdout),
        Command::Verify(a) => verify_command(a, stdout),
    }
}

/// One-line JSON error report for stderr.
pub fn error_report(err: &CliError) -> String {
    serde_json::json!({
        "error": err.kind(),
        "exit_code": err.exit_code(),
        "message": err.to_string(),
    })
    .to_string()
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return exit::OK;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            let err = CliError::BadFlag(first.trim_start_matches("error: ").to_string());
            let _ = write!(stderr, "{e}");
            let _ = writeln!(stderr, "{}", error_report(&err));
            return err.exit_code();
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => exit::OK,
        Err(err) => {
            let _ = writeln!(stderr, "{}", error_report(&err));
            err.exit_code()
        }
    }
}
