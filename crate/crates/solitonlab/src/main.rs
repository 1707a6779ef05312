//! Command-line driver.
//!
//! Three subcommands share one configuration pipeline (TOML document,
//! overridden key-by-key from flags):
//!
//! - `run`    — evolve one configuration; write manifest, origin trace, and
//!              every recorded snapshot.
//! - `sweep`  — evolve a family of (f0, v0) cases concurrently; write
//!              per-case artifacts plus the aggregate fit table.
//! - `slices` — evolve once and write the spatial profile at requested
//!              times, optionally with fitted/predicted overlay columns.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 I/O error while writing artifacts.

use clap::{Args, Parser, Subcommand};
use solitonlab::config::{ConfigError, RunDocument, SweepDocument};
use solitonlab::fit::{compare_run, fit_ellipse};
use solitonlab::model::ParabolicAnsatz;
use solitonlab::output::{
    write_run, write_slice_csv, write_slice_index, slice_filename, SliceOverlays, SliceStatus,
};
use solitonlab::stepper::{run, Profile, RunConfig, StepError, Termination};
use solitonlab::sweep::{case_dirname, run_sweep};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "solitonlab",
    version,
    about = "Evolve radially symmetric soliton collapse and test the slow-motion blow-up laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and write its artifacts
    Run(RunArgs),
    /// Evolve a family of (f0, v0) cases and aggregate the fits into a table
    Sweep(SweepArgs),
    /// Evolve once and write profile slices at the requested times
    Slices(SlicesArgs),
}

/// Configuration inputs shared by `run` and `slices`: an optional TOML
/// document plus per-key overrides. Flags beat document values.
#[derive(Args)]
struct ConfigSource {
    /// TOML configuration document
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides the document's output_dir)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Model: yang-mills-4p1 or sigma-charge2
    #[arg(long)]
    model: Option<String>,
    /// Initial field value f(r,0) = f0 (must be positive)
    #[arg(long)]
    f0: Option<f64>,
    /// Initial field velocity (negative for collapse, 0 for stationary)
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    /// Grid spacing
    #[arg(long)]
    dr: Option<f64>,
    /// Time step
    #[arg(long)]
    dt: Option<f64>,
    /// Outer grid radius
    #[arg(long = "rmax", value_name = "RMAX")]
    r_max: Option<f64>,
    /// Initial profile: line or parabola
    #[arg(long)]
    profile: Option<String>,
    /// Integration time limit
    #[arg(long = "tmax", value_name = "TMAX")]
    t_max: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: ConfigSource,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep document (shared settings plus [[cases]] tables)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides the document's output_dir)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Concurrent worker threads (default: available cores)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Model override: yang-mills-4p1 or sigma-charge2
    #[arg(long)]
    model: Option<String>,
    /// Grid spacing override
    #[arg(long)]
    dr: Option<f64>,
    /// Time step override
    #[arg(long)]
    dt: Option<f64>,
    /// Outer grid radius override
    #[arg(long = "rmax", value_name = "RMAX")]
    r_max: Option<f64>,
    /// Initial profile override: line or parabola
    #[arg(long)]
    profile: Option<String>,
    /// Integration time limit override
    #[arg(long = "tmax", value_name = "TMAX")]
    t_max: Option<f64>,
}

#[derive(Args)]
struct SlicesArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// Fit each written slice and add overlay columns f_ellipse, f_parabola
    #[arg(long)]
    overlay: bool,
    /// Times at which to write profile slices
    #[arg(required = true, value_name = "TIME", num_args = 1.., allow_negative_numbers = true)]
    times: Vec<f64>,
}

/// Failure with its exit code. Configuration problems (including an
/// unreadable config file) exit 1, numerical failures 2, artifact-writing
/// failures 3.
enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }

    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(1),
            CliError::Numerical(_) => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<StepError> for CliError {
    fn from(e: StepError) -> Self {
        match e {
            StepError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn write_failed(e: std::io::Error) -> CliError {
    CliError::Io(format!("could not write artifacts: {e}"))
}

fn main() -> ExitCode {
    // Usage problems are configuration errors (exit 1), not clap's default
    // exit 2, which this tool reserves for numerical failures; --help and
    // --version are successful displays.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Slices(args) => cmd_slices(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

impl ConfigSource {
    /// Assemble the run document: file first (when given), then flag
    /// overrides. Without a file, model/f0/v0 must come from flags.
    fn document(&self) -> Result<RunDocument, CliError> {
        let mut doc = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("could not read {}: {e}", path.display()))
                })?;
                RunDocument::parse(&text)?
            }
            None => {
                let missing = |flag: &str| {
                    CliError::Config(format!("--{flag} is required when no --config is given"))
                };
                RunDocument::new(
                    self.model.clone().ok_or_else(|| missing("model"))?,
                    self.f0.ok_or_else(|| missing("f0"))?,
                    self.v0.ok_or_else(|| missing("v0"))?,
                )
            }
        };
        if let Some(model) = &self.model {
            doc.model = model.clone();
        }
        if let Some(f0) = self.f0 {
            doc.f0 = f0;
        }
        if let Some(v0) = self.v0 {
            doc.v0 = v0;
        }
        if self.dr.is_some() {
            doc.dr = self.dr;
        }
        if self.dt.is_some() {
            doc.dt = self.dt;
        }
        if self.r_max.is_some() {
            doc.r_max = self.r_max;
        }
        if let Some(profile) = &self.profile {
            doc.profile = Some(profile.clone());
            // An explicit profile re-pairs the outer boundary unless the
            // document pinned one itself.
            if self.config.is_none() {
                doc.boundary_outer = None;
            }
        }
        if self.t_max.is_some() {
            doc.t_max = self.t_max;
        }
        Ok(doc)
    }

    /// Resolve to a validated config plus the output directory, which must
    /// come from --out or the document.
    fn resolve(&self) -> Result<(RunConfig, PathBuf), CliError> {
        let (config, doc_out) = self.document()?.resolve()?;
        let out = self.out.clone().or(doc_out).ok_or_else(|| {
            CliError::Config(
                "no output directory: pass --out or set output_dir in the config".to_string(),
            )
        })?;
        Ok((config, out))
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let (config, out) = args.source.resolve()?;
    let started = Instant::now();
    let record = run(&config)?;
    let report = compare_run(&record);
    write_run(&out, &record, &report, started.elapsed().as_secs_f64()).map_err(write_failed)?;

    println!(
        "{} f0={} v0={}: {} after {} steps -> {}",
        config.model,
        config.f0,
        config.v0,
        record.termination,
        record.origin_trace.len() - 1,
        out.display(),
    );
    if let (Some(fit), Some(pred)) = (&report.origin, &report.predicted) {
        println!(
            "  a = {:.8e} (predicted {:.8e}), T = {:.6} (predicted {:.6})",
            fit.a, pred.a, fit.t_blowup, pred.t_blowup
        );
    }
    if record.termination == Termination::NumericalInstability {
        return Err(CliError::Numerical(
            "evolution went numerically unstable (artifacts were still written)".to_string(),
        ));
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!("could not read {}: {e}", args.config.display()))
    })?;
    let mut doc = SweepDocument::parse(&text)?;
    if let Some(model) = &args.model {
        doc.model = model.clone();
    }
    if args.dr.is_some() {
        doc.dr = args.dr;
    }
    if args.dt.is_some() {
        doc.dt = args.dt;
    }
    if args.r_max.is_some() {
        doc.r_max = args.r_max;
    }
    if let Some(profile) = &args.profile {
        doc.profile = Some(profile.clone());
    }
    if args.t_max.is_some() {
        doc.t_max = args.t_max;
    }

    let (configs, doc_out) = doc.resolve()?;
    let out = args.out.clone().or(doc_out).ok_or_else(|| {
        CliError::Config(
            "no output directory: pass --out or set output_dir in the config".to_string(),
        )
    })?;
    let workers = args.workers.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });

    let n_cases = configs.len();
    println!("sweep: {n_cases} cases, {workers} workers -> {}", out.display());
    let outcome = run_sweep(&configs, &out, workers).map_err(write_failed)?;
    for (row, config) in outcome.rows.iter().zip(&configs) {
        match (row.a_fit, row.rel_err_a, row.rel_err_t) {
            (Some(a), Some(ea), Some(et)) => println!(
                "  f0={} v0={}: a = {:.8e} (rel err {:.2e}), T rel err {:.2e}",
                config.f0, config.v0, a, ea, et
            ),
            _ => println!("  f0={} v0={}: no fit", config.f0, config.v0),
        }
    }
    for (index, message) in &outcome.failures {
        eprintln!("case {} ({}): {message}", index, case_dirname(*index));
    }
    if outcome.all_failed() {
        return Err(CliError::Numerical(format!(
            "all {n_cases} cases failed"
        )));
    }
    Ok(())
}

fn cmd_slices(args: &SlicesArgs) -> Result<(), CliError> {
    let (config, out) = args.source.resolve()?;
    for &t in &args.times {
        if !(0.0..=config.t_max).contains(&t) {
            return Err(CliError::Config(format!(
                "requested slice time {t} is outside [0, t_max = {}]",
                config.t_max
            )));
        }
    }

    let record = run(&config)?;
    let grid = config.grid()?;
    let slices_dir = out.join("slices");
    std::fs::create_dir_all(&slices_dir).map_err(write_failed)?;

    // Snapshots sit on the stride lattice; a requested time is served by the
    // nearest one, and marked absent when the run terminated before reaching
    // it (within half a stride of slack).
    let half_stride = 0.5 * config.dt * config.snapshot_stride as f64;
    let mut entries = Vec::with_capacity(args.times.len());
    for &t in &args.times {
        let nearest = record
            .snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("a run always records its initial snapshot");
        if (nearest.t - t).abs() > half_stride + 1e-9 {
            entries.push((t, SliceStatus::Absent));
            continue;
        }

        let ellipse = if args.overlay && config.profile == Profile::Line && nearest.t > 0.0 {
            let baseline = nearest.values[nearest.values.len() - 2];
            solitonlab::grid::RadialField::new(grid, nearest.values.clone())
                .ok()
                .and_then(|field| fit_ellipse(&field, baseline).ok())
        } else {
            None
        };
        let parabola = if args.overlay {
            ParabolicAnsatz::new(config.f0, config.v0)
                .ok()
                .map(|ansatz| (ansatz, nearest.t))
        } else {
            None
        };

        let file = slice_filename(nearest.t);
        write_slice_csv(
            &slices_dir.join(&file),
            (0..grid.n_points()).map(|i| grid.r(i)),
            &nearest.values,
            SliceOverlays {
                ellipse: ellipse.as_ref(),
                parabola,
            },
        )
        .map_err(write_failed)?;
        entries.push((
            t,
            SliceStatus::Written {
                t_snapshot: nearest.t,
                file,
            },
        ));
    }

    write_slice_index(&slices_dir.join("index.csv"), &entries).map_err(write_failed)?;

    let written = entries
        .iter()
        .filter(|(_, s)| matches!(s, SliceStatus::Written { .. }))
        .count();
    println!(
        "{} f0={} v0={}: {} ({} of {} slices written) -> {}",
        config.model,
        config.f0,
        config.v0,
        record.termination,
        written,
        entries.len(),
        slices_dir.display(),
    );
    if record.termination == Termination::NumericalInstability {
        return Err(CliError::Numerical(
            "evolution went numerically unstable (written slices were kept)".to_string(),
        ));
    }
    Ok(())
}
