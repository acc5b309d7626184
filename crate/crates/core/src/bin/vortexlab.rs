use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use vortexlab::lab::{
    self, classify_dir, execute, parse_grid, plot::LineChart, radial_table, report_dir, Command,
    LabError, RunConfig, EXIT_CONFIG, EXIT_INVARIANT,
};

/// Relative tolerance of the radial flux identities.
const RADIAL_IDENTITY_TOL: f64 = 1e-4;

#[derive(Parser)]
#[command(
    name = "vortexlab",
    version,
    about = "Gudnason vortex experiments on a flat torus"
)]
struct Cli {
    /// Run configuration (.toml or .json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit SVG/PNG plots.
    #[arg(long, global = true)]
    plot: bool,
    /// Override the solver (or shooting) tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Override the grid, `N` or `NxM`.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Flux table of radial profiles.
    Radial {
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Comma-separated shooting values.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        s: Vec<f64>,
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Solve the first schedule entry.
    Solve,
    /// Run the whole schedule.
    Continue,
    /// Recompute and print the diagnostics of a saved run.
    Classify { dir: PathBuf },
    /// Rewrite the report files (and plots) of a saved run.
    Report { dir: PathBuf },
}

fn fail(e: LabError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.code as u8)
}

fn load_config(cli: &Cli) -> Result<RunConfig, LabError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| LabError::new(EXIT_CONFIG, "config", "--config is required"))?;
    let grid = cli
        .grid
        .as_deref()
        .map(parse_grid)
        .transpose()
        .map_err(|e| LabError::from_error("config", &e))?;
    RunConfig::from_path(path)
        .and_then(|c| c.with_overrides(cli.tol, grid))
        .map_err(|e| LabError::from_error("config", &e))
}

fn run(cli: Cli) -> Result<(), LabError> {
    lab::init_threads()?;
    match &cli.cmd {
        Cmd::Radial { m, s, r_max } => {
            let tol = cli.tol.unwrap_or(vortexlab::radial::DEFAULT_TOL);
            let table = radial_table(*m, s, *r_max, tol, RADIAL_IDENTITY_TOL)
                .map_err(|e| LabError::from_error("radial", &e))?;
            let io = |e: std::io::Error| LabError::new(EXIT_CONFIG, "output", e.to_string());
            table
                .write_csv(std::io::stdout().lock())
                .map_err(|e| LabError::from_error("output", &e))?;
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out).map_err(io)?;
                let f = std::fs::File::create(out.join("radial.csv")).map_err(io)?;
                table
                    .write_csv(f)
                    .map_err(|e| LabError::from_error("output", &e))?;
                let text = serde_json::to_string_pretty(&table).expect("table serializes");
                std::fs::write(out.join("radial.json"), text + "\n").map_err(io)?;
                if cli.plot {
                    let pts = table.rows.iter().map(|r| (r.s, r.beta)).collect();
                    LineChart::new("flux of radial profiles", "s", "beta")
                        .series(&format!("m = {m}"), pts)
                        .save(&out.join("beta.svg"))
                        .map_err(|e| LabError::from_error("output", &e))?;
                }
            }
            eprintln!(
                "{}",
                json!({"monotone": table.monotone, "identities_hold": table.all_hold()})
            );
            if !table.all_hold() {
                return Err(LabError::new(
                    EXIT_INVARIANT,
                    "radial",
                    format!("flux identities fail beyond relative {RADIAL_IDENTITY_TOL}"),
                ));
            }
            Ok(())
        }
        Cmd::Solve | Cmd::Continue => {
            let cfg = load_config(&cli)?;
            let command = if matches!(cli.cmd, Cmd::Solve) {
                Command::Solve
            } else {
                Command::Continue
            };
            let out = cli
                .out
                .clone()
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("runs"));
            let plot = cli.plot || cfg.output.plot;
            let outcome =
                execute(&cfg, command, &out, plot).map_err(|e| LabError::from_error("run", &e))?;
            let summary = json!({
                "run_id": outcome.manifest.run_id,
                "run_dir": outcome.run_dir,
                "status": outcome.manifest.status,
                "steps": outcome.manifest.steps.len(),
                "first_class": outcome.report.as_ref().map(|r| r.first_class),
                "second_class": outcome.report.as_ref().map(|r| r.second_class),
                "exit_code": outcome.exit_code,
            });
            emit(&summary);
            match outcome.error {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Cmd::Classify { dir } => {
            let report = classify_dir(dir).map_err(|e| LabError::from_error("classify", &e))?;
            print_summary(dir, &report);
            Ok(())
        }
        Cmd::Report { dir } => {
            let report = report_dir(dir, cli.out.as_deref(), cli.plot)
                .map_err(|e| LabError::from_error("report", &e))?;
            print_summary(dir, &report);
            Ok(())
        }
    }
}

fn print_summary(dir: &Path, r: &vortexlab::asymptotics::DiagnosticsReport) {
    let summary = json!({
        "run_dir": dir,
        "branch": r.branch,
        "first_class": r.first_class,
        "second_class": r.second_class,
        "slope": r.second.and_then(|s| s.slope),
        "final_far_field": r.final_far_field(),
        "sites": r.blowup_sites,
        "pohozaev_relative": r.pohozaev.iter().map(|p| p.relative()).collect::<Vec<_>>(),
        "gradient": r.gradient,
        "notes": r.notes,
    });
    emit(&summary);
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(value: &serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("json");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(LabError::new(
                EXIT_CONFIG,
                "usage",
                e.to_string().trim_end(),
            ));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
