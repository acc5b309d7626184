use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{GridSpec, RunConfig, VortexSpec};
use super::plot::{save_heatmap, LineChart};
use super::{LabError, EXIT_CONVERGENCE, EXIT_INVARIANT, EXIT_OK};
use crate::asymptotics::{diagnose, local_mass, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::solver::{
    continuation_traced, BranchTag, CouplingParams, NewtonRecord, SolutionPair, StepFailure,
};
use crate::torus::io::{load_field, save_field};
use crate::torus::ScalarField;

/// Relative slack of the invariant checks that decide exit code 3.
pub const INVARIANT_TOL: f64 = 1e-6;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// First schedule entry only.
    Solve,
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    /// Some steps converged before a failure.
    Partial,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the run directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub index: usize,
    pub params: CouplingParams,
    pub residual_inf: f64,
    pub iterations: usize,
    pub spurious: bool,
    pub v1: FileEntry,
    pub u2: FileEntry,
    pub trace: Vec<NewtonRecord>,
}

/// Everything needed to reload a run. Contains no timestamps, so identical
/// configs give byte-identical manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub config_hash: String,
    pub command: Command,
    pub version: String,
    pub grid: GridSpec,
    pub vortices: Vec<VortexSpec>,
    pub n_frak: f64,
    pub branch: BranchTag,
    pub status: RunStatus,
    pub u0: FileEntry,
    pub steps: Vec<StepEntry>,
    pub failure: Option<StepFailure>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub manifest: Manifest,
    pub report: Option<DiagnosticsReport>,
    pub violations: Vec<String>,
    pub exit_code: i32,
    /// Set for a nonzero exit.
    pub error: Option<LabError>,
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn dump(dir: &Path, rel: &str, field: &ScalarField, name: &str) -> Result<FileEntry> {
    let path = dir.join(rel);
    save_field(&path, field, name)?;
    Ok(FileEntry {
        path: rel.to_string(),
        sha256: sha256_file(&path)?,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_report(dir: &Path, report: &DiagnosticsReport) -> Result<()> {
    write_json(&dir.join(REPORT_JSON), report)?;
    let f = fs::File::create(dir.join(REPORT_CSV))?;
    report.write_csv(BufWriter::new(f))
}

/// Solves the configured schedule (or its first entry) and writes
/// `<out>/<run_id>/`: config, manifest, field dumps, report and plots.
///
/// Exit code: 2 if nothing converged, or if a topological run lost
/// convergence (a concentrating run that loses its branch keeps its
/// converged prefix as data); otherwise 3 on invariant violations, else 0.
pub fn execute(cfg: &RunConfig, command: Command, out: &Path, plot: bool) -> Result<RunOutcome> {
    let run_id = cfg.run_id()?;
    let dir = out.join(&run_id);
    fs::create_dir_all(dir.join("fields"))?;
    fs::write(dir.join(CONFIG_FILE), cfg.canonical_json()? + "\n")?;

    let grid = cfg.grid()?;
    let vortices = cfg.vortex_set()?;
    let mut schedule = cfg.schedule()?;
    if command == Command::Solve {
        schedule.truncate(1);
    }
    let run = continuation_traced(&grid, &vortices, &schedule, &cfg.seed, &cfg.solver)?;

    let u0 = match run.solutions.first() {
        Some(s) => s.u0.clone(),
        None => crate::torus::background_u0(&grid, &vortices),
    };
    let u0_entry = dump(&dir, "fields/u0.bin", &u0, "u0")?;
    let mut steps = Vec::with_capacity(run.solutions.len());
    for (k, s) in run.solutions.iter().enumerate() {
        steps.push(StepEntry {
            index: k,
            params: s.params,
            residual_inf: s.residual_inf,
            iterations: s.iterations,
            spurious: s.spurious,
            v1: dump(&dir, &format!("fields/step_{k:03}_v1.bin"), &s.v1, "v1")?,
            u2: dump(&dir, &format!("fields/step_{k:03}_u2.bin"), &s.u2, "u2")?,
            trace: s.trace.clone(),
        });
    }
    let status = match (&run.failure, run.solutions.is_empty()) {
        (None, _) => RunStatus::Converged,
        (Some(_), false) => RunStatus::Partial,
        (Some(_), true) => RunStatus::Failed,
    };
    let manifest = Manifest {
        run_id,
        config_hash: cfg.hash()?,
        command,
        version: env!("CARGO_PKG_VERSION").to_string(),
        grid: cfg.grid,
        vortices: cfg.vortices.clone(),
        n_frak: cfg.n_frak,
        branch: run.branch,
        status,
        u0: u0_entry,
        steps,
        failure: run.failure.clone(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;

    let report = if run.solutions.is_empty() {
        None
    } else {
        let r = diagnose(&run.solutions, &cfg.diagnostics)?;
        write_report(&dir, &r)?;
        if plot {
            write_plots(&dir, &run.solutions, cfg)?;
        }
        Some(r)
    };
    let violations = report
        .as_ref()
        .map(|r| r.violations(INVARIANT_TOL))
        .unwrap_or_default();

    let lost_branch = match (&run.failure, status) {
        (Some(_), RunStatus::Failed) => true,
        (Some(_), _) => run.branch != BranchTag::Concentrating,
        (None, _) => false,
    };
    let error = if lost_branch {
        let f = run.failure.as_ref().expect("failure present");
        Some(LabError::new(
            EXIT_CONVERGENCE,
            "solve",
            format!("step {} (eps = {}): {}", f.step, f.params.eps, f.message),
        ))
    } else if !violations.is_empty() {
        Some(LabError::new(
            EXIT_INVARIANT,
            "invariants",
            violations.join("; "),
        ))
    } else {
        None
    };
    Ok(RunOutcome {
        run_dir: dir,
        manifest,
        report,
        violations,
        exit_code: error.as_ref().map_or(EXIT_OK, |e| e.code),
        error,
    })
}

fn load_checked(dir: &Path, entry: &FileEntry) -> Result<ScalarField> {
    let path = dir.join(&entry.path);
    let (_, field) = load_field(&path)?;
    if sha256_file(&path)? != entry.sha256 {
        return Err(Error::CorruptDump {
            path,
            message: "checksum does not match the manifest".into(),
        });
    }
    Ok(field)
}

/// Reloads the manifest and every converged solution of a run directory.
pub fn load_run(dir: &Path) -> Result<(Manifest, Vec<SolutionPair>)> {
    let path = dir.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(Error::Config(format!(
            "{} holds no completed run ({MANIFEST_FILE} missing)",
            dir.display()
        )));
    }
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| Error::CorruptDump {
            path: path.clone(),
            message: e.to_string(),
        })?;
    let grid = manifest.grid.build()?;
    let vortices = crate::torus::VortexSet::new(
        manifest
            .vortices
            .iter()
            .map(|v| crate::torus::Point::new(v.x, v.y))
            .collect(),
        manifest.vortices.iter().map(|v| v.m).collect(),
    )?;
    let u0 = load_checked(dir, &manifest.u0)?;
    let mut sols = Vec::with_capacity(manifest.steps.len());
    for s in &manifest.steps {
        let v1 = load_checked(dir, &s.v1)?;
        let u2 = load_checked(dir, &s.u2)?;
        if v1.grid() != &grid || u2.grid() != &grid {
            return Err(Error::CorruptDump {
                path: dir.join(&s.v1.path),
                message: "grid differs from the manifest".into(),
            });
        }
        sols.push(SolutionPair {
            params: s.params,
            vortices: vortices.clone(),
            v1,
            u2,
            u0: u0.clone(),
            residual_inf: s.residual_inf,
            iterations: s.iterations,
            branch: manifest.branch,
            spurious: s.spurious,
            trace: s.trace.clone(),
        });
    }
    Ok((manifest, sols))
}

fn saved_config(dir: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(dir.join(CONFIG_FILE))
        .map_err(|e| Error::Config(format!("{}: {e}", dir.join(CONFIG_FILE).display())))?;
    RunConfig::from_json(&text)
}

/// Recomputes the diagnostics of a saved run.
pub fn classify_dir(dir: &Path) -> Result<DiagnosticsReport> {
    let (_, sols) = load_run(dir)?;
    if sols.is_empty() {
        return Err(Error::Config(format!(
            "{} has no converged steps",
            dir.display()
        )));
    }
    let cfg = saved_config(dir)?;
    diagnose(&sols, &cfg.diagnostics)
}

/// [`classify_dir`], then rewrites the report files and, with `plot`, the
/// plots of the run directory (or of `out` when given).
pub fn report_dir(dir: &Path, out: Option<&Path>, plot: bool) -> Result<DiagnosticsReport> {
    let report = classify_dir(dir)?;
    let target = out.unwrap_or(dir);
    fs::create_dir_all(target)?;
    write_report(target, &report)?;
    if plot {
        let (_, sols) = load_run(dir)?;
        write_plots(target, &sols, &saved_config(dir)?)?;
    }
    Ok(report)
}

fn write_plots(dir: &Path, sols: &[SolutionPair], cfg: &RunConfig) -> Result<()> {
    let pdir = dir.join("plots");
    fs::create_dir_all(&pdir)?;
    let last = sols.last().expect("nonempty run");
    save_heatmap(&pdir.join("u1.png"), &last.u1())?;
    save_heatmap(&pdir.join("u2.png"), &last.u2)?;

    let norm: Vec<(f64, f64)> = sols
        .iter()
        .map(|s| (s.params.eps, s.u2.max_abs()))
        .collect();
    let c = norm.last().map(|(e, n)| n / (e * e)).unwrap_or(1.0);
    LineChart::new("u2 scaling", "eps", "max |u2|")
        .log_log()
        .series("max |u2|", norm.clone())
        .series(
            "c eps^2",
            norm.iter().map(|(e, _)| (*e, c * e * e)).collect(),
        )
        .save(&pdir.join("u2_scaling.svg"))?;

    let d = cfg.diagnostics.local_mass_radius;
    let mut mass = Vec::with_capacity(sols.len());
    for s in sols {
        let u1 = s.u1();
        let (i, j) = u1.argmax();
        mass.push((s.params.eps, local_mass(s, s.grid().node(i, j), d)?));
    }
    LineChart::new("local mass at the peak of u1", "eps", "local mass")
        .series("local mass", mass.clone())
        .series(
            "8 pi",
            mass.iter()
                .map(|(e, _)| (*e, 8.0 * std::f64::consts::PI))
                .collect(),
        )
        .save(&pdir.join("local_mass.svg"))?;
    Ok(())
}

impl RunOutcome {
    pub fn is_ok(&self) -> bool {
        self.exit_code == EXIT_OK
    }
}
