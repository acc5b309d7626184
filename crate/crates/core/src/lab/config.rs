use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::DiagnosticsOptions;
use crate::error::{Error, Result};
use crate::solver::{
    geometric_schedule, schedule_from_eps, CouplingParams, NewtonOptions, Seed, SigmaRule,
};
use crate::torus::{Point, TorusGrid, VortexSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "one")]
    pub lx: f64,
    #[serde(default = "one")]
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

fn one() -> f64 {
    1.0
}

impl GridSpec {
    pub fn build(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.lx, self.ly, self.nx, self.ny)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default = "one_u32")]
    pub m: u32,
}

fn one_u32() -> u32 {
    1
}

/// One explicit schedule entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ScheduleEntry {
    Couplings { alpha: f64, beta_c: f64 },
    EpsSigma { eps: f64, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Geometric in `ε` from `eps_start` to `eps_end`.
    Generator {
        eps_start: f64,
        eps_end: f64,
        steps: usize,
        sigma_rule: SigmaRule,
    },
    /// Listed `ε` values with `σ` from the rule.
    Eps {
        eps: Vec<f64>,
        sigma_rule: SigmaRule,
    },
    Explicit {
        entries: Vec<ScheduleEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub plot: bool,
}

/// Experiment description read from TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub vortices: Vec<VortexSpec>,
    pub n_frak: f64,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub seed: Seed,
    #[serde(default)]
    pub solver: NewtonOptions,
    #[serde(default)]
    pub diagnostics: DiagnosticsOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    /// Parses by extension (`.toml` or `.json`) and validates.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        let cfg = match ext.as_deref() {
            Some("toml") => Self::from_toml(&text)?,
            Some("json") => Self::from_json(&text)?,
            _ => {
                return Err(Error::Config(format!(
                    "{}: expected a .toml or .json extension",
                    path.display()
                )))
            }
        };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds every derived object once so bad configs fail at parse time.
    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.vortex_set()?;
        self.schedule()?;
        if !(self.solver.tol > 0.0) || self.solver.max_iters == 0 {
            return Err(Error::Config(
                "solver tol and max_iters must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        self.grid.build()
    }

    pub fn vortex_set(&self) -> Result<VortexSet> {
        VortexSet::new(
            self.vortices.iter().map(|v| Point::new(v.x, v.y)).collect(),
            self.vortices.iter().map(|v| v.m).collect(),
        )
    }

    /// The coupling schedule; every entry must satisfy `σ/ε² ≤ 𝔑`.
    pub fn schedule(&self) -> Result<Vec<CouplingParams>> {
        let n = self.n_frak;
        let sched = match &self.schedule {
            ScheduleSpec::Generator {
                eps_start,
                eps_end,
                steps,
                sigma_rule,
            } => geometric_schedule(*eps_start, *eps_end, *steps, *sigma_rule, n)?,
            ScheduleSpec::Eps { eps, sigma_rule } => schedule_from_eps(eps, *sigma_rule, n)?,
            ScheduleSpec::Explicit { entries } => entries
                .iter()
                .map(|e| match *e {
                    ScheduleEntry::Couplings { alpha, beta_c } => {
                        CouplingParams::from_couplings(alpha, beta_c, n)
                    }
                    ScheduleEntry::EpsSigma { eps, sigma } => {
                        CouplingParams::from_eps_sigma(eps, sigma, n)
                    }
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if sched.is_empty() {
            return Err(Error::Config("empty schedule".into()));
        }
        if sched.windows(2).any(|w| w[1].eps > w[0].eps) {
            return Err(Error::Config(
                "schedule must be non-increasing in eps".into(),
            ));
        }
        Ok(sched)
    }

    /// Canonical JSON: keys sorted, no whitespace.
    pub fn canonical_json(&self) -> Result<String> {
        Self::canonical(self)
    }

    fn canonical(cfg: &Self) -> Result<String> {
        // serde_json maps are ordered, so a round trip through Value sorts keys
        let value = serde_json::to_value(cfg)?;
        Ok(serde_json::to_string(&value)?)
    }

    /// SHA-256 of the canonical JSON with the output section cleared, so
    /// the same experiment gets the same id wherever it is written.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output = OutputSpec::default();
        Ok(hex::encode(Sha256::digest(Self::canonical(&c)?.as_bytes())))
    }

    /// First 16 hex digits of [`hash`](Self::hash).
    pub fn run_id(&self) -> Result<String> {
        Ok(self.hash()?[..16].to_string())
    }

    /// Applies `--tol` and `--grid` style overrides.
    pub fn with_overrides(
        mut self,
        tol: Option<f64>,
        grid: Option<(usize, usize)>,
    ) -> Result<Self> {
        if let Some(t) = tol {
            self.solver.tol = t;
        }
        if let Some((nx, ny)) = grid {
            self.grid.nx = nx;
            self.grid.ny = ny;
        }
        self.validate()?;
        Ok(self)
    }
}

/// Parses `N` or `NxM`.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("grid must be N or NxM, got {s:?}"));
    let mut parts = s.split(['x', 'X']);
    let nx: usize = parts
        .next()
        .ok_or_else(bad)?
        .trim()
        .parse()
        .map_err(|_| bad())?;
    let ny = match parts.next() {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => nx,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((nx, ny))
}
