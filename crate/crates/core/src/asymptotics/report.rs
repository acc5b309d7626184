use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    blowup::{detect_blowup_points, local_mass, DEFAULT_BLOWUP_MARGIN},
    check_run, classify_second_records, gradient_bounds_records,
    pohozaev::{pohozaev_residual, PohozaevOptions, PohozaevRecord},
    step_record, FirstClass, FirstClassification, GradientBounds, SecondClass,
    SecondClassification, StepRecord, DEFAULT_VORTEX_RADIUS, MIN_CLASSIFY_STEPS,
    MIN_GRADIENT_STEPS,
};
use crate::error::{Error, Result};
use crate::solver::{integral_identity_check, IntegralCheck, SolutionPair};
use crate::torus::Point;

/// Slack below `8π` accepted for a quantized site.
pub const QUANTIZATION_SLACK: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticsOptions {
    pub vortex_radius: f64,
    pub blowup_margin: f64,
    /// Radius of the local-mass balls (shrunk when sites are close).
    pub local_mass_radius: f64,
    pub pohozaev_radius: f64,
    pub pohozaev: PohozaevOptions,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            vortex_radius: DEFAULT_VORTEX_RADIUS,
            blowup_margin: DEFAULT_BLOWUP_MARGIN,
            local_mass_radius: 0.2,
            pohozaev_radius: 0.2,
            pohozaev: PohozaevOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteRecord {
    pub point: Point,
    pub w1_peak: f64,
    pub prominence: f64,
    pub radius: f64,
    pub local_mass: f64,
    /// `local_mass ≥ 8π - QUANTIZATION_SLACK`.
    pub quantized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// `𝔐`, `𝔑` and `|𝕋|`.
    pub total_multiplicity: u32,
    pub n_frak: f64,
    pub area: f64,
    pub branch: String,
    pub steps: Vec<StepRecord>,
    pub identities: Vec<IntegralCheck>,
    pub first_class: FirstClass,
    pub second_class: SecondClass,
    pub first: Option<FirstClassification>,
    pub second: Option<SecondClassification>,
    /// Sites at the last step.
    pub blowup_sites: Vec<SiteRecord>,
    /// Balances at the last step, one per vortex and site.
    pub pohozaev: Vec<PohozaevRecord>,
    pub gradient: Option<GradientBounds>,
    pub notes: Vec<String>,
}

/// Full diagnostics of a run ordered by decreasing `ε`. Runs too short for a
/// classification get `undetermined` labels and a note instead of an error.
pub fn diagnose(run: &[SolutionPair], opts: &DiagnosticsOptions) -> Result<DiagnosticsReport> {
    let last = run
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty run".into()))?;
    let mut notes = Vec::new();
    let steps: Vec<StepRecord> = run.iter().map(step_record).collect();
    let identities = run
        .iter()
        .map(integral_identity_check)
        .collect::<Result<Vec<_>>>()?;

    let varies = match check_run(run, MIN_CLASSIFY_STEPS) {
        Ok(v) => Some(v),
        Err(Error::TooFewSteps { needed, got }) => {
            notes.push(format!(
                "classification needs {needed} steps, run has {got}"
            ));
            None
        }
        Err(e) => return Err(e),
    };
    if varies == Some(false) {
        notes.push("eps does not change across the run".into());
    }
    let second = match varies {
        Some(v) => Some(classify_second_records(&steps, v)?),
        None => None,
    };
    let first = match varies {
        Some(_) => Some(super::classify_first(run, opts.vortex_radius)?),
        None => None,
    };
    let second_class = second.map_or(SecondClass::Undetermined, |s| s.class);
    let mut first_class = first.as_ref().map_or(FirstClass::Undetermined, |f| f.class);

    let blowup_sites = site_records(last, opts, &mut notes)?;
    if first_class == FirstClass::F3
        && (blowup_sites.is_empty() || blowup_sites.iter().any(|s| !s.quantized))
    {
        notes.push("f3 demoted: a site falls short of the 8π mass".into());
        first_class = FirstClass::Undetermined;
    }

    let mut centers: Vec<Point> = last.vortices.points().to_vec();
    centers.extend(blowup_sites.iter().map(|s| s.point));
    let mut pohozaev = Vec::new();
    for c in centers {
        match pohozaev_residual(last, c, opts.pohozaev_radius, second_class, &opts.pohozaev) {
            Ok(r) => pohozaev.push(r),
            Err(e) => notes.push(format!("Pohozaev at ({:.4}, {:.4}) skipped: {e}", c.x, c.y)),
        }
    }

    let gradient = if run.len() >= MIN_GRADIENT_STEPS {
        Some(gradient_bounds_records(&steps))
    } else {
        None
    };

    Ok(DiagnosticsReport {
        total_multiplicity: last.vortices.total(),
        n_frak: last.params.n_frak,
        area: last.grid().area(),
        branch: last.branch.to_string(),
        steps,
        identities,
        first_class,
        second_class,
        first,
        second,
        blowup_sites,
        pohozaev,
        gradient,
        notes,
    })
}

fn site_records(
    sol: &SolutionPair,
    opts: &DiagnosticsOptions,
    notes: &mut Vec<String>,
) -> Result<Vec<SiteRecord>> {
    let sites = detect_blowup_points(sol, opts.blowup_margin);
    let grid = *sol.grid();
    let mut d = opts.local_mass_radius;
    let mut closest = f64::INFINITY;
    for (i, a) in sites.iter().enumerate() {
        for b in &sites[i + 1..] {
            closest = closest.min(grid.distance(a.point, b.point));
        }
    }
    if 2.0 * d >= closest {
        let shrunk = 0.45 * closest;
        log::warn!("local-mass balls overlap, radius shrunk from {d} to {shrunk}");
        notes.push(format!("local-mass radius shrunk to {shrunk:.4}"));
        d = shrunk;
    }
    sites
        .iter()
        .map(|s| {
            let mass = local_mass(sol, s.point, d)?;
            Ok(SiteRecord {
                point: s.point,
                w1_peak: s.w1_peak,
                prominence: s.prominence,
                radius: d,
                local_mass: mass,
                quantized: mass >= 8.0 * PI - QUANTIZATION_SLACK,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct CsvRow<'a> {
    eps: f64,
    sigma: f64,
    #[serde(rename = "I1")]
    i1: f64,
    #[serde(rename = "I2")]
    i2: f64,
    sup_u1: f64,
    sup_u2: f64,
    norm_u2: f64,
    sup_w1: f64,
    sup_w2: f64,
    grad_v1_scaled: f64,
    grad_u2: f64,
    residual_inf: f64,
    spurious: bool,
    first_class: &'a str,
    second_class: &'a str,
}

impl DiagnosticsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-step summary table with the final labels repeated on every row.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let first = self.first_class.to_string();
        let second = self.second_class.to_string();
        let mut out = csv::Writer::from_writer(w);
        for s in &self.steps {
            out.serialize(CsvRow {
                eps: s.eps,
                sigma: s.sigma,
                i1: s.i1,
                i2: s.i2,
                sup_u1: s.sup_u1,
                sup_u2: s.sup_u2,
                norm_u2: s.norm_u2,
                sup_w1: s.sup_w1,
                sup_w2: s.sup_w2,
                grad_v1_scaled: s.grad_v1_scaled,
                grad_u2: s.grad_u2,
                residual_inf: s.residual_inf,
                spurious: s.spurious,
                first_class: &first,
                second_class: &second,
            })
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Invariant violations at relative slack `rel_tol`: mass bounds, sign
    /// of the fields, the integrated identities and site quantization.
    /// `I₁` is checked against `8π𝔐 + i1_cross`, which the integrated first
    /// equation guarantees; the bare `8π𝔐` bound fails whenever `σ > 0`.
    pub fn violations(&self, rel_tol: f64) -> Vec<String> {
        let mut v = Vec::new();
        let cap1 = 8.0 * PI * self.total_multiplicity as f64;
        let cap2 = 2.0 * self.n_frak * self.area;
        for (s, id) in self.steps.iter().zip(&self.identities) {
            let cap = cap1 + s.i1_cross;
            if s.i1 > cap * (1.0 + rel_tol) {
                v.push(format!(
                    "eps={}: I1 = {} exceeds 8πM + cross = {cap}",
                    s.eps, s.i1
                ));
            }
            if s.i2 > cap2 * (1.0 + rel_tol) {
                v.push(format!(
                    "eps={}: I2 = {} exceeds 2N|T| = {cap2}",
                    s.eps, s.i2
                ));
            }
            if s.i1 < 0.0 || s.i2 < 0.0 {
                v.push(format!("eps={}: negative mass integral", s.eps));
            }
            if s.spurious {
                v.push(format!("eps={}: solution is not negative", s.eps));
            }
            if !id.holds(rel_tol) {
                v.push(format!(
                    "eps={}: integrated identities off by {:.3e}, {:.3e}",
                    s.eps,
                    id.rel1(),
                    id.rel2()
                ));
            }
        }
        if self.first_class == FirstClass::F3 && !self.blowup_sites.iter().any(|s| s.quantized) {
            v.push("f3 without a quantized site".into());
        }
        v
    }

    /// Largest `|u₁|` outside the vortex balls at the last step, if known.
    pub fn final_far_field(&self) -> Option<f64> {
        self.first
            .as_ref()
            .and_then(|f| f.far_field.last().copied())
    }
}
