use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial::{default_r_max, lemma21_identities, shoot, BoundaryClass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialRow {
    pub m: u32,
    pub s: f64,
    pub beta: f64,
    pub decay_rate: f64,
    pub boundary_class: BoundaryClass,
    pub e2w_rel_error: Option<f64>,
    pub ew_rel_error: Option<f64>,
    pub mass: f64,
    pub mass_bound: f64,
    /// `None` when the identities do not apply (no logarithmic tail).
    pub identities_hold: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialTable {
    pub rows: Vec<RadialRow>,
    /// `β` strictly increasing in `s` over the log-divergent rows.
    pub monotone: bool,
    pub rel_tol: f64,
}

impl RadialTable {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.identities_hold != Some(false))
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "m",
            "s",
            "beta",
            "decay_rate",
            "class",
            "e2w_rel_error",
            "ew_rel_error",
            "mass",
            "mass_bound",
            "identities_hold",
        ])
        .map_err(csv_err)?;
        let opt = |v: Option<f64>| v.map_or("".to_string(), |x| format!("{x:e}"));
        for r in &self.rows {
            out.write_record([
                r.m.to_string(),
                r.s.to_string(),
                format!("{:.12}", r.beta),
                format!("{:.12}", r.decay_rate),
                format!("{:?}", r.boundary_class),
                opt(r.e2w_rel_error),
                opt(r.ew_rel_error),
                format!("{:.12}", r.mass),
                format!("{:.12}", r.mass_bound),
                r.identities_hold.map_or("n/a".into(), |b| b.to_string()),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Shoots every `s` and checks the flux identities at relative `rel_tol`.
pub fn radial_table(
    m: u32,
    s_list: &[f64],
    r_max: Option<f64>,
    tol: f64,
    rel_tol: f64,
) -> Result<RadialTable> {
    if s_list.is_empty() {
        return Err(Error::InvalidArgument("no shooting values given".into()));
    }
    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let p = shoot(m, s, r_max.unwrap_or_else(|| default_r_max(s)), tol)?;
        let row = match lemma21_identities(&p) {
            Ok(id) => RadialRow {
                m,
                s,
                beta: p.beta,
                decay_rate: p.decay_rate(),
                boundary_class: p.boundary_class,
                e2w_rel_error: Some(id.e2w_rel_error()),
                ew_rel_error: Some(id.ew_rel_error()),
                mass: id.mass,
                mass_bound: id.mass_bound,
                identities_hold: Some(id.holds(rel_tol)),
            },
            Err(Error::NotApplicable(_)) => RadialRow {
                m,
                s,
                beta: p.beta,
                decay_rate: p.decay_rate(),
                boundary_class: p.boundary_class,
                e2w_rel_error: None,
                ew_rel_error: None,
                mass: p.mass(),
                mass_bound: 8.0 * std::f64::consts::PI * (1.0 + m as f64),
                identities_hold: None,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    let mut divergent: Vec<&RadialRow> = rows
        .iter()
        .filter(|r| r.boundary_class == BoundaryClass::LogDivergent)
        .collect();
    divergent.sort_by(|a, b| a.s.total_cmp(&b.s));
    let monotone = divergent.windows(2).all(|w| w[1].beta > w[0].beta);
    Ok(RadialTable {
        rows,
        monotone,
        rel_tol,
    })
}
