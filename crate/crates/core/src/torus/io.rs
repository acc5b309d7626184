//! Field dump formats.
//!
//! Binary: one JSON header line `{"Nx":..,"Ny":..,"Lx":..,"Ly":..,"name":..}`
//! terminated by `\n`, followed by `Nx * Ny` little-endian `f64` values in
//! row-major order. Text: CSV with `x,y,value` columns.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScalarField, TorusGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Ny")]
    pub ny: usize,
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    pub name: String,
}

pub fn write_field(w: &mut impl Write, field: &ScalarField, name: &str) -> Result<()> {
    let g = field.grid();
    let header = DumpHeader {
        nx: g.nx(),
        ny: g.ny(),
        lx: g.lx(),
        ly: g.ly(),
        name: name.to_string(),
    };
    serde_json::to_writer(&mut *w, &header)?;
    w.write_all(b"\n")?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field(r: &mut impl BufRead) -> Result<(DumpHeader, ScalarField)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: DumpHeader = serde_json::from_str(line.trim_end())?;
    let grid = TorusGrid::new(header.lx, header.ly, header.nx, header.ny)?;
    let mut bytes = vec![0u8; grid.len() * 8];
    r.read_exact(&mut bytes)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::InvalidArgument(
            "trailing bytes after field data".into(),
        ));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, ScalarField::from_values(grid, values)?))
}

pub fn save_field(path: &Path, field: &ScalarField, name: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, field, name)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<(DumpHeader, ScalarField)> {
    let mut r = BufReader::new(File::open(path)?);
    read_field(&mut r).map_err(|e| match e {
        Error::Io(_) | Error::Json(_) | Error::InvalidArgument(_) | Error::InvalidGrid(_) => {
            Error::CorruptDump {
                path: path.to_path_buf(),
                message: e.to_string(),
            }
        }
        other => other,
    })
}

/// CSV with `x,y,value` rows in storage order.
pub fn write_csv(w: &mut impl Write, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    writeln!(w, "x,y,value")?;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let p = g.node(i, j);
            writeln!(w, "{:e},{:e},{:e}", p.x, p.y, field.at(i, j))?;
        }
    }
    Ok(())
}
