//! On-disk formats: frequency and sample CSV tables, law tables, and the
//! plain-text mesh and solution dumps.
//!
//! Floating-point columns of the campaign tables use 17 significant digits
//! (`{:.16e}`), which round-trips every `f64` exactly.

use std::io::{self, BufRead, Read, Write};

use relacc_core::laws::ErrorSample;
use relacc_core::meshgen::{Mesh, MeshError};

use crate::experiment::{FrequencyRow, TrialPair};

pub const FREQUENCY_HEADER: [&str; 6] = [
    "h",
    "n_effective",
    "n_failed",
    "frequency",
    "two_steps",
    "sigmoid",
];
pub const SAMPLES_HEADER: [&str; 4] = ["h", "seed", "degree", "error"];
pub const LAWS_HEADER: [&str; 3] = ["h", "two_steps", "sigmoid"];

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header {
        found: Vec<String>,
        expected: Vec<String>,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(field: &str, line: usize) -> Result<f64, FormatError> {
    field.trim().parse().map_err(|_| FormatError::Parse {
        line,
        message: format!("not a number: {field:?}"),
    })
}

fn parse_usize(field: &str, line: usize) -> Result<usize, FormatError> {
    field.trim().parse().map_err(|_| FormatError::Parse {
        line,
        message: format!("not an unsigned integer: {field:?}"),
    })
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), FormatError> {
    let found: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if found != expected {
        return Err(FormatError::Header {
            found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(())
}

pub fn write_frequency_csv<W: Write>(out: W, rows: &[FrequencyRow]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FREQUENCY_HEADER)?;
    for r in rows {
        w.write_record([
            fmt17(r.h),
            r.n_effective.to_string(),
            r.n_failed.to_string(),
            fmt17(r.frequency),
            fmt17(r.two_steps),
            fmt17(r.sigmoid),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_frequency_csv<R: Read>(input: R) -> Result<Vec<FrequencyRow>, FormatError> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &FREQUENCY_HEADER)?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let line = i + 2;
            Ok(FrequencyRow {
                h: parse_f64(&rec[0], line)?,
                n_effective: parse_usize(&rec[1], line)?,
                n_failed: parse_usize(&rec[2], line)?,
                frequency: parse_f64(&rec[3], line)?,
                two_steps: parse_f64(&rec[4], line)?,
                sigmoid: parse_f64(&rec[5], line)?,
            })
        })
        .collect()
}

/// Writes both samples of every trial, `P_k` first.
pub fn write_samples_csv<W: Write>(out: W, pairs: &[TrialPair]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLES_HEADER)?;
    for s in pairs.iter().flat_map(|p| [p.k, p.m]) {
        w.write_record([
            fmt17(s.h),
            s.seed.to_string(),
            s.degree.to_string(),
            fmt17(s.error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<ErrorSample>, FormatError> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &SAMPLES_HEADER)?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let line = i + 2;
            Ok(ErrorSample {
                h: parse_f64(&rec[0], line)?,
                seed: rec[1].trim().parse().map_err(|_| FormatError::Parse {
                    line,
                    message: format!("bad seed {:?}", &rec[1]),
                })?,
                degree: parse_usize(&rec[2], line)?,
                error: parse_f64(&rec[3], line)?,
            })
        })
        .collect()
}

/// `(h, two_steps, sigmoid)` rows, shortest round-trip decimal formatting.
pub fn write_laws_csv<W: Write>(out: W, rows: &[(f64, f64, f64)]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LAWS_HEADER)?;
    for (h, two_steps, sigmoid) in rows {
        w.write_record([h.to_string(), two_steps.to_string(), sigmoid.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_laws_csv<R: Read>(input: R) -> Result<Vec<(f64, f64, f64)>, FormatError> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &LAWS_HEADER)?;
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let line = i + 2;
            Ok((
                parse_f64(&rec[0], line)?,
                parse_f64(&rec[1], line)?,
                parse_f64(&rec[2], line)?,
            ))
        })
        .collect()
}

/// `mesh h_actual=<h> seed=<s>`, then `v x y` per vertex and `t i j k` per
/// triangle with 0-based indices.
pub fn write_mesh_dump<W: Write>(mut out: W, mesh: &Mesh) -> io::Result<()> {
    writeln!(out, "mesh h_actual={} seed={}", mesh.h_actual(), mesh.seed())?;
    for [x, y] in mesh.vertices() {
        writeln!(out, "v {x} {y}")?;
    }
    for [a, b, c] in mesh.triangles() {
        writeln!(out, "t {a} {b} {c}")?;
    }
    out.flush()
}

pub fn read_mesh_dump<R: BufRead>(input: R) -> Result<Mesh, FormatError> {
    let mut seed = None;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("mesh") => {
                for kv in fields {
                    if let Some(v) = kv.strip_prefix("seed=") {
                        seed = Some(v.parse::<u64>().map_err(|_| FormatError::Parse {
                            line: n,
                            message: format!("bad seed {v:?}"),
                        })?);
                    }
                }
            }
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() != 2 {
                    return Err(FormatError::Parse {
                        line: n,
                        message: "vertex needs two coordinates".into(),
                    });
                }
                vertices.push([parse_f64(coords[0], n)?, parse_f64(coords[1], n)?]);
            }
            Some("t") => {
                let idx: Vec<&str> = fields.collect();
                if idx.len() != 3 {
                    return Err(FormatError::Parse {
                        line: n,
                        message: "triangle needs three indices".into(),
                    });
                }
                triangles.push([
                    parse_usize(idx[0], n)?,
                    parse_usize(idx[1], n)?,
                    parse_usize(idx[2], n)?,
                ]);
            }
            None => {}
            Some(other) => {
                return Err(FormatError::Parse {
                    line: n,
                    message: format!("unknown record {other:?}"),
                })
            }
        }
    }
    let seed = seed.ok_or(FormatError::Parse {
        line: 1,
        message: "missing `mesh` header".into(),
    })?;
    Ok(Mesh::from_raw(vertices, triangles, seed)?)
}

/// `dof <index> <value>` per global degree of freedom.
pub fn write_solution_dump<W: Write>(mut out: W, coefficients: &[f64]) -> io::Result<()> {
    for (i, v) in coefficients.iter().enumerate() {
        writeln!(out, "dof {i} {v}")?;
    }
    out.flush()
}
