//! CSV readers and writers for the pinned file formats. Numbers are written
//! with 17 significant digits and a `.` decimal separator so that identical
//! runs produce byte-identical files and values round-trip exactly.

use crate::error::{Error, Result};
use crate::protocol::QcgfTable;
use crate::spectral::QpdfTable;
use crate::tmp::TmpDistribution;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

/// 17-significant-digit scientific notation; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV body for a G(χ) table: header `chi,re_g,im_g`, full symmetric grid.
pub fn qcgf_csv(table: &QcgfTable) -> String {
    let mut out = String::with_capacity(table.len() * 64);
    out.push_str("chi,re_g,im_g\n");
    for (chi, g) in table.grid().iter().zip(table.values()) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*chi), fmt_f64(g.re), fmt_f64(g.im));
    }
    out
}

pub fn write_qcgf_csv(table: &QcgfTable, path: &Path) -> Result<()> {
    std::fs::write(path, qcgf_csv(table))?;
    Ok(())
}

/// Parse a stored G(χ) table. Scheme and configuration provenance are not
/// part of the format and come back empty.
pub fn read_qcgf_csv(path: &Path) -> Result<QcgfTable> {
    let text = std::fs::read_to_string(path)?;
    let path_str = path.display().to_string();
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path_str.clone(),
        line: 1,
        message: "empty file, expected header `chi,re_g,im_g`".into(),
    })?;
    if header.trim() != "chi,re_g,im_g" {
        return Err(Error::Parse {
            path: path_str,
            line: 1,
            message: format!("bad header `{header}`, expected `chi,re_g,im_g`"),
        });
    }

    let mut chis = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path_str,
                line: lineno,
                message: format!("expected 3 columns, found {}", fields.len()),
            });
        }
        let parse = |col: &str, s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("column `{col}`: {e}"),
            })
        };
        let chi = parse("chi", fields[0])?;
        let re = parse("re_g", fields[1])?;
        let im = parse("im_g", fields[2])?;
        chis.push(chi);
        values.push(Complex64::new(re, im));
    }
    QcgfTable::from_parts(chis, values, None, None)
}

/// CSV body for a reconstructed density: header `f,p`.
pub fn qpdf_csv(qpdf: &QpdfTable) -> String {
    let mut out = String::with_capacity(qpdf.energies().len() * 48);
    out.push_str("f,p\n");
    for (f, p) in qpdf.energies().iter().zip(qpdf.density()) {
        let _ = writeln!(out, "{},{}", fmt_f64(*f), fmt_f64(*p));
    }
    out
}

pub fn write_qpdf_csv(qpdf: &QpdfTable, path: &Path) -> Result<()> {
    std::fs::write(path, qpdf_csv(qpdf))?;
    Ok(())
}

/// CSV body for a TMP distribution: header `du,q,w,prob`, one row per
/// distinct (ΔU, Q, W) triple, ascending.
pub fn tmp_csv(dist: &TmpDistribution) -> String {
    let mut acc: std::collections::BTreeMap<(i64, i64), f64> = Default::default();
    for o in &dist.outcomes {
        let key = ((2.0 * o.du()).round() as i64, (2.0 * o.q()).round() as i64);
        *acc.entry(key).or_default() += o.probability;
    }
    let mut out = String::from("du,q,w,prob\n");
    for ((du2, q2), prob) in acc {
        let (du, q) = (du2 as f64 / 2.0, q2 as f64 / 2.0);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(du),
            fmt_f64(q),
            fmt_f64(du + q),
            fmt_f64(prob)
        );
    }
    out
}

pub fn write_tmp_csv(dist: &TmpDistribution, path: &Path) -> Result<()> {
    std::fs::write(path, tmp_csv(dist))?;
    Ok(())
}
