//! Report emission. JSON goes through serde_json; CSV is written by hand with
//! every float in `{:.16e}` form (17 significant digits, '.' decimal).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::harnack::HarnackReport;
use crate::solver1d::{GridFunction, LinearSystem};

pub const HARNACK_CSV_HEADER: &str = "s,sample_id,sup,inf,avg,tail,C_estimate";

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// One row per report. A missing estimate is written as `trivial`.
pub fn harnack_csv<'a>(reports: impl IntoIterator<Item = &'a HarnackReport>) -> String {
    let mut out = String::from(HARNACK_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let c = r.c_estimate.map_or_else(|| "trivial".to_string(), fmt17);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(r.s),
            r.sample_id,
            fmt17(r.sup),
            fmt17(r.inf),
            fmt17(r.avg),
            fmt17(r.tail_term),
            c
        );
    }
    out
}

pub fn solution_csv(u: &GridFunction) -> String {
    let mut out = String::from("x,u\n");
    for (x, v) in u.mesh.centers().iter().zip(u.values.iter()) {
        let _ = writeln!(out, "{},{}", fmt17(*x), fmt17(*v));
    }
    out
}

/// Rows `(x, z, P, ratio)`.
pub fn poisson_csv(rows: &[(f64, f64, f64, f64)]) -> String {
    let mut out = String::from("x,z,P,ratio\n");
    for (x, z, p, ratio) in rows {
        let _ = writeln!(out, "{},{},{},{}", fmt17(*x), fmt17(*z), fmt17(*p), fmt17(*ratio));
    }
    out
}

/// Dense dump: a header line, then `i,center,width,rhs,a_i0,...,a_i(N-1)` per row.
pub fn matrix_dump(system: &LinearSystem) -> String {
    let n = system.matrix.nrows();
    let mut out = format!("# rows={n} assembly_error={}\n", fmt17(system.assembly_error));
    out.push_str("i,center,width,rhs");
    for j in 0..n {
        let _ = write!(out, ",a{j}");
    }
    out.push('\n');
    for i in 0..n {
        let _ = write!(
            out,
            "{i},{},{},{}",
            fmt17(system.centers[i]),
            fmt17(system.widths[i]),
            fmt17(system.rhs[i])
        );
        for j in 0..n {
            let _ = write!(out, ",{}", fmt17(system.matrix[(i, j)]));
        }
        out.push('\n');
    }
    out
}
