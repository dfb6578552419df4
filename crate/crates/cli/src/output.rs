//! CSV and JSON artifacts. Numbers are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hypstab::lopatinski::ScanResult;
use serde::Serialize;

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Long-format scan table, one row per grid point.
pub fn scan_csv(scan: &ScanResult, dim_eta: usize) -> String {
    let mut s = String::from("tau");
    for k in 1..=dim_eta {
        let _ = write!(s, ",eta_{k}");
    }
    s.push_str(",gamma,abs_d,converged\n");
    for p in &scan.points {
        s.push_str(&num(p.zeta.tau));
        for e in &p.zeta.eta {
            s.push(',');
            s.push_str(&num(*e));
        }
        let _ = writeln!(s, ",{},{},{}", num(p.zeta.gamma), num(p.abs_d), p.converged as u8);
    }
    s
}

#[derive(Serialize)]
struct Sidecar<'a, M: Serialize> {
    points: usize,
    min: Option<f64>,
    argmin: Option<&'a hypstab::boundary::Frequency>,
    refined: Option<&'a hypstab::lopatinski::ScanPoint>,
    overall_min: Option<f64>,
    gamma_floor: f64,
    failed_points: usize,
    unconverged_points: usize,
    metadata: M,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Write `<stem>.csv` and the `<stem>.json` sidecar with min and argmin.
pub fn emit_plot_data<M: Serialize>(scan: &ScanResult, dim_eta: usize, dir: &Path, stem: &str, metadata: M) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, scan_csv(scan, dim_eta))?;
    let side = Sidecar {
        points: scan.points.len(),
        min: finite(scan.min_value),
        argmin: scan.argmin.as_ref(),
        refined: scan.refined.as_ref(),
        overall_min: finite(scan.overall_min()),
        gamma_floor: scan.gamma_floor,
        failed_points: scan.points.iter().filter(|p| p.error.is_some()).count(),
        unconverged_points: scan.points.iter().filter(|p| !p.converged).count(),
        metadata,
    };
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, &side)?;
    Ok(vec![csv, json])
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Plain CSV from a header and preformatted rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}
