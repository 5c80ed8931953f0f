use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use brems::spectrum::{Axis, EmissionGrid, PeakCurve};

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `out.csv` -> `out.coherent.csv`
pub fn with_suffix(path: &Path, suffix: &str, extension: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.{extension}"))
}

fn display_axis(axis: &Axis) -> (String, Vec<f64>) {
    if axis.unit == "rad" {
        // rounding hides the degree -> radian -> degree round trip
        let degrees = axis.values.iter().map(|v| (v.to_degrees() * 1e9).round() / 1e9).collect();
        (format!("{} (deg)", axis.name), degrees)
    } else {
        (format!("{} ({})", axis.name, axis.unit), axis.values.clone())
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Metadata as `#` comment lines, `axis_2` values as the header row and
/// `axis_1` values down the first column. Missing cells are left empty.
pub fn grid_csv(grid: &EmissionGrid, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    let (name_1, values_1) = display_axis(&grid.axis_1);
    let (name_2, values_2) = display_axis(&grid.axis_2);
    let m = &grid.metadata;
    let _ = writeln!(out, "# mode: {}", m.mode.name());
    let _ = writeln!(out, "# xi_rad: {}", m.xi);
    let _ = writeln!(out, "# unit: {}", m.unit);
    for (name, value) in &m.fixed {
        let _ = writeln!(out, "# {name}: {value}");
    }
    let q = &m.quadrature;
    let _ = writeln!(
        out,
        "# quadrature: n_theta={} n_phi={} refine_tol={:e} max_doublings={}",
        q.n_theta, q.n_phi, q.refine_tol, q.max_doublings
    );
    let _ = writeln!(
        out,
        "# near_singular: {}  unconverged: {}  missing: {}",
        m.near_singular, m.unconverged, m.missing
    );
    let _ = writeln!(out, "# rows: {name_1}  columns: {name_2}");
    out.push_str(&grid.axis_1.name);
    out.push('\\');
    out.push_str(&grid.axis_2.name);
    for v in &values_2 {
        let _ = write!(out, ",{v}");
    }
    out.push('\n');
    for (label, row) in values_1.iter().zip(&grid.values) {
        let _ = write!(out, "{label}");
        for v in row {
            out.push(',');
            out.push_str(&cell(*v));
        }
        out.push('\n');
    }
    out
}

/// 16-bit binary PGM, one pixel per cell with `axis_1` down the rows.
/// Values are min-max scaled; the scale sits in a header comment and
/// missing cells are written as 0.
pub fn grid_pgm(grid: &EmissionGrid, label: &str) -> Vec<u8> {
    let (rows, cols) = grid.shape();
    let present = grid.values.iter().flatten().flatten().copied();
    let (min, max) = present.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = max - min;
    let mut out = format!(
        "P5\n# {label} unit={} min={:e} max={:e} value=min+pixel/65535*(max-min) missing=0\n{cols} {rows}\n65535\n",
        grid.metadata.unit, min, max
    )
    .into_bytes();
    for row in &grid.values {
        for v in row {
            let level = match v {
                Some(v) if span > 0.0 => ((v - min) / span * 65535.0).round() as u16,
                _ => 0,
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn peaks_csv(curve: &PeakCurve, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str("omega_kev,coherent_peak_deg,incoherent_peak_deg\n");
    for ((w, c), i) in curve.energies.iter().zip(&curve.coherent).zip(&curve.incoherent) {
        let _ = writeln!(
            out,
            "{w},{},{}",
            cell(c.map(f64::to_degrees)),
            cell(i.map(f64::to_degrees))
        );
    }
    out
}
