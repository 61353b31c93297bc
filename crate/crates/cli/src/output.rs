//! Atomic file output and the CSV / field dump formats.
//!
//! CSV files are UTF-8 with a header row, '.' decimals and '\n' line endings.
//! Floats use the shortest representation that round-trips.

use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use singlepeak_core::{ComplexField, GammaLandscape, ReducedSolution};
use tempfile::NamedTempFile;

use crate::CliError;

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::Csv(e.to_string()))
}

fn xi_headers(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|k| format!("xi_{k}"))
}

/// One row per sample, mu-major. Failed samples carry NaN and their error.
pub fn landscape_csv(land: &GammaLandscape) -> Result<Vec<u8>, CliError> {
    let n = land.grid.origin.len();
    let mut w = writer();
    let mut header = vec!["mu".to_string()];
    header.extend(xi_headers(n));
    header.extend(["gamma", "g2_part", "correction_part", "quad_err", "error"].map(String::from));
    w.write_record(&header).map_err(|e| CliError::Csv(e.to_string()))?;
    for s in &land.samples {
        let mut row = vec![s.mu.to_string()];
        row.extend(s.xi.iter().map(f64::to_string));
        row.extend([s.gamma, s.g2_part, s.correction_part, s.quadrature_error].map(|v| v.to_string()));
        row.push(s.error.clone().unwrap_or_default());
        w.write_record(&row).map_err(|e| CliError::Csv(e.to_string()))?;
    }
    finish(w)
}

/// One assembled solution per row.
pub struct SolutionRow<'a> {
    pub kind: &'a str,
    pub solution: &'a ReducedSolution,
}

pub fn solutions_csv(dim: usize, rows: &[SolutionRow<'_>]) -> Result<Vec<u8>, CliError> {
    let mut w = writer();
    let mut header = vec!["eps".to_string(), "mu".to_string()];
    header.extend(xi_headers(dim));
    header.extend(["kind", "gamma", "f_eps", "residual_perp", "residual_tangent"].map(String::from));
    w.write_record(&header).map_err(|e| CliError::Csv(e.to_string()))?;
    for r in rows {
        let s = r.solution;
        let mut row = vec![s.eps.to_string(), s.bubble.mu().to_string()];
        row.extend(s.bubble.xi().iter().map(f64::to_string));
        row.push(r.kind.to_string());
        row.extend([s.gamma, s.energy.f_eps, s.residual_perp, s.residual_tangent].map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| CliError::Csv(e.to_string()))?;
    }
    finish(w)
}

/// Text dump of a field in its bubble frame.
///
/// ```text
/// # singlepeak field
/// dimension 5
/// kmax 8
/// radial_nodes 64
/// kind primal
/// frame_mu 0.5
/// frame_xi 0 0 0 0 0
/// channel degree r re im
/// 0 0 0.0123 0.98 0
/// ...
/// ```
///
/// Values are the unit-frame profiles U_c(r) of each harmonic channel c, so
/// u(x) = mu^{-(N-2)/2} sum_c U_c(|y|) Y_c(y/|y|) with y = (x - xi)/mu.
pub fn field_dump(u: &ComplexField, meta: &[(&str, String)]) -> Vec<u8> {
    use std::fmt::Write as _;
    let basis = u.basis();
    let frame = u.frame();
    let mut s = String::new();
    let _ = writeln!(s, "# singlepeak field");
    let _ = writeln!(s, "dimension {}", basis.dim().n());
    let _ = writeln!(s, "kmax {}", basis.kmax());
    let _ = writeln!(s, "radial_nodes {}", basis.n_radial());
    let kind = match u.kind() {
        singlepeak_core::FieldKind::Primal => "primal",
        singlepeak_core::FieldKind::Dual => "dual",
    };
    let _ = writeln!(s, "kind {kind}");
    let _ = writeln!(s, "frame_mu {}", frame.mu);
    let xi: Vec<String> = frame.xi.iter().map(f64::to_string).collect();
    let _ = writeln!(s, "frame_xi {}", xi.join(" "));
    for (k, v) in meta {
        let _ = writeln!(s, "{k} {v}");
    }
    let _ = writeln!(s, "channel degree r re im");
    let nodes = basis.radial().nodes();
    for c in 0..basis.n_channels() {
        let l = basis.harmonics().degree(c);
        for (r, v) in nodes.iter().zip(u.profile(c)) {
            let v: &Complex64 = v;
            let _ = writeln!(s, "{c} {l} {r} {} {}", v.re, v.im);
        }
    }
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn csv_uses_newline_terminator() {
        let mut w = writer();
        w.write_record(["a", "b"]).unwrap();
        w.write_record([f64::NAN.to_string(), 0.1.to_string()]).unwrap();
        assert_eq!(finish(w).unwrap(), b"a,b\nNaN,0.1\n");
    }
}
