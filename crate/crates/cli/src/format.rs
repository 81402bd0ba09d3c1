//! Report and CSV rendering.

use std::fmt::Write as _;
use std::path::Path;

use hinf_pi::linalg::Matrix;

use crate::error::CliError;

/// Six significant digits, `%g` style.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

/// Labelled matrix block, columns right-aligned.
pub fn matrix(m: &Matrix<f64>, row_labels: &[String], col_labels: &[String]) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| sig(m[(i, j)])).collect())
        .collect();
    let width = cells
        .iter()
        .flatten()
        .map(String::len)
        .chain(col_labels.iter().map(String::len))
        .max()
        .unwrap_or(1);
    let lead = row_labels.iter().map(String::len).max().unwrap_or(0);
    let mut out = format!("  {:lead$}", "");
    for c in col_labels {
        let _ = write!(out, "  {c:>width$}");
    }
    out.push('\n');
    for (label, row) in row_labels.iter().zip(&cells) {
        let _ = write!(out, "  {label:<lead$}");
        for v in row {
            let _ = write!(out, "  {v:>width$}");
        }
        out.push('\n');
    }
    out
}

/// `*` where `m` is nonzero, `.` elsewhere.
pub fn pattern(m: &Matrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        out.push_str("  ");
        for j in 0..m.cols() {
            out.push(if m[(i, j)] != 0.0 { '*' } else { '.' });
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), CliError> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    write_file(path, &text)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
