//! Plain-text file formats.
//!
//! SFM file: a header line `N K`, then `N` lines of `K` space-separated
//! `0`/`1` digits. Column `k` (1-based in the file) is packet `p_k`, which
//! is index `k - 1` in the library.
//!
//! Matrix file: a header line `U K q`, then `U` lines of `K`
//! space-separated integer-encoded field elements. `U = 0` is a header-only
//! file. Extension fields use the default reduction polynomial unless the
//! caller supplies one.
//!
//! Blank lines and lines starting with `#` are ignored in both.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use dlnc_core::gf::{Field, GfError};
use dlnc_core::linalg::{CodingMatrix, LinalgError};
use dlnc_core::model::{ModelError, ReceptionInstance};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("expected {expected} data lines, found {found}")]
    LineCount { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Matrix(#[from] LinalgError),
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn numbers<T: std::str::FromStr>(line: usize, text: &str) -> Result<Vec<T>, FormatError> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| FormatError::Syntax { line, message: format!("`{tok}` is not a valid number") })
        })
        .collect()
}

fn header<const N: usize>(line: usize, text: &str, names: &str) -> Result<[usize; N], FormatError> {
    let values: Vec<usize> = numbers(line, text)?;
    values.try_into().map_err(|_| FormatError::Syntax { line, message: format!("header must be `{names}`") })
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn parse_instance(text: &str) -> Result<ReceptionInstance, FormatError> {
    let mut lines = content_lines(text);
    let (hline, htext) = lines.next().ok_or(FormatError::Syntax { line: 1, message: "empty file".into() })?;
    let [receivers, packets] = header(hline, htext, "N K")?;
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(receivers);
    for (line, text) in lines {
        let row: Vec<u8> = numbers(line, text)?;
        if row.len() != packets {
            return Err(FormatError::Syntax {
                line,
                message: format!("expected {packets} entries, found {}", row.len()),
            });
        }
        if let Some(v) = row.iter().find(|&&v| v > 1) {
            return Err(FormatError::Syntax { line, message: format!("entry {v} is not 0 or 1") });
        }
        rows.push(row);
    }
    if rows.len() != receivers {
        return Err(FormatError::LineCount { expected: receivers, found: rows.len() });
    }
    Ok(ReceptionInstance::from_rows(packets, &rows)?)
}

pub fn read_instance(path: &Path) -> Result<ReceptionInstance, FormatError> {
    parse_instance(&read(path)?)
}

pub fn format_instance(instance: &ReceptionInstance) -> String {
    let mut out = format!("{} {}\n", instance.receivers(), instance.packets());
    for row in instance.rows() {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str, modulus: Option<u32>) -> Result<CodingMatrix, FormatError> {
    let mut lines = content_lines(text);
    let (hline, htext) = lines.next().ok_or(FormatError::Syntax { line: 1, message: "empty file".into() })?;
    let [rows, cols, q] = header(hline, htext, "U K q")?;
    let field = Field::with_modulus(q as u32, modulus)?;
    let mut values = Vec::with_capacity(rows * cols);
    let mut found = 0;
    for (line, text) in lines {
        let row: Vec<u32> = numbers(line, text)?;
        if row.len() != cols {
            return Err(FormatError::Syntax { line, message: format!("expected {cols} entries, found {}", row.len()) });
        }
        for v in row {
            values.push(field.element(v).map_err(|e| FormatError::Syntax { line, message: e.to_string() })?.value());
        }
        found += 1;
    }
    if found != rows {
        return Err(FormatError::LineCount { expected: rows, found });
    }
    Ok(CodingMatrix::from_values(field, rows, cols, values)?)
}

pub fn read_matrix(path: &Path, modulus: Option<u32>) -> Result<CodingMatrix, FormatError> {
    parse_matrix(&read(path)?, modulus)
}

pub fn format_matrix(matrix: &CodingMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", matrix.rows(), matrix.cols(), matrix.field().order());
    for r in 0..matrix.rows() {
        let line: Vec<String> = matrix.row(r).iter().map(u8::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_text_round_trip() {
        let text = "# two receivers\n2 3\n0 1 1\n\n1 0 0\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.receivers(), 2);
        assert!(inst.lost(0, 1) && inst.lost(0, 2) && inst.lost(1, 0));
        assert_eq!(format_instance(&inst), "2 3\n0 1 1\n1 0 0\n");
    }

    #[test]
    fn instance_errors_carry_line_numbers() {
        let err = parse_instance("2 3\n0 1 1\n1 0\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 3, .. }), "{err}");
        let err = parse_instance("2 3\n0 1 2\n1 0 0\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 2, .. }));
        let err = parse_instance("2 3\n0 1 1\n").unwrap_err();
        assert!(matches!(err, FormatError::LineCount { expected: 2, found: 1 }));
        assert!(parse_instance("2\n").is_err());
        assert!(parse_instance("").is_err());
        assert!(parse_instance("1 x\n").is_err());
    }

    #[test]
    fn matrix_text_round_trip() {
        let text = "2 3 8\n1 0 7\n0 5 1\n";
        let m = parse_matrix(text, None).unwrap();
        assert_eq!(m.field().order(), 8);
        assert_eq!(m.row(0), &[1, 0, 7]);
        assert_eq!(format_matrix(&m), text);

        let empty = parse_matrix("0 4 2\n", None).unwrap();
        assert_eq!((empty.rows(), empty.cols()), (0, 4));
        assert_eq!(format_matrix(&empty), "0 4 2\n");
    }

    #[test]
    fn matrix_errors() {
        assert!(matches!(parse_matrix("1 2 3\n0 3\n", None), Err(FormatError::Syntax { line: 2, .. })));
        assert!(matches!(parse_matrix("1 2 6\n0 1\n", None), Err(FormatError::Field(GfError::NotPrimePower(6)))));
        assert!(matches!(parse_matrix("2 2 2\n0 1\n", None), Err(FormatError::LineCount { .. })));
        assert!(matches!(parse_matrix("1 2 4\n0 1\n", Some(5)), Err(FormatError::Field(_))));
    }
}
