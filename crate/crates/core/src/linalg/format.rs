//! Plain-text matrix interchange format.
//!
//! ```text
//! 2 3
//! 1 0 -2.5
//! 0 1e-3 4
//! ```
//!
//! The header holds `rows cols`; each following line holds one row of
//! whitespace-separated tokens. Complex entries are written `a+bi` / `a-bi`
//! (or `bi` for purely imaginary values). Blank lines and lines starting with
//! `#` are ignored. Only `.` is accepted as the decimal separator.

use std::fmt::Write as _;
use std::path::Path;

use super::operator::{CMatrix, DenseOperator, C64};
use crate::error::{Error, Result};

pub fn parse_matrix(text: &str) -> Result<DenseOperator> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| Error::parse(None, "empty matrix document"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::parse(
            Some(header_line),
            format!("expected `rows cols`, found {header:?}"),
        ));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(Some(header_line), format!("invalid dimension {s:?}")))
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;

    let mut m = CMatrix::zeros(rows, cols);
    // Rows of a matrix without columns are empty lines, which the reader skips.
    let row_lines = if cols == 0 { 0 } else { rows };
    for r in 0..row_lines {
        let (line_no, line) = lines.next().ok_or_else(|| {
            Error::parse(None, format!("expected {rows} rows, found {r}"))
        })?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != cols {
            return Err(Error::parse(
                Some(line_no),
                format!("expected {cols} entries, found {}", tokens.len()),
            ));
        }
        for (c, tok) in tokens.iter().enumerate() {
            m[(r, c)] = parse_scalar(tok).map_err(|msg| Error::parse(Some(line_no), msg))?;
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::parse(Some(line_no), "trailing data after the last row"));
    }
    DenseOperator::new(m)
}

pub fn read_matrix(path: &Path) -> Result<DenseOperator> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, m: &DenseOperator) -> Result<()> {
    std::fs::write(path, format_matrix(m)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let ok = !s.is_empty()
        && s
            .chars()
            .all(|ch| ch.is_ascii_digit() || matches!(ch, '.' | '+' | '-' | 'e' | 'E'));
    if !ok {
        return Err(format!("invalid number {s:?}"));
    }
    let v: f64 = s.parse().map_err(|_| format!("invalid number {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number {s:?}"))
    }
}

pub(crate) fn parse_scalar(tok: &str) -> std::result::Result<C64, String> {
    let Some(body) = tok.strip_suffix('i') else {
        return parse_real(tok).map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_real(s)?,
    };
    Ok(C64::new(re, im))
}

fn format_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn format_scalar(z: C64, complex: bool) -> String {
    if !complex {
        return format_real(z.re);
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", format_real(z.re), sign, format_real(z.im.abs()))
}

pub fn format_matrix(m: &DenseOperator) -> String {
    let complex = !m.is_real();
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|c| format_scalar(m[(r, c)], complex))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
