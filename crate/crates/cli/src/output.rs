use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use semigram_core::linalg::{format_matrix, write_matrix};
use semigram_core::report::{fmt_c64, fmt_f64, Record};
use semigram_core::{DenseOperator, Error, C64};

use crate::Format;

/// What a command printed, plus an error to report after printing it.
pub struct Outcome {
    pub stdout: String,
    pub failure: Option<Error>,
}

impl Outcome {
    pub fn ok(stdout: String) -> Self {
        Self { stdout, failure: None }
    }
}

/// Rounds to 10 significant digits for human-facing summaries; records keep
/// full precision.
pub fn short(x: f64) -> String {
    if !x.is_finite() {
        return fmt_f64(x);
    }
    let rounded: f64 = format!("{x:.9e}").parse().unwrap_or(x);
    fmt_f64(if rounded == 0.0 { 0.0 } else { rounded })
}

pub fn short_c64(z: C64) -> String {
    let clean = |v: f64, scale: f64| if v.abs() <= 1e-14 * scale { 0.0 } else { v };
    let scale = z.norm().max(1e-300);
    let z = C64::new(clean(z.re, scale), clean(z.im, scale));
    if z.im == 0.0 {
        short(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{}{sign}{}i", short(z.re), short(z.im.abs()))
    }
}

pub fn join_c64(values: &[C64]) -> String {
    values.iter().map(|z| fmt_c64(*z)).collect::<Vec<_>>().join(" ")
}

pub fn render(format: Format, summary: Option<&str>, record: &Record, matrices: &[(&str, &DenseOperator)]) -> String {
    match format {
        Format::Structured => record.to_structured(),
        Format::Csv => record.to_csv(),
        Format::Text => {
            let mut out = String::new();
            if let Some(s) = summary {
                let _ = writeln!(out, "{s}");
            }
            out.push_str(&record.to_text());
            for (name, m) in matrices {
                let _ = write!(out, "\n{name}:\n{}", format_matrix(m));
            }
            out
        }
    }
}

/// Writes each matrix as `<dir>/<name>.txt` and records the paths.
pub fn write_files(dir: Option<&Path>, files: &[(&str, &DenseOperator)], record: &mut Record) -> Result<(), Error> {
    let Some(dir) = dir else {
        return Ok(());
    };
    create_dir(dir)?;
    for (name, m) in files {
        let path = dir.join(format!("{name}.txt"));
        write_matrix(&path, m)?;
        record.push(format!("file.{name}"), path.display());
    }
    Ok(())
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Error> {
    create_dir(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}
