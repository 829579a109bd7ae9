//! Linear systems `ẋ = Ax + Bu, y = Cx` and their on-disk description.
//!
//! A system file is TOML with keys `A`, `B` and `C`. Each value is either a
//! matrix written inline in the plain-text matrix format (any string containing
//! a newline) or a path to a matrix file, resolved relative to the system file:
//!
//! ```toml
//! A = """
//! 2 2
//! 0 0
//! 0 -1
//! """
//! B = "b.txt"
//! C = "c.txt"
//! ```
//!
//! Only `A` is mandatory; commands that need `B` or `C` report their absence.
//! An optional `labels` array names the state coordinates, one per row of `A`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{parse_matrix, read_matrix, DenseOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct StateSpaceSystem {
    a: DenseOperator,
    b: DenseOperator,
    c: DenseOperator,
}

impl StateSpaceSystem {
    /// `A` is `n×n`, `B` is `n×m`, `C` is `p×n`.
    pub fn new(a: DenseOperator, b: DenseOperator, c: DenseOperator) -> Result<Self> {
        let n = a.require_square("StateSpaceSystem")?;
        if b.rows() != n {
            return Err(Error::dim(
                "StateSpaceSystem",
                format!("B has {} rows, A is {n}x{n}", b.rows()),
            ));
        }
        if c.cols() != n {
            return Err(Error::dim(
                "StateSpaceSystem",
                format!("C has {} columns, A is {n}x{n}", c.cols()),
            ));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &DenseOperator {
        &self.a
    }

    pub fn b(&self) -> &DenseOperator {
        &self.b
    }

    pub fn c(&self) -> &DenseOperator {
        &self.c
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn is_real(&self) -> bool {
        self.a.is_real() && self.b.is_real() && self.c.is_real()
    }

    pub fn into_parts(self) -> (DenseOperator, DenseOperator, DenseOperator) {
        (self.a, self.b, self.c)
    }
}

/// Matrices read from a system file, before the system is assembled.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemFile {
    pub a: DenseOperator,
    pub b: Option<DenseOperator>,
    pub c: Option<DenseOperator>,
    pub labels: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: Option<String>,
    #[serde(rename = "C")]
    c: Option<String>,
    #[serde(default)]
    labels: Vec<String>,
}

impl SystemFile {
    /// `B`, or an error naming the missing key.
    pub fn require_b(&self) -> Result<&DenseOperator> {
        self.b
            .as_ref()
            .ok_or_else(|| Error::parse(None, "system file has no `B` entry"))
    }

    pub fn require_c(&self) -> Result<&DenseOperator> {
        self.c
            .as_ref()
            .ok_or_else(|| Error::parse(None, "system file has no `C` entry"))
    }

    /// Assembles the full system; `B` and `C` must be present.
    pub fn into_system(self) -> Result<StateSpaceSystem> {
        let b = self.require_b()?.clone();
        let c = self.require_c()?.clone();
        StateSpaceSystem::new(self.a, b, c)
    }

    /// Checks dimensions of whatever entries are present.
    fn validate(&self) -> Result<()> {
        let n = self.a.require_square("system file")?;
        if !self.labels.is_empty() && self.labels.len() != n {
            return Err(Error::dim(
                "system file",
                format!("{} labels for {n} states", self.labels.len()),
            ));
        }
        if let Some(b) = &self.b {
            if b.rows() != n {
                return Err(Error::dim("system file", format!("B has {} rows, A is {n}x{n}", b.rows())));
            }
        }
        if let Some(c) = &self.c {
            if c.cols() != n {
                return Err(Error::dim(
                    "system file",
                    format!("C has {} columns, A is {n}x{n}", c.cols()),
                ));
            }
        }
        Ok(())
    }
}

/// Parses a system description; relative matrix paths resolve against `base`.
pub fn parse_system(text: &str, base: &Path) -> Result<SystemFile> {
    let raw: RawSystem = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        Error::parse(line, e.message().to_string())
    })?;
    let load = |value: &str| -> Result<DenseOperator> {
        if value.contains('\n') {
            parse_matrix(value)
        } else {
            read_matrix(&resolve(base, value))
        }
    };
    let file = SystemFile {
        a: load(&raw.a)?,
        b: raw.b.as_deref().map(load).transpose()?,
        c: raw.c.as_deref().map(load).transpose()?,
        labels: raw.labels,
    };
    file.validate()?;
    Ok(file)
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value.trim());
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn load_system(path: &Path) -> Result<SystemFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_system(&text, base)
}
