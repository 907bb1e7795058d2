//! Plain-text frame files.
//!
//! ```text
//! # comment lines start with '#'
//! m n
//! x_11 ... x_1m
//! ...
//! x_n1 ... x_nm
//! ```
//!
//! Blank lines are ignored. Rows are whitespace separated decimal floats.

use std::io::{self, Write};

use framekit_core::{Error as CoreError, Frame};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: CoreError },
    #[error("{0}")]
    Frame(CoreError),
}

impl LoadError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LoadError::Syntax { line, .. } | LoadError::Invalid { line, .. } => Some(*line),
            LoadError::Frame(_) => None,
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::Syntax { line, message: message.into() }
}

/// Header and rows as written, each row tagged with its 1-based line number.
#[derive(Debug)]
pub struct RawFrame {
    pub m: usize,
    pub rows: Vec<(usize, Vec<f64>)>,
}

pub fn parse_raw(text: &str) -> Result<RawFrame, LoadError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or_else(|| syntax(1, "missing `m n` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [m, n] = fields[..] else {
        return Err(syntax(header_line, format!("header must be `m n`, found `{header}`")));
    };
    let m: usize = m
        .parse()
        .map_err(|_| syntax(header_line, format!("dimension `{m}` is not a non-negative integer")))?;
    let n: usize = n
        .parse()
        .map_err(|_| syntax(header_line, format!("count `{n}` is not a non-negative integer")))?;

    let mut rows = Vec::with_capacity(n.min(1 << 16));
    for (line, text) in lines {
        if rows.len() == n {
            return Err(syntax(line, format!("expected {n} rows, found more")));
        }
        let row = text
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|_| syntax(line, format!("`{tok}` is not a number"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != m {
            return Err(syntax(line, format!("expected {m} entries, found {}", row.len())));
        }
        rows.push((line, row));
    }
    if rows.len() < n {
        let last = text.lines().count().max(1);
        return Err(syntax(last, format!("expected {n} rows, found {}", rows.len())));
    }
    Ok(RawFrame { m, rows })
}

/// Parses a frame file. With `renormalize` each row is divided by its norm;
/// otherwise every row must already be a unit vector.
pub fn parse_frame(text: &str, renormalize: bool) -> Result<Frame, LoadError> {
    let raw = parse_raw(text)?;
    let lines: Vec<usize> = raw.rows.iter().map(|(l, _)| *l).collect();
    let rows = raw.rows.into_iter().map(|(_, r)| r).collect();
    Frame::new(raw.m, rows, renormalize).map_err(|e| match e {
        CoreError::ZeroVector { index }
        | CoreError::NonUnitVector { index, .. }
        | CoreError::NonFinite { index }
        | CoreError::DimensionMismatch { index, .. } => LoadError::Invalid { line: lines[index], source: e },
        other => LoadError::Frame(other),
    })
}

/// Writes rows of length `m` in the frame file format. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_rows(out: &mut dyn Write, comments: &[String], m: usize, rows: &[Vec<f64>]) -> io::Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    writeln!(out, "{m} {}", rows.len())?;
    for row in rows {
        let mut first = true;
        for x in row {
            if !first {
                out.write_all(b" ")?;
            }
            // `+ 0.0` turns -0 into 0
            write!(out, "{:?}", x + 0.0)?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_frame(out: &mut dyn Write, comments: &[String], frame: &Frame) -> io::Result<()> {
    write_rows(out, comments, frame.m(), &frame.to_vecs())
}
