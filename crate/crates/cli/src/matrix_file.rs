//! Matrix input/output.
//!
//! The text format is a header line `R C` followed by `R` lines of `C`
//! whitespace-separated base-10 integers of any size. A JSON array of rows
//! is accepted as well; entries may be integers or decimal strings.

use std::path::Path;

use bruhat_core::{Integer, Matrix};
use serde_json::Value;

use crate::CliError;

pub fn parse_integer(tok: &str) -> Result<Integer, CliError> {
    let digits = tok.strip_prefix('-').unwrap_or(tok);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CliError::Parse(format!("not an integer: {tok:?}")));
    }
    tok.parse()
        .map_err(|_| CliError::Parse(format!("not an integer: {tok:?}")))
}

pub fn parse_matrix(text: &str) -> Result<Matrix<Integer>, CliError> {
    if text.trim_start().starts_with('[') {
        let value: Value = serde_json::from_str(text)?;
        return matrix_from_json(&value);
    }
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Parse("empty matrix file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let [r, c] = dims.as_slice() else {
        return Err(CliError::Parse(format!("header must be \"R C\", got {header:?}")));
    };
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| CliError::Parse(format!("bad dimension {s:?} in header")))
    };
    let (rows, cols) = (parse_dim(r)?, parse_dim(c)?);
    let body: Vec<&str> = lines.collect();
    if cols > 0 && body.len() != rows {
        return Err(CliError::Parse(format!(
            "expected {rows} rows, found {}",
            body.len()
        )));
    }
    if cols == 0 && !body.is_empty() {
        return Err(CliError::Parse(
            "entries given for a matrix with no columns".into(),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in body.iter().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(CliError::Parse(format!(
                "row {} has {} entries, expected {cols}",
                i + 1,
                toks.len()
            )));
        }
        for t in toks {
            data.push(parse_integer(t)?);
        }
    }
    Ok(Matrix::new(rows, cols, data)?)
}

/// Reads a JSON array of equally long rows of integers or integer strings.
pub fn matrix_from_json(value: &Value) -> Result<Matrix<Integer>, CliError> {
    let rows = value
        .as_array()
        .ok_or_else(|| CliError::Parse("matrix must be a JSON array of rows".into()))?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| CliError::Parse("matrix rows must be arrays".into()))?;
        let parsed = row
            .iter()
            .map(|x| match x {
                Value::String(s) => parse_integer(s),
                Value::Number(n) if n.is_i64() || n.is_u64() => parse_integer(&n.to_string()),
                other => Err(CliError::Parse(format!("not an integer entry: {other}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(parsed);
    }
    Ok(Matrix::from_rows(out)?)
}

pub fn render_matrix(m: &Matrix<Integer>) -> String {
    let mut s = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(ToString::to_string).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_matrix(path: &Path) -> Result<Matrix<Integer>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    parse_matrix(&text)
}
