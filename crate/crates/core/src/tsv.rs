//! Line splitting shared by the TSV loaders.

use std::io::BufRead;

use crate::error::{Error, Result};

/// Calls `f` with the 1-based line number and the tab-separated fields of every
/// non-blank, non-comment line.
pub(crate) fn for_each_record<R, F>(reader: R, mut f: F) -> Result<()>
where
    R: BufRead,
    F: FnMut(usize, &[&str]) -> Result<()>,
{
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        f(idx + 1, &fields)?;
    }
    Ok(())
}

pub(crate) fn expect_columns(line: usize, fields: &[&str], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::parse(
            line,
            format!("expected {n} tab-separated columns, found {}", fields.len()),
        ));
    }
    for (i, field) in fields.iter().enumerate() {
        if field.is_empty() {
            return Err(Error::parse(line, format!("column {} is empty", i + 1)));
        }
    }
    Ok(())
}

pub(crate) fn parse_count(line: usize, field: &str) -> Result<u64> {
    let value: i128 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("count `{field}` is not an integer")))?;
    if value <= 0 {
        return Err(Error::parse(
            line,
            format!("count {value} must be positive"),
        ));
    }
    u64::try_from(value).map_err(|_| Error::parse(line, format!("count {value} is too large")))
}
