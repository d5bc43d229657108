//! Dense matrix text files: a first line `N M`, then `N` rows of `M`
//! whitespace-separated decimals. Blank lines and `#` comments are ignored.

use std::path::Path;

use nalgebra::DMatrix;

use crate::CliError;

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, CliError> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Validation("matrix file is empty".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Validation(format!("bad matrix header {header:?}, expected \"N M\"")))?;
    let [rows, cols] = dims[..] else {
        return Err(CliError::Validation(format!("bad matrix header {header:?}, expected \"N M\"")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        if i >= rows {
            return Err(CliError::Validation(format!("matrix has more than {rows} rows")));
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Validation(format!("row {}: cannot parse {line:?}", i + 1)))?;
        if row.len() != cols {
            return Err(CliError::Validation(format!(
                "row {} has {} entries, expected {cols}",
                i + 1,
                row.len()
            )));
        }
        data.extend(row);
    }
    if data.len() != rows * cols {
        return Err(CliError::Validation(format!(
            "matrix has {} rows, expected {rows}",
            data.len() / cols.max(1)
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}
