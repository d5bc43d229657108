//! Parameter lists on the command line.
//!
//! - `2^-6..2^-13`: powers of two, halving (or doubling) at each step, both ends included.
//! - `1..5`: consecutive integers, both ends included.
//! - `0.5,0.25,0.1`: an explicit list.

use crate::CliError;

fn parse_power(s: &str) -> Option<i32> {
    s.trim().strip_prefix("2^").and_then(|e| e.parse().ok())
}

/// Real-valued grid: a power-of-two range or a comma-separated list.
pub fn parse_real_grid(s: &str) -> Result<Vec<f64>, CliError> {
    if let Some((lo, hi)) = s.split_once("..") {
        let (Some(a), Some(b)) = (parse_power(lo), parse_power(hi)) else {
            return Err(CliError::Validation(format!(
                "grid {s:?}: ranges must use powers of two, e.g. 2^-6..2^-13"
            )));
        };
        let step = if b >= a { 1 } else { -1 };
        let mut out = Vec::new();
        let mut e = a;
        loop {
            out.push(2f64.powi(e));
            if e == b {
                break;
            }
            e += step;
        }
        return Ok(out);
    }
    let values = s
        .split(',')
        .map(|t| match parse_power(t) {
            Some(e) => Ok(2f64.powi(e)),
            None => t
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("grid {s:?}: cannot parse {t:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Validation(format!("grid {s:?} contains a non-finite value")));
    }
    Ok(values)
}

/// Integer range `lo..hi` (inclusive) or a comma-separated list.
pub fn parse_int_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = |t: &str| CliError::Validation(format!("integer grid {s:?}: cannot parse {t:?}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad(lo))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad(hi))?;
        if lo > hi {
            return Err(CliError::Validation(format!("integer grid {s:?} is empty")));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad(t))).collect()
}
