//! CSV tables of sphere-packing bounds.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub dim: usize,
    pub degree: usize,
    pub bound: f64,
}

/// Seventeen significant digits, enough to recover the exact double.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with a `dim,degree,bound` header and one line per row, in the given
/// order.
pub fn emit_table(rows: &[TableRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dim", "degree", "bound"]).expect("writing to memory");
    for r in rows {
        w.write_record([r.dim.to_string(), r.degree.to_string(), format_real(r.bound)]).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV of ASCII fields")
}

/// Parses a dimension list such as `1-8`, `3`, or `1,2,3,8`.
pub fn parse_dims(spec: &str) -> Result<Vec<usize>, String> {
    let mut dims = Vec::new();
    for part in spec.split(',').map(str::trim) {
        let number = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("dimension `{s}`: {e}"));
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                if lo > hi {
                    return Err(format!("empty range `{part}`"));
                }
                dims.extend(lo..=hi);
            }
            None => dims.push(number(part)?),
        }
    }
    if dims.contains(&0) {
        return Err("dimensions must be at least 1".into());
    }
    dims.sort_unstable();
    dims.dedup();
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(emit_table(&[]), "dim,degree,bound\n");
    }

    #[test]
    fn one_row() {
        let text = emit_table(&[TableRow { dim: 3, degree: 12, bound: 0.7974 }]);
        assert_eq!(text, "dim,degree,bound\n3,12,7.9740000000000000e-1\n");
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn reals_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, 0.1 + 0.2, -2.5e17] {
            assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn dimension_lists() {
        assert_eq!(parse_dims("1-4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_dims("8,1, 3,2").unwrap(), vec![1, 2, 3, 8]);
        assert!(parse_dims("0-3").is_err());
        assert!(parse_dims("5-2").is_err());
        assert!(parse_dims("a").is_err());
    }
}
