//! Plain-text files for measurement vectors and matrices.
//!
//! Vectors are one `re,im` pair per line. Matrices are CSV with one row per
//! line and `re,im` pairs laid out side by side (`2 n` columns).

use std::path::Path;

use anyhow::{bail, Context};
use spf_core::{CMat, CVec, C64};

use crate::json::format_f64;

fn parse_f64(s: &str) -> anyhow::Result<f64> {
    s.trim()
        .parse::<f64>()
        .with_context(|| format!("not a number: {s:?}"))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(text.as_bytes())
}

/// Parses a complex vector from `re,im` lines.
pub fn parse_vector(text: &str) -> anyhow::Result<CVec> {
    let mut values = Vec::new();
    for (line, rec) in reader(text).records().enumerate() {
        let rec = rec.with_context(|| format!("record {}", line + 1))?;
        if rec.len() != 2 {
            bail!(
                "record {}: expected 2 fields, found {}",
                line + 1,
                rec.len()
            );
        }
        values.push(C64::new(parse_f64(&rec[0])?, parse_f64(&rec[1])?));
    }
    if values.is_empty() {
        bail!("empty vector file");
    }
    Ok(CVec::from_vec(values))
}

pub fn format_vector(v: &CVec) -> String {
    v.iter()
        .map(|z| format!("{},{}\n", format_f64(z.re), format_f64(z.im)))
        .collect()
}

/// Parses a complex matrix from rows of interleaved `re,im` pairs.
pub fn parse_matrix(text: &str) -> anyhow::Result<CMat> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (line, rec) in reader(text).records().enumerate() {
        let rec = rec.with_context(|| format!("row {}", line + 1))?;
        if rec.len() % 2 != 0 {
            bail!("row {}: odd number of fields", line + 1);
        }
        let row = (0..rec.len() / 2)
            .map(|k| {
                Ok(C64::new(
                    parse_f64(&rec[2 * k])?,
                    parse_f64(&rec[2 * k + 1])?,
                ))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        rows.push(row);
    }
    let Some(cols) = rows.first().map(Vec::len) else {
        bail!("empty matrix file");
    };
    Ok(CMat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn format_matrix(m: &CMat) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let fields: Vec<String> = (0..m.ncols())
            .flat_map(|j| [format_f64(m[(i, j)].re), format_f64(m[(i, j)].im)])
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn read_vector(path: &Path) -> anyhow::Result<CVec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_vector(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_matrix(path: &Path) -> anyhow::Result<CMat> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip() {
        let v = CVec::from_vec(vec![C64::new(0.1, -2.0), C64::new(1.0 / 3.0, 1e-300)]);
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
    }

    #[test]
    fn matrix_round_trip() {
        let m = CMat::from_fn(3, 2, |i, j| C64::new(i as f64 + 0.1, -(j as f64) / 7.0));
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_vector("").is_err());
        assert!(parse_vector("1,2,3\n").is_err());
        assert!(parse_vector("1,x\n").is_err());
        assert!(parse_matrix("1,2,3\n").is_err());
        assert!(parse_matrix("1,2\n1,2,3,4\n").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let v = parse_vector("# header\n1,2\n").unwrap();
        assert_eq!(v.len(), 1);
    }
}
