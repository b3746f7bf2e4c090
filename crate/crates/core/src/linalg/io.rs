//! Text format for matrices and tensors.
//!
//! ```text
//! # shape: 2,2,2
//! 1,0
//! 0,0
//! 0,0
//! 3,2
//! ```
//!
//! Values are listed in vec order (first index fastest), one mode-0 fiber per
//! line. Complex entries are written `re+imi`. Every float is printed with the
//! shortest decimal that round-trips, so write/parse is bit-exact.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::matrix::{Matrix, Scalar};
use super::tensor::Tensor;
use crate::error::{GooError, Result};

fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_scalar(z: Scalar) -> String {
    if z.im == 0.0 && !z.im.is_sign_negative() {
        fmt_f64(z.re)
    } else {
        let im = fmt_f64(z.im);
        let sign = if im.starts_with('-') { "" } else { "+" };
        format!("{}{sign}{im}i", fmt_f64(z.re))
    }
}

pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let bad = || GooError::Parse(format!("bad number '{s}'"));
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = body[..split].parse::<f64>().map_err(|_| bad())?;
    let im = body[split..].trim_start_matches('+').parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn format_array(shape: &[usize], data: &[Scalar]) -> String {
    let mut out = String::new();
    let dims: Vec<String> = shape.iter().map(|n| n.to_string()).collect();
    writeln!(out, "# shape: {}", dims.join(",")).unwrap();
    let fiber = shape.first().copied().unwrap_or(1).max(1);
    for chunk in data.chunks(fiber) {
        let line: Vec<String> = chunk.iter().map(|&z| format_scalar(z)).collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    out
}

pub fn parse_array(text: &str) -> Result<(Vec<usize>, Vec<Scalar>)> {
    let mut shape: Option<Vec<usize>> = None;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(dims) = comment.trim().strip_prefix("shape:") {
                let parsed = dims
                    .split(',')
                    .map(|d| d.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| GooError::Parse(format!("malformed shape header '{line}'")))?;
                if parsed.is_empty() || parsed.contains(&0) {
                    return Err(GooError::Parse(format!("malformed shape header '{line}'")));
                }
                shape = Some(parsed);
            }
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if !tok.is_empty() {
                values.push(parse_scalar(tok)?);
            }
        }
    }
    let shape = shape.ok_or_else(|| GooError::Parse("missing '# shape:' header".into()))?;
    let expected: usize = shape.iter().product();
    if values.len() != expected {
        return Err(GooError::Parse(format!(
            "shape {shape:?} needs {expected} values, found {}",
            values.len()
        )));
    }
    Ok((shape, values))
}

pub fn write_matrix(m: &Matrix) -> String {
    format_array(&[m.rows(), m.cols()], m.as_slice())
}

pub fn read_matrix(text: &str) -> Result<Matrix> {
    let (shape, data) = parse_array(text)?;
    match shape.as_slice() {
        [r, c] => Matrix::from_col_major(*r, *c, data),
        _ => Err(GooError::Parse(format!("expected a matrix, got shape {shape:?}"))),
    }
}

/// Plain row-per-line matrix text, the layout a spreadsheet exports; `#`
/// lines are skipped.
pub fn read_matrix_rows(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(parse_scalar)
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 {
        return Err(GooError::Parse("matrix has no entries".into()));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(GooError::Parse("ragged matrix rows".into()));
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Array format when a `# shape:` header is present, row-per-line otherwise.
pub fn read_matrix_any(text: &str) -> Result<Matrix> {
    let has_header = text
        .lines()
        .any(|l| l.trim().strip_prefix('#').is_some_and(|c| c.trim().starts_with("shape:")));
    if has_header {
        read_matrix(text)
    } else {
        read_matrix_rows(text)
    }
}

pub fn write_tensor(t: &Tensor) -> String {
    format_array(t.shape(), t.as_slice())
}

pub fn read_tensor(text: &str) -> Result<Tensor> {
    let (shape, data) = parse_array(text)?;
    Tensor::from_vec(&shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn row_layout_and_detection() {
        let m = read_matrix_any("1, 2\n3 4\n").unwrap();
        assert_eq!(m, Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]));
        assert_eq!(read_matrix_any("# shape: 2,2\n1,3\n2,4\n").unwrap(), m);
        assert!(read_matrix_rows("1,2\n3\n").is_err());
        assert!(read_matrix_rows("# nothing\n").is_err());
        assert!(read_matrix_any("# shape: 2,x\n1\n").is_err());
    }

    #[test]
    fn parse_complex_forms() {
        assert_eq!(parse_scalar("1.5-2i").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_scalar("-1e-3+4.5e+2i").unwrap(), Complex64::new(-1e-3, 450.0));
        assert_eq!(parse_scalar("  7 ").unwrap(), Complex64::new(7.0, 0.0));
        assert!(parse_scalar("abc").is_err());
        assert!(parse_scalar("1+i").is_err());
    }

    #[test]
    fn header_required_and_checked() {
        assert!(parse_array("1,2,3").is_err());
        assert!(parse_array("# shape: 2,x\n1,2").is_err());
        assert!(parse_array("# shape: 2,2\n1,2,3").is_err());
        let (s, v) = parse_array("# shape: 2,1\n# comment\n1\n2\n").unwrap();
        assert_eq!(s, vec![2, 1]);
        assert_eq!(v.len(), 2);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |x| x.is_finite()),
            -1e3..1e3f64,
            Just(0.0),
            Just(-0.0),
        ]
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(vals in prop::collection::vec((finite(), finite()), 1..24), real in any::<bool>()) {
            let data: Vec<Scalar> = vals.iter().map(|&(a, b)| Complex64::new(a, if real { 0.0 } else { b })).collect();
            let shape = [data.len()];
            let text = format_array(&shape, &data);
            let (s2, d2) = parse_array(&text).unwrap();
            prop_assert_eq!(s2, shape.to_vec());
            for (x, y) in data.iter().zip(&d2) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }
}
