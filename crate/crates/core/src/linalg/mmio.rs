//! Dense Matrix Market (`array real general`) reading and writing.
//!
//! Writers always emit the `%%MatrixMarket matrix array real general` banner,
//! a `rows cols` line, and one entry per line in column-major order. Readers
//! additionally accept headerless text that starts directly with the
//! dimension line. Lines starting with `%` after the banner are comments.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

const BANNER: &str = "%%MatrixMarket matrix array real general";

/// Shortest round-tripping digits, switching to exponent form away from
/// moderate magnitudes.
struct Entry(f64);

impl std::fmt::Display for Entry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mag = self.0.abs();
        if mag == 0.0 || (1e-5..1e16).contains(&mag) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

/// Renders a matrix in Matrix Market array format.
pub fn to_string(a: &DenseMatrix) -> String {
    let mut out = String::with_capacity(24 * a.rows() * a.cols() + 64);
    out.push_str(BANNER);
    out.push('\n');
    let _ = writeln!(out, "{} {}", a.rows(), a.cols());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            let _ = writeln!(out, "{}", Entry(a.get(i, j)));
        }
    }
    out
}

/// Renders a vector as an `n × 1` array.
pub fn vector_to_string(v: &[f64]) -> String {
    let a = DenseMatrix::new(v.len(), 1, v.to_vec()).expect("vector entries must be finite");
    to_string(&a)
}

pub fn write_matrix(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string(a)).map_err(|e| Error::io(path, e))
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let path = path.as_ref();
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{}: entry {i} is not finite",
            path.display()
        )));
    }
    fs::write(path, vector_to_string(v)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path)
}

/// Reads an `n × 1` (or `1 × n`) array as a vector.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let a = read_matrix(path)?;
    if a.cols() != 1 && a.rows() != 1 {
        return Err(Error::InvalidInput(format!(
            "{}: expected a vector, found a {}x{} matrix",
            path.display(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.as_slice().to_vec())
}

/// Parses Matrix Market array text; `origin` only labels error messages.
pub fn parse(text: &str, origin: &Path) -> Result<DenseMatrix> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };

    let mut lines = text.lines().enumerate().peekable();
    if let Some((_, first)) = lines.peek() {
        if first.trim_start().starts_with("%%MatrixMarket") {
            let (no, banner) = lines.next().unwrap();
            let fields: Vec<String> = banner
                .split_whitespace()
                .map(str::to_ascii_lowercase)
                .collect();
            if fields.len() < 5 || fields[1] != "matrix" {
                return Err(err(no + 1, format!("malformed banner `{banner}`")));
            }
            if fields[2] != "array" {
                return Err(err(no + 1, format!("unsupported storage `{}`, only array is read", fields[2])));
            }
            if fields[3] != "real" && fields[3] != "integer" {
                return Err(err(no + 1, format!("unsupported field `{}`", fields[3])));
            }
            if fields[4] != "general" {
                return Err(err(no + 1, format!("unsupported symmetry `{}`", fields[4])));
            }
        }
    }

    let mut payload = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (dim_no, dim_line) = payload
        .next()
        .ok_or_else(|| err(1, "missing dimension line".to_string()))?;
    let dims: Vec<&str> = dim_line.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(err(dim_no + 1, format!("expected `rows cols`, found `{dim_line}`")));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| err(dim_no + 1, format!("bad dimension `{s}`")))
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;

    let mut values = Vec::with_capacity(rows * cols);
    for (no, line) in payload {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(no + 1, format!("bad value `{tok}`")))?;
            if !v.is_finite() {
                return Err(err(no + 1, format!("non-finite value `{tok}`")));
            }
            values.push(v);
        }
    }
    if values.len() != rows * cols {
        return Err(err(
            dim_no + 1,
            format!("expected {} entries, found {}", rows * cols, values.len()),
        ));
    }
    DenseMatrix::from_col_major(rows, cols, &values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_column_major() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.5]]).unwrap();
        assert_eq!(
            to_string(&a),
            "%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4.5\n"
        );
    }

    #[test]
    fn reads_bare_dimension_first_text() {
        let a = parse("2 1\n0.5\n-2\n", Path::new("bare")).unwrap();
        assert_eq!(a.as_slice(), &[0.5, -2.0]);
    }

    #[test]
    fn skips_comments_after_banner() {
        let t = "%%MatrixMarket matrix array real general\n% made by hand\n1 2\n1e-3\n7\n";
        let a = parse(t, Path::new("c")).unwrap();
        assert_eq!(a.as_slice(), &[1e-3, 7.0]);
    }

    #[test]
    fn entry_count_mismatch_is_a_parse_error() {
        let e = parse("2 2\n1\n2\n3\n", Path::new("short")).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }), "{e}");
    }

    #[test]
    fn rejects_coordinate_storage() {
        let t = "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2\n";
        assert!(parse(t, Path::new("coo")).is_err());
    }
}
