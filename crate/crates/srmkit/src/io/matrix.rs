//! Matrix files in two interchangeable formats.
//!
//! Binary (`.amat`): magic `AMAT`, version byte `0x01`, two little-endian
//! u32 dims (rows, cols), then rows*cols little-endian IEEE-754 f64 values
//! row-major. Round-trips are bitwise exact.
//!
//! CSV: comma-separated numeric rows, `#`-prefixed comment lines allowed.
//! Values are written in the shortest form that parses back to the same
//! f64, so CSV round-trips are value-exact too.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mat::Matrix;

const MAGIC: &[u8; 4] = b"AMAT";
const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 4 + 1 + 4 + 4;

/// On-disk encoding of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Binary,
    Csv,
}

impl MatrixFormat {
    /// Canonical file extension for the format.
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Binary => "amat",
            MatrixFormat::Csv => "csv",
        }
    }

    /// Choose a format from a path's extension: `.csv` means CSV, anything
    /// else the binary format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }
}

/// Read a matrix, detecting the format from content: files starting with
/// the `AMAT` magic parse as binary, everything else as CSV.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let bytes = fs::read(path)?;
    if bytes.len() >= 4 && &bytes[..4] == MAGIC {
        read_binary(path, &bytes)
    } else {
        read_csv(path, &bytes)
    }
}

fn read_binary(path: &Path, bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < HEADER_LEN || bytes[4] != VERSION {
        return Err(Error::BadMagic { path: path.into() });
    }
    let rows = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::BadMagic { path: path.into() })?;
    let payload = &bytes[HEADER_LEN..];
    let got = payload.len() / 8;
    if payload.len() != expected * 8 {
        return Err(Error::TruncatedPayload {
            path: path.into(),
            expected,
            got,
        });
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Matrix::from_shape_vec(rows, cols, values)
}

fn read_csv(path: &Path, bytes: &[u8]) -> Result<Matrix> {
    let text = String::from_utf8_lossy(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut expected_cols = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for (col, cell) in trimmed.split(',').enumerate() {
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                path: path.into(),
                line: lineno,
                col,
                text: cell.to_string(),
            })?;
            row.push(value);
        }
        if let Some(expected) = expected_cols {
            if row.len() != expected {
                return Err(Error::DimMismatch {
                    path: path.into(),
                    line: lineno,
                    expected,
                    got: row.len(),
                });
            }
        } else {
            expected_cols = Some(row.len());
        }
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

/// Write a matrix in the requested format. The write is atomic (temp file
/// plus rename).
pub fn write_matrix(m: &Matrix, path: &Path, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Binary => encode_binary(m)?,
        MatrixFormat::Csv => encode_csv(m).into_bytes(),
    };
    super::write_atomic(path, &bytes)
}

fn encode_binary(m: &Matrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::DimensionMismatch {
        what: format!("{} rows exceed the binary format's u32 limit", m.rows()),
    })?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::DimensionMismatch {
        what: format!("{} cols exceed the binary format's u32 limit", m.cols()),
    })?;
    let mut out = Vec::with_capacity(HEADER_LEN + m.rows() * m.cols() * 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for v in m.array().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn encode_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            // Display prints the shortest string that parses back exactly
            out.push_str(&m.get(i, j).to_string());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::max_abs_diff;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_array(Array2::from_shape_fn((rows, cols), |_| {
            rng.gen_range(-1e6..1e6)
        }))
        .unwrap()
    }

    #[test]
    fn binary_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.amat");
        let m = random_matrix(7, 5, 1);
        write_matrix(&m, &path, MatrixFormat::Binary).unwrap();
        let back = read_matrix(&path).unwrap();
        assert!(m
            .to_row_major()
            .iter()
            .zip(back.to_row_major().iter())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn csv_round_trip_value_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = random_matrix(4, 6, 2);
        write_matrix(&m, &path, MatrixFormat::Csv).unwrap();
        let back = read_matrix(&path).unwrap();
        assert_eq!(max_abs_diff(&m, &back), 0.0);
    }

    #[test]
    fn csv_with_comments_and_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("annotated.csv");
        std::fs::write(&path, "# produced by hand\n\n1.0, 2.0\n# middle note\n3.5,4.25\n")
            .unwrap();
        let m = read_matrix(&path).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(1, 0), 3.5);
    }

    #[test]
    fn truncated_binary_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.amat");
        let m = random_matrix(2, 2, 3);
        write_matrix(&m, &path, MatrixFormat::Binary).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8); // drop one value
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_matrix(&path),
            Err(Error::TruncatedPayload { expected: 4, got: 3, .. })
        ));
    }

    #[test]
    fn wrong_version_is_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v2.amat");
        let m = random_matrix(2, 2, 4);
        write_matrix(&m, &path, MatrixFormat::Binary).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 0x02;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_matrix(&path), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn csv_errors_carry_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1.0,2.0\n3.0,oops\n").unwrap();
        match read_matrix(&path) {
            Err(Error::NonNumericCell { line, col, text, .. }) => {
                assert_eq!((line, col), (2, 1));
                assert_eq!(text, "oops");
            }
            other => panic!("expected NonNumericCell, got {other:?}"),
        }
        std::fs::write(&path, "1.0,2.0\n3.0\n").unwrap();
        assert!(matches!(
            read_matrix(&path),
            Err(Error::DimMismatch { line: 2, expected: 2, got: 1, .. })
        ));
    }

    #[test]
    fn special_values_round_trip() {
        // denormals and extreme exponents survive both formats
        let m = Matrix::from_rows(&[vec![5e-324, -1.7976931348623157e308, 0.1 + 0.2]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for format in [MatrixFormat::Binary, MatrixFormat::Csv] {
            let path = dir.path().join(format!("special.{}", format.extension()));
            write_matrix(&m, &path, format).unwrap();
            let back = read_matrix(&path).unwrap();
            for (a, b) in m.to_row_major().iter().zip(back.to_row_major()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn format_from_path_extension() {
        assert_eq!(MatrixFormat::from_path(Path::new("x.csv")), MatrixFormat::Csv);
        assert_eq!(MatrixFormat::from_path(Path::new("x.CSV")), MatrixFormat::Csv);
        assert_eq!(MatrixFormat::from_path(Path::new("x.amat")), MatrixFormat::Binary);
        assert_eq!(MatrixFormat::from_path(Path::new("x")), MatrixFormat::Binary);
    }
}
