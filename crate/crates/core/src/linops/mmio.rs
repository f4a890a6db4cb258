//! Minimal Matrix Market reader/writer for dense real fixtures.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixMarketFormat {
    /// Column-major dense listing.
    Array,
    /// `row col value` triplets of the nonzero entries (1-based).
    Coordinate,
}

/// Reads a real `array` or `coordinate` matrix; `symmetric` storage is expanded.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<DMatrix<f64>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market stream".into()))??;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(format!("bad Matrix Market header: {header}")));
    }
    let format = match tokens[2].as_str() {
        "array" => MatrixMarketFormat::Array,
        "coordinate" => MatrixMarketFormat::Coordinate,
        other => return Err(Error::Parse(format!("unsupported storage '{other}'"))),
    };
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(Error::Parse(format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter_map(|l| match l {
        Ok(s) if s.trim_start().starts_with('%') || s.trim().is_empty() => None,
        other => Some(other),
    });
    let size_line = body
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))??;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size line: {size_line}"))))
        .collect::<Result<_>>()?;

    let parse_f = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad value '{t}'")));

    match format {
        MatrixMarketFormat::Array => {
            let [rows, cols] = sizes[..] else {
                return Err(Error::Parse("array size line needs 2 entries".into()));
            };
            let mut values = Vec::with_capacity(rows * cols);
            for line in body {
                for t in line?.split_whitespace() {
                    values.push(parse_f(t)?);
                }
            }
            let mut m = DMatrix::zeros(rows, cols);
            if symmetric {
                // Lower triangle, column by column.
                let mut it = values.into_iter();
                for j in 0..cols {
                    for i in j..rows {
                        let v = it.next().ok_or_else(|| Error::Parse("truncated array data".into()))?;
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            } else {
                if values.len() != rows * cols {
                    return Err(Error::Parse(format!(
                        "expected {} array entries, found {}",
                        rows * cols,
                        values.len()
                    )));
                }
                m = DMatrix::from_column_slice(rows, cols, &values);
            }
            Ok(m)
        }
        MatrixMarketFormat::Coordinate => {
            let [rows, cols, nnz] = sizes[..] else {
                return Err(Error::Parse("coordinate size line needs 3 entries".into()));
            };
            let mut m = DMatrix::zeros(rows, cols);
            let mut seen = 0;
            for line in body {
                let line = line?;
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(Error::Parse(format!("bad coordinate entry: {line}")));
                }
                let i: usize = t[0].parse().map_err(|_| Error::Parse(format!("bad row '{}'", t[0])))?;
                let j: usize = t[1].parse().map_err(|_| Error::Parse(format!("bad col '{}'", t[1])))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!("entry ({i},{j}) out of range")));
                }
                let v = parse_f(t[2])?;
                m[(i - 1, j - 1)] = v;
                if symmetric {
                    m[(j - 1, i - 1)] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(Error::Parse(format!("expected {nnz} entries, found {seen}")));
            }
            Ok(m)
        }
    }
}

/// Writes a general real matrix. Values use Rust's shortest round-trip
/// formatting, so reading the file back reproduces the matrix bit for bit.
pub fn write_matrix_market<W: Write>(mut w: W, m: &DMatrix<f64>, format: MatrixMarketFormat) -> Result<()> {
    match format {
        MatrixMarketFormat::Array => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{} {}", m.nrows(), m.ncols())?;
            for v in m.iter() {
                writeln!(w, "{v:e}")?;
            }
        }
        MatrixMarketFormat::Coordinate => {
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            let nnz = m.iter().filter(|v| **v != 0.0).count();
            writeln!(w, "{} {} {}", m.nrows(), m.ncols(), nnz)?;
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        writeln!(w, "{} {} {v:e}", i + 1, j + 1)?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_symmetric_coordinate() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 2.0\n2 1 1.0\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_matrix_market("%%NotMM matrix\n".as_bytes()).is_err());
        let short = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        assert!(read_matrix_market(short.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in any::<u64>(),
            coord in any::<bool>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = DMatrix::from_fn(rows, cols, |_, _| {
                if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-1e3..1e3) }
            });
            let fmt = if coord { MatrixMarketFormat::Coordinate } else { MatrixMarketFormat::Array };
            let mut buf = Vec::new();
            write_matrix_market(&mut buf, &m, fmt).unwrap();
            let back = read_matrix_market(buf.as_slice()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
