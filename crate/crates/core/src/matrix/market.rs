//! Matrix Market exchange format (`coordinate` and `array`, real fields).

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

struct Header {
    layout: Layout,
    symmetric: bool,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(Error::parse(
            lineno,
            "header must start with %%MatrixMarket",
        ));
    }
    if tokens.len() != 5 {
        return Err(Error::parse(
            lineno,
            "header must have the form %%MatrixMarket matrix <format> <field> <symmetry>",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(Error::parse(
            lineno,
            format!("unsupported object '{}'", tokens[1]),
        ));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => {
            return Err(Error::parse(
                lineno,
                format!("unsupported format '{other}'"),
            ))
        }
    };
    if tokens[3] != "real" {
        return Err(Error::parse(
            lineno,
            format!("unsupported field '{}', only real is accepted", tokens[3]),
        ));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" if layout == Layout::Coordinate => true,
        other => {
            return Err(Error::parse(
                lineno,
                format!("unsupported symmetry '{other}' for {} format", tokens[2]),
            ))
        }
    };
    Ok(Header { layout, symmetric })
}

fn parse_usize(tok: Option<&str>, what: &str, lineno: usize) -> Result<usize> {
    tok.ok_or_else(|| Error::parse(lineno, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(lineno, format!("cannot parse {what}")))
}

fn parse_f64(tok: Option<&str>, lineno: usize) -> Result<f64> {
    let v: f64 = tok
        .ok_or_else(|| Error::parse(lineno, "missing value"))?
        .parse()
        .map_err(|_| Error::parse(lineno, "cannot parse value"))?;
    if !v.is_finite() {
        return Err(Error::parse(lineno, "non-finite value"));
    }
    Ok(v)
}

/// Reads a Matrix Market stream. Coordinate files become CSR (symmetric
/// files expanded, duplicates summed); array files become dense.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<Matrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (lineno, first) = match lines.next() {
        Some((k, l)) => (k, l?),
        None => return Err(Error::parse(1, "empty input")),
    };
    let header = parse_header(&first, lineno)?;

    // skip comments and blank lines up to the size line
    let mut size_line = None;
    for (k, l) in lines.by_ref() {
        let l = l?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some((k, l));
        break;
    }
    let (size_no, size_line) =
        size_line.ok_or_else(|| Error::parse(lineno + 1, "missing size line"))?;
    let mut tok = size_line.split_whitespace();
    let m = parse_usize(tok.next(), "row count", size_no)?;
    let n = parse_usize(tok.next(), "column count", size_no)?;
    let nnz = match header.layout {
        Layout::Coordinate => parse_usize(tok.next(), "entry count", size_no)?,
        Layout::Array => m * n,
    };
    if tok.next().is_some() {
        return Err(Error::parse(size_no, "unexpected token on size line"));
    }
    if header.symmetric && m != n {
        return Err(Error::parse(size_no, "symmetric matrix must be square"));
    }

    let mut last_line = size_no;
    match header.layout {
        Layout::Coordinate => {
            let mut triplets = Vec::with_capacity(if header.symmetric { 2 * nnz } else { nnz });
            let mut count = 0usize;
            for (k, l) in lines {
                let l = l?;
                last_line = k;
                let t = l.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                if count >= nnz {
                    return Err(Error::parse(k, format!("more than {nnz} entries")));
                }
                let mut tok = t.split_whitespace();
                let i = parse_usize(tok.next(), "row index", k)?;
                let j = parse_usize(tok.next(), "column index", k)?;
                let v = parse_f64(tok.next(), k)?;
                if tok.next().is_some() {
                    return Err(Error::parse(k, "unexpected token after value"));
                }
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(Error::parse(
                        k,
                        format!("index ({i}, {j}) out of bounds for {m}x{n}"),
                    ));
                }
                if header.symmetric && j > i {
                    return Err(Error::parse(
                        k,
                        "symmetric entries must lie in the lower triangle",
                    ));
                }
                triplets.push((i - 1, j - 1, v));
                if header.symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
                count += 1;
            }
            if count != nnz {
                return Err(Error::parse(
                    last_line,
                    format!("expected {nnz} entries, found {count}"),
                ));
            }
            Matrix::from_triplets(m, n, &triplets)
                .map_err(|e| Error::parse(last_line, e.to_string()))
        }
        Layout::Array => {
            // column-major order
            let mut values = vec![0.0; m * n];
            let mut count = 0usize;
            for (k, l) in lines {
                let l = l?;
                last_line = k;
                let t = l.trim();
                if t.is_empty() || t.starts_with('%') {
                    continue;
                }
                for tok in t.split_whitespace() {
                    if count >= m * n {
                        return Err(Error::parse(k, format!("more than {} values", m * n)));
                    }
                    let v = parse_f64(Some(tok), k)?;
                    let (i, j) = (count % m, count / m);
                    values[i * n + j] = v;
                    count += 1;
                }
            }
            if count != m * n {
                return Err(Error::parse(
                    last_line,
                    format!("expected {} values, found {count}", m * n),
                ));
            }
            Matrix::from_dense(m, n, values)
        }
    }
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<Matrix> {
    let f = File::open(path.as_ref())?;
    read_matrix_market(BufReader::new(f))
}

/// Writes `a` as `coordinate real general`. Values use the shortest
/// representation that round-trips exactly. Returns the bytes written.
pub fn write_matrix_market<W: Write>(a: &Matrix, mut out: W) -> Result<usize> {
    let triplets = a.triplets();
    let mut buf = String::with_capacity(64 + 32 * triplets.len());
    buf.push_str("%%MatrixMarket matrix coordinate real general\n");
    buf.push_str(&format!("{} {} {}\n", a.nrows(), a.ncols(), triplets.len()));
    for (i, j, v) in triplets {
        buf.push_str(&format!("{} {} {:e}\n", i + 1, j + 1, v));
    }
    out.write_all(buf.as_bytes())?;
    Ok(buf.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Matrix> {
        read_matrix_market(s.as_bytes())
    }

    fn parse_line(r: Result<Matrix>) -> usize {
        match r {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn coordinate_identity() {
        let a =
            read("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n2 2 1.0\n")
                .unwrap();
        assert_eq!(a, Matrix::identity(2));
    }

    #[test]
    fn array_column() {
        let a = read("%%MatrixMarket matrix array real general\n2 1\n3\n4\n").unwrap();
        assert_eq!((a.nrows(), a.ncols()), (2, 1));
        assert_eq!(a.frobenius_sq(), 25.0);
        assert_eq!(a.get(1, 0), 4.0);
    }

    #[test]
    fn array_is_column_major() {
        let a = read("%%MatrixMarket matrix array real general\n2 2\n1 2\n3 4\n").unwrap();
        assert_eq!(a.dense_values(), vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn symmetric_expanded_and_duplicates_summed() {
        let a = read(
            "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 2\n2 1 -1\n3 2 5\n3 2 1\n",
        )
        .unwrap();
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 2), 6.0);
        assert_eq!(a.get(2, 1), 6.0);
        assert_eq!(a.nnz(), 5);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse_line(read(
                "%%MatrixMarket matrix coordinate complex general\n1 1 1\n"
            )),
            1
        );
        assert_eq!(
            parse_line(read("%%MatrixMarket matrix coordinate pattern general\n")),
            1
        );
        assert_eq!(
            parse_line(read("%%MatrixMarket vector coordinate real general\n")),
            1
        );
        assert_eq!(parse_line(read("garbage\n")), 1);
        assert_eq!(
            parse_line(read(
                "%%MatrixMarket matrix coordinate real general\n%\n2 2 1\n3 1 1.0\n"
            )),
            4
        );
        assert_eq!(
            parse_line(read(
                "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n"
            )),
            3
        );
        assert_eq!(
            parse_line(read(
                "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"
            )),
            3
        );
        assert_eq!(
            parse_line(read(
                "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n5\n"
            )),
            7
        );
        assert!(read("").is_err());
    }

    #[test]
    fn round_trip_preserves_empty_rows() {
        let a = Matrix::from_triplets(3, 4, &[(0, 3, 0.1), (2, 0, -7.25e-3)]).unwrap();
        let mut buf = Vec::new();
        let written = write_matrix_market(&a, &mut buf).unwrap();
        assert_eq!(written, buf.len());
        let b = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!((b.nrows(), b.ncols()), (3, 4));
        assert_eq!(b.triplets(), a.triplets());
    }

    #[test]
    fn round_trip_identity() {
        let mut buf = Vec::new();
        write_matrix_market(&Matrix::identity(2), &mut buf).unwrap();
        assert_eq!(
            read_matrix_market(buf.as_slice()).unwrap(),
            Matrix::identity(2)
        );
    }
}
