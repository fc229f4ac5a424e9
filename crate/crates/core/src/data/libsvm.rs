//! LIBSVM text format: `label idx:val idx:val …` with 1-based indices.
//!
//! Error columns count tokens on the line: the label is token 0 and the
//! feature tokens are numbered from 1.

use std::io::{BufRead, Write};

use crate::error::{check_len, Error, Result};
use crate::linalg::CsrMatrix;

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses rows and labels. `cols` overrides the column count, which is
/// otherwise the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R, cols: Option<usize>) -> Result<(CsrMatrix, Vec<f64>)> {
    let mut labels = Vec::new();
    let mut row_offsets = vec![0usize];
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_error(lineno, 0, format!("malformed label '{label_tok}'")))?;
        if !label.is_finite() {
            return Err(parse_error(lineno, 0, "non-finite label"));
        }
        let mut prev = 0usize;
        for (k, tok) in tokens.enumerate() {
            let column = k + 1;
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(lineno, column, format!("malformed token '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(lineno, column, format!("malformed index in '{tok}'")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_error(lineno, column, format!("malformed value in '{tok}'")))?;
            if idx < 1 {
                return Err(parse_error(lineno, column, "index < 1"));
            }
            if idx <= prev {
                return Err(parse_error(
                    lineno,
                    column,
                    format!("non-increasing index {idx} after {prev}"),
                ));
            }
            if !val.is_finite() {
                return Err(parse_error(lineno, column, "non-finite value"));
            }
            if let Some(c) = cols {
                if idx > c {
                    return Err(parse_error(lineno, column, format!("index {idx} exceeds declared {c} columns")));
                }
            }
            prev = idx;
            max_index = max_index.max(idx);
            col_indices.push(idx - 1);
            values.push(val);
        }
        labels.push(label);
        row_offsets.push(col_indices.len());
    }
    let rows = labels.len();
    let cols = cols.unwrap_or(max_index);
    Ok((CsrMatrix::new(rows, cols, row_offsets, col_indices, values)?, labels))
}

pub fn write_libsvm<W: Write>(mut w: W, m: &CsrMatrix, labels: &[f64]) -> Result<()> {
    check_len("write_libsvm", m.rows(), labels.len())?;
    for (i, label) in labels.iter().enumerate() {
        write!(w, "{label}")?;
        let (idx, vals) = m.row(i);
        for (c, v) in idx.iter().zip(vals) {
            write!(w, " {}:{v}", c + 1)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<(CsrMatrix, Vec<f64>)> {
        parse_libsvm(s.as_bytes(), None)
    }

    #[test]
    fn format_examples() {
        let (m, y) = parse("+1 2:0.5 4:-1.25\n").unwrap();
        assert_eq!(y, vec![1.0]);
        assert_eq!(m.cols(), 4);
        assert_eq!(m.row(0), (&[1usize, 3][..], &[0.5, -1.25][..]));

        let (m, y) = parse("3.5 1:1").unwrap();
        assert_eq!(y, vec![3.5]);
        assert_eq!(m.nnz(), 1);

        match parse("1 3:1 2:1") {
            Err(Error::Parse { line: 1, column: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_blanks_and_errors() {
        let (m, y) = parse("# header\n\n1 1:2\n  \n-1 2:3 # trailing\n").unwrap();
        assert_eq!(y, vec![1.0, -1.0]);
        assert_eq!(m.rows(), 2);
        assert!(matches!(parse("1 0:1"), Err(Error::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse("1 1:1\n1 2:x"), Err(Error::Parse { line: 2, column: 1, .. })));
        assert!(matches!(parse("1 1:1\n\nfoo 1:1"), Err(Error::Parse { line: 3, column: 0, .. })));
        assert!(matches!(parse("1 2:1 2:3"), Err(Error::Parse { line: 1, column: 2, .. })));
        assert!(matches!(parse("1 1-1"), Err(Error::Parse { column: 1, .. })));
        assert!(matches!(parse_libsvm("1 5:1".as_bytes(), Some(3)), Err(Error::Parse { .. })));
        assert_eq!(parse_libsvm("1 2:1".as_bytes(), Some(7)).unwrap().0.cols(), 7);
    }

    #[test]
    fn round_trip() {
        let m = CsrMatrix::from_triplets(3, 5, &[(0, 4, 0.1), (0, 0, -3e-17), (2, 2, 1.0 / 3.0)]).unwrap();
        let labels = [1.0, -0.25, 7e100];
        let mut buf = Vec::new();
        write_libsvm(&mut buf, &m, &labels).unwrap();
        let (back, y) = parse_libsvm(buf.as_slice(), Some(5)).unwrap();
        assert_eq!(back, m);
        assert_eq!(y, labels);
    }
}
