//! Plain-text matrix formats and atomic file writes.
//!
//! Quaternion matrices serialize as a `qmatrix <rows> <cols>` header and
//! four labeled component blocks; complex matrices carry `R`/`I` blocks
//! only, real matrices just `R`. Values use Rust's shortest round-trip
//! float formatting, so writing and re-reading is lossless.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::qmat::{CMat, QMatrix};
use std::fmt::Write as _;
use std::path::Path;

pub fn write_qmatrix(q: &QMatrix) -> String {
    let mut out = format!("qmatrix {} {}\n", q.rows(), q.cols());
    for (label, t) in [("R", 0), ("I", 1), ("J", 2), ("K", 3)] {
        out.push_str(label);
        out.push('\n');
        push_block(&mut out, q.comp(t));
    }
    out
}

pub fn write_cmatrix(c: &CMat) -> String {
    let mut out = format!("cmatrix {} {}\n", c.rows(), c.cols());
    out.push_str("R\n");
    push_block(&mut out, &c.re);
    out.push_str("I\n");
    push_block(&mut out, &c.im);
    out
}

pub fn write_rmatrix(m: &Mat) -> String {
    let mut out = format!("rmatrix {} {}\n", m.rows(), m.cols());
    out.push_str("R\n");
    push_block(&mut out, m);
    out
}

fn push_block(out: &mut String, m: &Mat) {
    for i in 0..m.rows() {
        let mut first = true;
        for &x in m.row(i) {
            if !first {
                out.push(' ');
            }
            // canonicalize -0.0 so zero entries always print as `0`
            let x = if x == 0.0 { 0.0 } else { x };
            let _ = write!(out, "{x}");
            first = false;
        }
        out.push('\n');
    }
}

/// Line cursor shared by the matrix and checkpoint parsers.
pub struct Cursor<'a> {
    lines: std::str::Lines<'a>,
    pub lineno: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str) -> Self {
        Cursor {
            lines: text.lines(),
            lineno: 0,
        }
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        self.lineno += 1;
        self.lines.next().ok_or(Error::Parse {
            line: self.lineno,
            msg: "unexpected end of input".into(),
        })
    }

    pub fn expect(&mut self, expected: &str) -> Result<()> {
        let line = self.next_line()?;
        if line.trim() != expected {
            return Err(Error::Parse {
                line: self.lineno,
                msg: format!("expected {expected:?}, found {line:?}"),
            });
        }
        Ok(())
    }
}

fn parse_header(cursor: &mut Cursor, keyword: &str) -> Result<(usize, usize)> {
    let line = cursor.next_line()?;
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != keyword {
        return Err(Error::Parse {
            line: cursor.lineno,
            msg: format!("expected `{keyword} <rows> <cols>`, found {line:?}"),
        });
    }
    let rows = fields[1].parse().map_err(|_| Error::Parse {
        line: cursor.lineno,
        msg: format!("bad row count {:?}", fields[1]),
    })?;
    let cols = fields[2].parse().map_err(|_| Error::Parse {
        line: cursor.lineno,
        msg: format!("bad column count {:?}", fields[2]),
    })?;
    Ok((rows, cols))
}

fn parse_block(cursor: &mut Cursor, label: &str, rows: usize, cols: usize) -> Result<Mat> {
    cursor.expect(label)?;
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        let line = cursor.next_line()?;
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != cols {
            return Err(Error::Parse {
                line: cursor.lineno,
                msg: format!("expected {cols} values, found {}", values.len()),
            });
        }
        for (j, v) in values.iter().enumerate() {
            m[(i, j)] = v.parse().map_err(|_| Error::Parse {
                line: cursor.lineno,
                msg: format!("bad value {v:?}"),
            })?;
        }
    }
    Ok(m)
}

pub fn parse_qmatrix_at(cursor: &mut Cursor) -> Result<QMatrix> {
    let (rows, cols) = parse_header(cursor, "qmatrix")?;
    let r = parse_block(cursor, "R", rows, cols)?;
    let i = parse_block(cursor, "I", rows, cols)?;
    let j = parse_block(cursor, "J", rows, cols)?;
    let k = parse_block(cursor, "K", rows, cols)?;
    QMatrix::from_components([r, i, j, k])
}

pub fn parse_qmatrix(text: &str) -> Result<QMatrix> {
    parse_qmatrix_at(&mut Cursor::new(text))
}

pub fn parse_cmatrix(text: &str) -> Result<CMat> {
    let cursor = &mut Cursor::new(text);
    let (rows, cols) = parse_header(cursor, "cmatrix")?;
    let re = parse_block(cursor, "R", rows, cols)?;
    let im = parse_block(cursor, "I", rows, cols)?;
    Ok(CMat { re, im })
}

pub fn parse_rmatrix_at(cursor: &mut Cursor) -> Result<Mat> {
    let (rows, cols) = parse_header(cursor, "rmatrix")?;
    parse_block(cursor, "R", rows, cols)
}

pub fn parse_rmatrix(text: &str) -> Result<Mat> {
    parse_rmatrix_at(&mut Cursor::new(text))
}

/// Write-then-rename so readers never observe a partial file.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::Quaternion;
    use proptest::prelude::*;

    #[test]
    fn qmatrix_example_rendering() {
        let mut q = QMatrix::zeros(1, 2);
        q.set(0, 0, Quaternion::new(1.0, -0.5, 0.0, 2.0));
        let text = write_qmatrix(&q);
        assert_eq!(
            text,
            "qmatrix 1 2\nR\n1 0\nI\n-0.5 0\nJ\n0 0\nK\n2 0\n"
        );
        assert_eq!(parse_qmatrix(&text).unwrap(), q);
    }

    #[test]
    fn rmatrix_and_cmatrix_roundtrip() {
        let m = Mat::from_rows(&[&[1.5, -2.0], &[0.0, 1e-17]]);
        assert_eq!(parse_rmatrix(&write_rmatrix(&m)).unwrap(), m);
        let c = CMat {
            re: m.clone(),
            im: m.scale(3.0),
        };
        assert_eq!(parse_cmatrix(&write_cmatrix(&c)).unwrap(), c);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(matches!(
            parse_qmatrix("qmatrix 2\nR\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_qmatrix("qmatrix 1 1\nR\n1 2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    proptest! {
        #[test]
        fn qmatrix_roundtrip_is_lossless(values in proptest::collection::vec(-1e6f64..1e6, 16)) {
            let mut q = QMatrix::zeros(2, 2);
            for t in 0..4 {
                for (idx, x) in q.comp_mut(t).data_mut().iter_mut().enumerate() {
                    *x = values[t * 4 + idx];
                }
            }
            let back = parse_qmatrix(&write_qmatrix(&q)).unwrap();
            prop_assert_eq!(back, q);
        }
    }
}
