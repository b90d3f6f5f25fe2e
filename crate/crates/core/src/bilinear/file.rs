//! Line-oriented scheme files.
//!
//! ```text
//! SCHEME v1
//! dims a b c
//! rank T
//! vec column-major        # or row-major
//! char 0                  # 0 = any field, q = only characteristic q
//! U
//! <T lines of a*b integers>
//! V
//! <T lines of b*c integers>
//! W
//! <T lines of a*c integers>
//! END
//! ```
//!
//! `#` starts a comment. Header keys are strict: unknown or repeated keys are
//! errors, and all four are required. Row-major files are converted to the
//! in-memory column-major layout on load; files are always written
//! column-major.

use std::fs;
use std::path::Path;

use crate::field::FieldSpec;

use super::{BilinearError, BilinearScheme, VerifiedScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecOrder {
    ColumnMajor,
    RowMajor,
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let n = self.inner.next();
        if let Some((i, _)) = n {
            self.last = i;
        }
        n
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, l)| *l)
    }

    fn err(&self, line: usize, message: impl Into<String>) -> BilinearError {
        BilinearError::Parse {
            line,
            message: message.into(),
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), BilinearError> {
        match self.next() {
            Some((_, l)) if l == token => Ok(()),
            Some((i, l)) => Err(self.err(i, format!("expected `{token}`, found `{l}`"))),
            None => Err(self.err(self.last + 1, format!("expected `{token}`, found end of file"))),
        }
    }
}

fn parse_ints(line: &str) -> Result<Vec<i64>, String> {
    line.split_whitespace()
        .map(|tok| tok.parse::<i64>().map_err(|_| format!("`{tok}` is not an integer")))
        .collect()
}

fn parse_count(lines: &Lines, line: usize, tok: &str) -> Result<usize, BilinearError> {
    tok.parse::<usize>()
        .map_err(|_| lines.err(line, format!("`{tok}` is not a non-negative integer")))
}

/// Parses scheme text without verifying it.
pub fn parse_scheme(text: &str) -> Result<BilinearScheme, BilinearError> {
    let mut lines = Lines::new(text);
    lines.expect("SCHEME v1")?;

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut rank: Option<usize> = None;
    let mut order: Option<VecOrder> = None;
    let mut characteristic: Option<u64> = None;
    while lines.peek().is_some_and(|l| l != "U") {
        let (ln, l) = lines.next().expect("peeked");
        let mut toks = l.split_whitespace();
        let key = toks.next().unwrap_or("");
        let vals: Vec<&str> = toks.collect();
        let dup = |present: bool| {
            if present {
                Err(lines.err(ln, format!("duplicate header key `{key}`")))
            } else {
                Ok(())
            }
        };
        match (key, vals.as_slice()) {
            ("dims", [a, b, c]) => {
                dup(dims.is_some())?;
                dims = Some((
                    parse_count(&lines, ln, a)?,
                    parse_count(&lines, ln, b)?,
                    parse_count(&lines, ln, c)?,
                ));
            }
            ("rank", [t]) => {
                dup(rank.is_some())?;
                rank = Some(parse_count(&lines, ln, t)?);
            }
            ("vec", [o]) => {
                dup(order.is_some())?;
                order = Some(match *o {
                    "column-major" => VecOrder::ColumnMajor,
                    "row-major" => VecOrder::RowMajor,
                    other => return Err(lines.err(ln, format!("unknown vec order `{other}`"))),
                });
            }
            ("char", [q]) => {
                dup(characteristic.is_some())?;
                characteristic = Some(parse_count(&lines, ln, q)? as u64);
            }
            ("dims" | "rank" | "vec" | "char", _) => {
                return Err(lines.err(ln, format!("wrong number of values for `{key}`")));
            }
            _ => return Err(lines.err(ln, format!("unknown header key `{key}`"))),
        }
    }
    let missing = |name: &str| lines.err(lines.last + 1, format!("missing header key `{name}`"));
    let dims = dims.ok_or_else(|| missing("dims"))?;
    let rank = rank.ok_or_else(|| missing("rank"))?;
    let order = order.ok_or_else(|| missing("vec"))?;
    let characteristic = characteristic.ok_or_else(|| missing("char"))?;
    let (a, b, c) = dims;

    let mut section = |name: &str, rows: usize, cols: usize| -> Result<Vec<Vec<i64>>, BilinearError> {
        lines.expect(name)?;
        let mut out = Vec::with_capacity(rank);
        for r in 0..rank {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| lines.err(lines.last + 1, format!("{name} section ended after {r} of {rank} rows")))?;
            let vals = parse_ints(l).map_err(|e| lines.err(ln, format!("{name} row {r}: {e}")))?;
            if vals.len() != rows * cols {
                return Err(lines.err(
                    ln,
                    format!("{name} row {r} has {} entries, expected {}", vals.len(), rows * cols),
                ));
            }
            out.push(match order {
                VecOrder::ColumnMajor => vals,
                VecOrder::RowMajor => row_to_column_major(&vals, rows, cols),
            });
        }
        Ok(out)
    };
    let u = section("U", a, b)?;
    let v = section("V", b, c)?;
    let w = section("W", a, c)?;
    lines.expect("END")?;
    if let Some((ln, l)) = lines.next() {
        return Err(lines.err(ln, format!("trailing content after END: `{l}`")));
    }
    BilinearScheme::new(dims, u, v, w, characteristic)
}

fn row_to_column_major(vals: &[i64], rows: usize, cols: usize) -> Vec<i64> {
    let mut out = vec![0; vals.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[i + j * rows] = vals[i * cols + j];
        }
    }
    out
}

/// Canonical column-major text for `scheme`.
pub fn scheme_to_text(scheme: &BilinearScheme) -> String {
    let (a, b, c) = scheme.dims();
    let mut s = format!(
        "SCHEME v1\ndims {a} {b} {c}\nrank {}\nvec column-major\nchar {}\n",
        scheme.rank(),
        scheme.characteristic()
    );
    for (name, rows) in [("U", scheme.u()), ("V", scheme.v()), ("W", scheme.w())] {
        s.push_str(name);
        s.push('\n');
        for row in rows {
            let line: Vec<String> = row.iter().map(i64::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
    }
    s.push_str("END\n");
    s
}

/// Reads, parses and verifies a scheme file over `field`.
pub fn load_scheme(path: impl AsRef<Path>, field: FieldSpec) -> Result<VerifiedScheme, BilinearError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| BilinearError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scheme(&text)?.verified(field)
}

pub fn save_scheme(path: impl AsRef<Path>, scheme: &BilinearScheme) -> Result<(), BilinearError> {
    let path = path.as_ref();
    fs::write(path, scheme_to_text(scheme)).map_err(|e| BilinearError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
