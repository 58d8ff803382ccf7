//! Plain-text matrix interchange.
//!
//! A matrix is written as a header line `rows cols` followed by the entries
//! in row-major order as whitespace-separated `re im` pairs (one matrix row
//! per line when written by this module). A list of matrices is prefixed by
//! a line holding the count.

use std::fmt::Write as _;

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(n, line)| {
                let content = line.split('#').next().unwrap_or("");
                content.split_whitespace().map(move |t| (n + 1, t))
            })
            .collect();
        Self { items, pos: 0 }
    }

    fn last_line(&self) -> usize {
        self.items.last().map(|t| t.0).unwrap_or(1)
    }

    fn next<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let Some(&(line, tok)) = self.items.get(self.pos) else {
            return Err(Error::Parse {
                line: self.last_line(),
                message: format!("unexpected end of input, expected {what}"),
            });
        };
        self.pos += 1;
        tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("expected {what}, found `{tok}`"),
        })
    }

    fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some(&(line, tok)) => Err(Error::Parse {
                line,
                message: format!("trailing token `{tok}`"),
            }),
        }
    }
}

fn read_one(tokens: &mut Tokens) -> Result<ComplexMatrix> {
    let rows: usize = tokens.next("row count")?;
    let cols: usize = tokens.next("column count")?;
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            line: tokens.items[tokens.pos - 1].0,
            message: "matrix dimensions must be positive".into(),
        });
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let line = tokens.items.get(tokens.pos).map(|t| t.0).unwrap_or(0);
            let re: f64 = tokens.next("real part")?;
            let im: f64 = tokens.next("imaginary part")?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite entry at ({i}, {j})"),
                });
            }
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

pub fn read_matrix(text: &str) -> Result<ComplexMatrix> {
    let mut tokens = Tokens::new(text);
    let m = read_one(&mut tokens)?;
    tokens.finish()?;
    Ok(m)
}

pub fn read_matrix_list(text: &str) -> Result<Vec<ComplexMatrix>> {
    let mut tokens = Tokens::new(text);
    let count: usize = tokens.next("matrix count")?;
    let list = (0..count)
        .map(|_| read_one(&mut tokens))
        .collect::<Result<Vec<_>>>()?;
    tokens.finish()?;
    Ok(list)
}

fn write_one(out: &mut String, m: &ComplexMatrix) {
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:e} {:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn write_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    write_one(&mut out, m);
    out
}

pub fn write_matrix_list(ms: &[ComplexMatrix]) -> String {
    let mut out = format!("{}\n", ms.len());
    for m in ms {
        write_one(&mut out, m);
    }
    out
}
