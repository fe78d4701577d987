//! Plain-text and JSON matrix files.
//!
//! Text format: a header line `dims: d1 d2 ... dk`, then one matrix row per
//! line with whitespace-separated `re+imj` tokens. A single column is read as
//! a state vector. Numbers are written in shortest round-trip form (at most 17 significant
//! digits), so a write/read cycle is exact.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMat, CVec, DensityMatrix, PureState, SubsystemLayout};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub matrix: CMat,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// A parsed input: a column vector is a pure state, a square matrix a
/// density matrix.
#[derive(Clone, Debug)]
pub enum InputState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: Some(line),
        msg: msg.into(),
    }
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{}{:e}j", z.re, sign, z.im.abs())
}

fn parse_complex(tok: &str) -> Option<Complex64> {
    let t = tok.trim();
    if let Some(body) = t.strip_suffix('j').or_else(|| t.strip_suffix('i')) {
        // split at the last sign that is not an exponent sign or leading sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| {
            (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
        });
        return match split {
            Some(k) => {
                let re = body[..k].parse().ok()?;
                let im_str = &body[k..];
                let im = match im_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    s => s.parse().ok()?,
                };
                Some(Complex64::new(0.0, im))
            }
        };
    }
    t.parse().ok().map(|re| Complex64::new(re, 0.0))
}

impl MatrixFile {
    pub fn new(dims: Vec<usize>, matrix: CMat) -> Self {
        Self { dims, matrix }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self::new(rho.layout().dims().to_vec(), rho.matrix().clone())
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let n = psi.dim();
        Self::new(
            psi.layout().dims().to_vec(),
            CMat::from_iterator(n, 1, psi.amplitudes().iter().copied()),
        )
    }

    pub fn to_text(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let mut out = format!("dims: {}\n", dims.join(" "));
        for r in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|c| format_complex(self.matrix[(r, c)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let rest = header
            .strip_prefix("dims:")
            .ok_or_else(|| parse_err(hl, "expected header `dims: d1 ... dk`"))?;
        let dims = rest
            .split_whitespace()
            .map(|t| t.parse::<usize>().ok().filter(|&d| d >= 1))
            .collect::<Option<Vec<_>>>()
            .filter(|d| !d.is_empty())
            .ok_or_else(|| parse_err(hl, "dims must be positive integers"))?;
        let total: usize = dims.iter().product();
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (ln, line) in lines {
            let row = line
                .split_whitespace()
                .map(|t| parse_complex(t).ok_or_else(|| parse_err(ln, format!("bad entry `{t}`"))))
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(parse_err(
                        ln,
                        format!("expected {} entries, found {}", first.len(), row.len()),
                    ));
                }
            }
            if rows.len() == total {
                return Err(parse_err(ln, format!("more than {total} rows")));
            }
            rows.push(row);
        }
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.len() != total || (ncols != total && ncols != 1) {
            return Err(Error::Parse {
                line: None,
                msg: format!(
                    "dims {dims:?} need a {total}x{total} matrix or a {total}-entry column, found {}x{ncols}",
                    rows.len()
                ),
            });
        }
        let matrix = CMat::from_fn(total, ncols, |r, c| rows[r][c]);
        Ok(Self { dims, matrix })
    }

    pub fn to_json(&self) -> String {
        let (r, c) = self.matrix.shape();
        let j = MatrixJson {
            dims: self.dims.clone(),
            re: (0..r)
                .map(|i| (0..c).map(|k| self.matrix[(i, k)].re).collect())
                .collect(),
            im: (0..r)
                .map(|i| (0..c).map(|k| self.matrix[(i, k)].im).collect())
                .collect(),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let j: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: Some(e.line()),
            msg: e.to_string(),
        })?;
        let rows = j.re.len();
        let cols = j.re.first().map_or(0, |r| r.len());
        if j.im.len() != rows || j.re.iter().chain(j.im.iter()).any(|r| r.len() != cols) {
            return Err(Error::Parse {
                line: None,
                msg: "re/im arrays must be rectangular and of equal shape".into(),
            });
        }
        let total: usize = j.dims.iter().product();
        if j.dims.is_empty() || j.dims.contains(&0) || rows != total || (cols != total && cols != 1)
        {
            return Err(Error::Parse {
                line: None,
                msg: format!("dims {:?} inconsistent with {rows}x{cols} data", j.dims),
            });
        }
        let matrix = CMat::from_fn(rows, cols, |r, c| Complex64::new(j.re[r][c], j.im[r][c]));
        Ok(Self {
            dims: j.dims,
            matrix,
        })
    }

    /// Validates against the state invariants; violations are reported as
    /// parse errors since they make the file unusable as input.
    pub fn into_state(self) -> Result<InputState> {
        let layout = SubsystemLayout::try_from(self.dims.clone())?;
        let wrap = |e: Error| Error::Parse {
            line: None,
            msg: format!("file does not hold a valid state: {e}"),
        };
        if self.matrix.ncols() == 1 && self.matrix.nrows() > 1 {
            let v = CVec::from_iterator(self.matrix.nrows(), self.matrix.iter().copied());
            Ok(InputState::Pure(PureState::new(v, layout).map_err(wrap)?))
        } else {
            Ok(InputState::Mixed(
                DensityMatrix::new(self.matrix, layout).map_err(wrap)?,
            ))
        }
    }
}

/// Reads a `.json` or text matrix file, choosing the format by extension.
pub fn read_matrix_file(path: &Path) -> Result<MatrixFile> {
    let text = std::fs::read_to_string(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        MatrixFile::parse_json(&text)
    } else {
        MatrixFile::parse_text(&text)
    }
}
