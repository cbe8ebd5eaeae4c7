//! `.gaitlib` text format.
//!
//! ```text
//! version 1
//! outputs 10
//! order M
//! periods k t1 ... tk
//! vx l v1 ... vl
//! rvy n ...
//! lvy n ...
//! gait j u v w        (k·l·n·n blocks, each followed by 10 rows of M+1 values)
//! standing            (followed by 10 rows)
//! ```
//!
//! Floats are written with 17 significant digits so a save/load round trip is
//! bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gait::{GaitLabel, GaitLibrary, GaitParams, NUM_OUTPUTS};

pub const FORMAT_VERSION: u32 = 1;

/// Full-precision float formatting shared by the text formats.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_row(out: &mut String, row: &[f64]) {
    let line: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

fn push_grid(out: &mut String, key: &str, grid: &[f64]) {
    let _ = write!(out, "{key} {}", grid.len());
    for v in grid {
        let _ = write!(out, " {}", fmt17(*v));
    }
    out.push('\n');
}

fn push_gait(out: &mut String, gait: &GaitParams) {
    for r in 0..NUM_OUTPUTS {
        push_row(out, gait.row_at(r));
    }
}

pub fn to_string(lib: &GaitLibrary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "version {FORMAT_VERSION}");
    let _ = writeln!(out, "outputs {NUM_OUTPUTS}");
    let _ = writeln!(out, "order {}", lib.order());
    push_grid(&mut out, "periods", lib.periods());
    push_grid(&mut out, "vx", lib.vx_grid());
    push_grid(&mut out, "rvy", lib.rvy_grid());
    push_grid(&mut out, "lvy", lib.lvy_grid());
    let (k, l, n, m) = (
        lib.periods().len(),
        lib.vx_grid().len(),
        lib.rvy_grid().len(),
        lib.lvy_grid().len(),
    );
    for j in 0..k {
        for u in 0..l {
            for v in 0..n {
                for w in 0..m {
                    let _ = writeln!(out, "gait {j} {u} {v} {w}");
                    push_gait(&mut out, lib.gait(j, u, v, w));
                }
            }
        }
    }
    out.push_str("standing\n");
    push_gait(&mut out, lib.standing());
    out
}

pub fn save_library(lib: &GaitLibrary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string(lib)).map_err(|e| Error::io(path, e))
}

pub fn load_library(path: impl AsRef<Path>) -> Result<GaitLibrary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, path)
}

struct Lines<'a> {
    source: PathBuf,
    iter: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, source: &Path) -> Self {
        Lines {
            source: source.to_path_buf(),
            iter: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::parse(&self.source, line, msg)
    }

    /// Next non-blank line as `(1-based number, tokens)`.
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.iter.by_ref() {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                self.last = i + 1;
                return Ok((i + 1, toks));
            }
        }
        Err(self.err(self.last + 1, format!("unexpected end of file, expected {what}")))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, toks) = self.next(key)?;
        if toks[0] != key {
            return Err(self.err(n, format!("expected `{key}`, found `{}`", toks[0])));
        }
        Ok((n, toks))
    }

    fn float(&self, line: usize, tok: &str) -> Result<f64> {
        tok.parse::<f64>()
            .map_err(|_| self.err(line, format!("invalid number `{tok}`")))
    }

    fn uint(&self, line: usize, tok: &str) -> Result<usize> {
        tok.parse::<usize>()
            .map_err(|_| self.err(line, format!("invalid count `{tok}`")))
    }

    fn scalar(&mut self, key: &str) -> Result<(usize, usize)> {
        let (n, toks) = self.keyed(key)?;
        if toks.len() != 2 {
            return Err(self.err(n, format!("`{key}` takes one value")));
        }
        Ok((n, self.uint(n, toks[1])?))
    }

    fn grid(&mut self, key: &str, descending: bool) -> Result<Vec<f64>> {
        let (n, toks) = self.keyed(key)?;
        if toks.len() < 2 {
            return Err(self.err(n, format!("`{key}` needs a count")));
        }
        let count = self.uint(n, toks[1])?;
        if count == 0 {
            return Err(self.err(n, format!("{key} grid is empty")));
        }
        if toks.len() != count + 2 {
            return Err(self.err(n, format!("{key} declares {count} values but lists {}", toks.len() - 2)));
        }
        let vals = toks[2..].iter().map(|t| self.float(n, t)).collect::<Result<Vec<_>>>()?;
        let monotone = vals
            .windows(2)
            .all(|w| if descending { w[0] > w[1] } else { w[0] < w[1] });
        if !monotone {
            let dir = if descending { "descending" } else { "ascending" };
            return Err(self.err(n, format!("{key} grid not {dir}")));
        }
        Ok(vals)
    }

    fn rows(&mut self, width: usize) -> Result<Vec<Vec<f64>>> {
        let mut rows = Vec::with_capacity(NUM_OUTPUTS);
        for r in 0..NUM_OUTPUTS {
            let (n, toks) = self.next("coefficient row")?;
            if toks.len() != width {
                return Err(self.err(
                    n,
                    format!("row {} has {} coefficients, expected {width}", r + 1, toks.len()),
                ));
            }
            rows.push(toks.iter().map(|t| self.float(n, t)).collect::<Result<Vec<_>>>()?);
        }
        Ok(rows)
    }
}

pub fn parse(text: &str, source: impl AsRef<Path>) -> Result<GaitLibrary> {
    let mut lines = Lines::new(text, source.as_ref());
    let (n, version) = lines.scalar("version")?;
    if version as u32 != FORMAT_VERSION {
        return Err(lines.err(n, format!("unsupported version {version}")));
    }
    let (n, outputs) = lines.scalar("outputs")?;
    if outputs != NUM_OUTPUTS {
        return Err(lines.err(n, format!("expected {NUM_OUTPUTS} outputs, found {outputs}")));
    }
    let (n, order) = lines.scalar("order")?;
    if order < 1 {
        return Err(lines.err(n, "order must be at least 1"));
    }
    let periods = lines.grid("periods", true)?;
    let vx = lines.grid("vx", false)?;
    let rvy = lines.grid("rvy", false)?;
    let lvy = lines.grid("lvy", false)?;

    let total = periods.len() * vx.len() * rvy.len() * lvy.len();
    let mut gaits = Vec::with_capacity(total);
    for (j, &period) in periods.iter().enumerate() {
        for (u, &vxu) in vx.iter().enumerate() {
            for (v, &rv) in rvy.iter().enumerate() {
                for (w, &lv) in lvy.iter().enumerate() {
                    let (n, toks) = lines.next("gait record")?;
                    if toks[0] == "standing" {
                        return Err(lines.err(
                            n,
                            format!(
                                "missing gait record: found {} of {total} before `standing`",
                                gaits.len()
                            ),
                        ));
                    }
                    if toks[0] != "gait" || toks.len() != 5 {
                        return Err(lines.err(n, format!("expected `gait {j} {u} {v} {w}`")));
                    }
                    let idx = toks[1..].iter().map(|t| lines.uint(n, t)).collect::<Result<Vec<_>>>()?;
                    if idx != [j, u, v, w] {
                        return Err(lines.err(
                            n,
                            format!("gait record {idx:?} out of order, expected [{j}, {u}, {v}, {w}]"),
                        ));
                    }
                    let rows = lines.rows(order + 1)?;
                    let label = GaitLabel::new(period, vxu, rv, lv);
                    gaits.push(GaitParams::from_rows(label, &rows).map_err(|e| lines.err(n, e.to_string()))?);
                }
            }
        }
    }
    let (n, toks) = lines.next("standing block")?;
    if toks[0] == "gait" {
        return Err(lines.err(n, format!("extra gait record beyond the {total} declared by the grids")));
    }
    if toks != ["standing"] {
        return Err(lines.err(n, "expected `standing`"));
    }
    let rows = lines.rows(order + 1)?;
    let standing = GaitParams::from_rows(GaitLabel::standing(), &rows).map_err(|e| lines.err(n, e.to_string()))?;
    if let Ok((n, _)) = lines.next("") {
        return Err(lines.err(n, "trailing content after standing block"));
    }
    GaitLibrary::new(periods, vx, rvy, lvy, gaits, standing).map_err(|e| lines.err(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_library, BuilderConfig};

    fn small() -> GaitLibrary {
        let cfg = BuilderConfig {
            periods: vec![0.35, 0.2],
            vx_grid: vec![-0.15, 0.0, 0.3],
            rvy_grid: vec![0.1, 0.4],
            lvy_grid: vec![-0.4, -0.1],
            ..BuilderConfig::default()
        };
        build_library(&cfg).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let lib = small();
        let back = parse(&to_string(&lib), "mem").unwrap();
        assert_eq!(back, lib);
    }

    #[test]
    fn missing_record() {
        let text = to_string(&small());
        // Drop the last gait block (header line + 10 rows).
        let lines: Vec<&str> = text.lines().collect();
        let standing = lines.iter().position(|l| *l == "standing").unwrap();
        let mut kept: Vec<&str> = lines[..standing - 11].to_vec();
        kept.extend_from_slice(&lines[standing..]);
        let err = parse(&kept.join("\n"), "mem").unwrap_err().to_string();
        assert!(err.contains("missing gait record"), "{err}");
    }

    #[test]
    fn descending_vx_grid() {
        let text = to_string(&small());
        let bad: Vec<String> = text
            .lines()
            .map(|l| {
                if l.starts_with("vx ") {
                    "vx 3 0.3 0.0 -0.15".to_string()
                } else {
                    l.to_string()
                }
            })
            .collect();
        let err = parse(&bad.join("\n"), "lib.gaitlib").unwrap_err().to_string();
        assert!(err.contains("grid not ascending"), "{err}");
        assert!(err.contains("lib.gaitlib:5"), "{err}");
    }

    #[test]
    fn malformed_header() {
        let err = parse("version 1\noutputs 9\n", "x").unwrap_err().to_string();
        assert!(err.contains("x:2"), "{err}");
    }
}
