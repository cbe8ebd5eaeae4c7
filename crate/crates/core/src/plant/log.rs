use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::synthesizer::Stance;

pub const LOG_HEADER: &str = "t,s,T,step,stance,px,py,z,vx,vy,fz,fpx,fpy,xfoot,yfoot,sat,trunc,fall";

/// One control tick, recorded at the end of the tick.
///
/// Positions are relative to the stance foot while walking and to the feet
/// midpoint while standing. On the tick that ends a step (`s = 1`) the row
/// holds the exact pre-impact state and the landing target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub s: f64,
    /// `None` while standing.
    pub period: Option<f64>,
    pub step: usize,
    /// `None` while standing.
    pub stance: Option<Stance>,
    pub p: [f64; 2],
    pub z: f64,
    pub v: [f64; 2],
    pub fz: f64,
    pub fp: [f64; 2],
    pub foot: [f64; 2],
    pub saturated: bool,
    pub truncated: bool,
    pub fall: bool,
}

impl LogRow {
    pub fn is_impact(&self) -> bool {
        self.stance.is_some() && self.s == 1.0
    }
}

/// Impact record. `v` is both the pre- and the post-impact velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvent {
    pub index: usize,
    pub time: f64,
    /// Stance of the step that just ended.
    pub stance: Stance,
    pub period: f64,
    pub v: [f64; 2],
    /// Pre-impact CoM position relative to the old stance foot.
    pub p_minus: [f64; 2],
    /// Landing point relative to the CoM.
    pub target: [f64; 2],
    pub saturated: bool,
    pub truncated: bool,
}

impl StepEvent {
    /// Post-impact CoM position relative to the new stance foot.
    pub fn p_plus(&self) -> [f64; 2] {
        [-self.target[0], -self.target[1]]
    }

    pub fn from_row(row: &LogRow) -> Option<StepEvent> {
        if !row.is_impact() {
            return None;
        }
        Some(StepEvent {
            index: row.step,
            time: row.t,
            stance: row.stance?,
            period: row.period?,
            v: row.v,
            p_minus: row.p,
            target: row.foot,
            saturated: row.saturated,
            truncated: row.truncated,
        })
    }
}

fn f12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn format_row(out: &mut String, r: &LogRow) {
    let period = r.period.map_or_else(|| "inf".to_string(), f12);
    let stance = r.stance.map_or('S', Stance::letter);
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        f12(r.t),
        f12(r.s),
        period,
        r.step,
        stance,
        f12(r.p[0]),
        f12(r.p[1]),
        f12(r.z),
        f12(r.v[0]),
        f12(r.v[1]),
        f12(r.fz),
        f12(r.fp[0]),
        f12(r.fp[1]),
        f12(r.foot[0]),
        f12(r.foot[1]),
        u8::from(r.saturated),
        u8::from(r.truncated),
        u8::from(r.fall),
    );
}

pub fn to_csv(rows: &[LogRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 200 + 100);
    out.push_str(LOG_HEADER);
    out.push('\n');
    for r in rows {
        format_row(&mut out, r);
    }
    out
}

pub fn write_log(rows: &[LogRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_log(text: &str, source: impl AsRef<Path>) -> Result<Vec<LogRow>> {
    let source = source.as_ref();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == LOG_HEADER => {}
        _ => return Err(Error::parse(source, 1, "missing or unexpected CSV header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::parse(source, n, format!("row {}: {msg}", n - 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 18 {
            return Err(err(format!("expected 18 fields, found {}", f.len())));
        }
        let num = |k: usize| -> Result<f64> {
            f[k].trim()
                .parse::<f64>()
                .map_err(|_| err(format!("invalid number `{}` in column {}", f[k], k + 1)))
        };
        let flag = |k: usize| -> Result<bool> {
            match f[k].trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(err(format!("invalid flag `{other}` in column {}", k + 1))),
            }
        };
        let stance = match f[4].trim() {
            "R" => Some(Stance::Right),
            "L" => Some(Stance::Left),
            "S" => None,
            other => return Err(err(format!("invalid stance `{other}`"))),
        };
        let period = num(2)?;
        rows.push(LogRow {
            t: num(0)?,
            s: num(1)?,
            period: period.is_finite().then_some(period),
            step: f[3]
                .trim()
                .parse()
                .map_err(|_| err(format!("invalid step index `{}`", f[3])))?,
            stance,
            p: [num(5)?, num(6)?],
            z: num(7)?,
            v: [num(8)?, num(9)?],
            fz: num(10)?,
            fp: [num(11)?, num(12)?],
            foot: [num(13)?, num(14)?],
            saturated: flag(15)?,
            truncated: flag(16)?,
            fall: flag(17)?,
        });
    }
    Ok(rows)
}

pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<LogRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_log(&text, path)
}

pub fn read_steps(path: impl AsRef<Path>) -> Result<Vec<StepEvent>> {
    Ok(read_log(path)?.iter().filter_map(StepEvent::from_row).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> LogRow {
        LogRow {
            t: 0.351,
            s: 1.0,
            period: Some(0.35),
            step: 3,
            stance: Some(Stance::Left),
            p: [0.0426, -0.0883],
            z: 0.41,
            v: [0.3, -0.3],
            fz: 166.77,
            fp: [29.5, -61.2],
            foot: [0.0426, -0.0883],
            saturated: false,
            truncated: true,
            fall: false,
        }
    }

    #[test]
    fn csv_round_trip() {
        let standing = LogRow {
            period: None,
            stance: None,
            s: 0.0,
            ..row()
        };
        let text = to_csv(&[row(), standing]);
        let back = parse_log(&text, "log.csv").unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].period, None);
        assert!((back[0].p[1] - row().p[1]).abs() < 1e-13);
        let ev = StepEvent::from_row(&back[0]).unwrap();
        assert_eq!(ev.stance, Stance::Left);
        assert!(StepEvent::from_row(&back[1]).is_none());
    }

    #[test]
    fn corrupted_row_is_named() {
        let mut text = to_csv(&[row(), row()]);
        text = text.replacen("1.00000000000e0", "abc", 1);
        let err = parse_log(&text, "log.csv").unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
    }
}
