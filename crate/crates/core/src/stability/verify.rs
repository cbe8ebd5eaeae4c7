//! Runtime verification of the four step-to-step stability constraints on a
//! recorded trajectory.

use std::fmt::Write as _;

use super::{uub_bound, StabilityReport};
use crate::error::{Error, Result};
use crate::gait::GaitLibrary;
use crate::plant::{LogRow, StepEvent};
use crate::synthesizer::{Desired, Stance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySlack {
    /// Added to `k1`, `k2`.
    pub velocity: f64,
    /// Added to the position bounds, m.
    pub position: f64,
}

impl Default for VerifySlack {
    fn default() -> Self {
        VerifySlack {
            velocity: 0.05,
            position: 0.02,
        }
    }
}

/// Desired post-impact velocity and position for an impact that ends a step
/// on `stance` with period `period`.
pub fn desired_post_impact(
    lib: &GaitLibrary,
    stance: Stance,
    period: f64,
    desired: &Desired,
) -> Result<([f64; 2], [f64; 2])> {
    let j = lib
        .period_index(period)
        .ok_or_else(|| Error::InvalidArgument(format!("period {period} is not in the library")))?;
    let v = [desired.vx, desired.vy_for(stance)];
    let target = match stance {
        Stance::Right => {
            lib.foot_target(j, desired.vx, desired.vy_right, desired.vy_left, true)?
                .0
        }
        Stance::Left => {
            let m = desired.mirrored();
            let (t, _) = lib.foot_target(j, m.vx, m.vy_right, m.vy_left, true)?;
            [t[0], -t[1]]
        }
    };
    Ok((v, [-target[0], -target[1]]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    pub index: usize,
    pub time: f64,
    pub stance: Stance,
    pub period: f64,
    /// `v⁺ - v⁺_d`.
    pub ev: [f64; 2],
    /// `p⁺ - p⁺_d`.
    pub ep: [f64; 2],
    /// The step ending here saw an external velocity change.
    pub disturbed: bool,
    /// Constraints 1-4; 1-2 are `None` without an undisturbed preceding step.
    pub constraints: [Option<bool>; 4],
    /// `|e[i]| / |e[i-1]|` per axis when the previous error is outside the ε-ball.
    pub ratio: [Option<f64>; 2],
}

impl StepCheck {
    pub fn passed(&self) -> bool {
        self.constraints.iter().all(|c| c.unwrap_or(true))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<StepCheck>,
    pub violations: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn table(&self) -> String {
        let mut o = String::from(
            "step      t     stance  T      ex        ey        epx       epy       c1 c2 c3 c4  ratio_x  ratio_y\n",
        );
        let mark = |c: Option<bool>| match c {
            None => "- ",
            Some(true) => "ok",
            Some(false) => "XX",
        };
        let ratio = |r: Option<f64>| r.map_or_else(|| "     -  ".to_string(), |r| format!("{r:8.4}"));
        for c in &self.checks {
            let _ = writeln!(
                o,
                "{:4} {:8.3}  {}      {:.3}  {:+.5} {:+.5} {:+.5} {:+.5}  {} {} {} {}  {} {}{}",
                c.index,
                c.time,
                c.stance.letter(),
                c.period,
                c.ev[0],
                c.ev[1],
                c.ep[0],
                c.ep[1],
                mark(c.constraints[0]),
                mark(c.constraints[1]),
                mark(c.constraints[2]),
                mark(c.constraints[3]),
                ratio(c.ratio[0]),
                ratio(c.ratio[1]),
                if c.disturbed { "  push" } else { "" },
            );
        }
        let _ = writeln!(o, "{} impacts, {} violations", self.checks.len(), self.violations);
        o
    }
}

/// Velocity change a tick's logged force cannot explain, m/s.
const DISTURBANCE_THRESHOLD: f64 = 1e-3;

/// Checks every impact of a log against the report's constants. Impacts are
/// chained only within a walking bout (no standing rows between them), and
/// the contraction checks skip steps that contain an external push.
pub fn verify_log(
    rows: &[LogRow],
    report: &StabilityReport,
    lib: &GaitLibrary,
    desired: &Desired,
    slack: VerifySlack,
) -> Result<VerifyReport> {
    if !(report.mass > 0.0) {
        return Err(Error::InvalidArgument("report mass must be positive".into()));
    }
    let mut bouts: Vec<Vec<(StepEvent, bool)>> = vec![Vec::new()];
    let mut disturbed = false;
    for (i, r) in rows.iter().enumerate() {
        if let Some(prev) = i.checked_sub(1).map(|k| &rows[k]) {
            let dt = r.t - prev.t;
            let jump = (0..2)
                .map(|a| (r.v[a] - prev.v[a] - r.fp[a] / report.mass * dt).abs())
                .fold(0.0, f64::max);
            disturbed |= jump > DISTURBANCE_THRESHOLD;
        }
        if r.stance.is_none() {
            if !bouts.last().is_some_and(Vec::is_empty) {
                bouts.push(Vec::new());
            }
            disturbed = false;
        } else if let Some(ev) = StepEvent::from_row(r) {
            bouts.last_mut().expect("non-empty").push((ev, disturbed));
            disturbed = false;
        }
    }
    let total: usize = bouts.iter().map(Vec::len).sum();
    if total < 3 {
        return Err(Error::InvalidArgument(format!(
            "log has {total} impacts, need at least 3"
        )));
    }
    let eps = [report.eps_x, report.eps_y];
    let k = [report.k1, report.k2];
    let kp = [report.k3, report.k4];
    let mut checks = Vec::with_capacity(total);
    let mut violations = 0;
    for bout in &bouts {
        let mut prev: Option<[f64; 2]> = None;
        for &(ref ev, pushed) in bout {
            let (vd, pd) = desired_post_impact(lib, ev.stance, ev.period, desired)?;
            let e = [ev.v[0] - vd[0], ev.v[1] - vd[1]];
            let pp = ev.p_plus();
            let ep = [pp[0] - pd[0], pp[1] - pd[1]];
            let norm = e[0].hypot(e[1]);
            let mut constraints = [None; 4];
            let mut ratio = [None; 2];
            if let (Some(pe), false) = (prev, pushed) {
                for a in 0..2 {
                    constraints[a] = Some(e[a].abs() <= (k[a] + slack.velocity) * pe[a].abs() + eps[a]);
                    if pe[a].abs() > eps[a] {
                        ratio[a] = Some(e[a].abs() / pe[a].abs());
                    }
                }
            }
            for a in 0..2 {
                constraints[2 + a] = Some(ep[a].abs() <= kp[a] * norm + slack.position);
            }
            let check = StepCheck {
                index: ev.index,
                time: ev.time,
                stance: ev.stance,
                period: ev.period,
                disturbed: pushed,
                ev: e,
                ep,
                constraints,
                ratio,
            };
            if !check.passed() {
                violations += 1;
            }
            checks.push(check);
            prev = Some(e);
        }
    }
    Ok(VerifyReport { checks, violations })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UubCheck {
    /// Initial error.
    pub a: f64,
    pub n: usize,
    /// Largest error from step `n` on.
    pub worst_after: f64,
    pub passed: bool,
}

/// Checks `|e[i]| ≤ b` for `i ≥ N`, with `N` from [`uub_bound`] and
/// `a = |e[0]|`.
pub fn uub_check(errors: &[f64], eps: f64, k: f64, b: f64) -> Result<UubCheck> {
    let Some(first) = errors.first() else {
        return Err(Error::InvalidArgument("no errors to check".into()));
    };
    let a = first.abs();
    let n = if a == 0.0 { 0 } else { uub_bound(eps, k, a, b)? };
    let worst_after = errors.iter().skip(n).map(|e| e.abs()).fold(0.0, f64::max);
    Ok(UubCheck {
        a,
        n,
        worst_after,
        passed: worst_after <= b,
    })
}
