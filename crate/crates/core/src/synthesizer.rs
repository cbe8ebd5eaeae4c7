//! Per-tick gait synthesis: period selection by pre-impact prediction,
//! trilinear interpolation, P-type footstrike modification and feasibility
//! checks. Everything here works in the right-stance convention; left-stance
//! queries are mirrored on the way in and out.

use crate::error::{Error, Result};
use crate::gait::{GaitLibrary, GaitParams, OutputIndex};
use crate::predictor::{self, BezierHeight, CentroidalState, PredictorGains, DT};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2 {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Box2 {
    pub fn symmetric(half: [f64; 2]) -> Self {
        Box2 {
            min: [-half[0], -half[1]],
            max: half,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (0..2).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.min[0] + self.max[0]), 0.5 * (self.min[1] + self.max[1])]
    }
}

/// Feasible pre-impact CoM positions and swing-foot targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleRegions {
    pub com: Box2,
    pub foot_x: [f64; 2],
    /// Admissible `|y|` range; the lower bound is the collision clearance.
    pub foot_y: [f64; 2],
}

impl Default for FeasibleRegions {
    fn default() -> Self {
        FeasibleRegions {
            com: Box2::symmetric([0.25, 0.2]),
            foot_x: [-0.3, 0.3],
            foot_y: [0.04, 0.3],
        }
    }
}

impl FeasibleRegions {
    pub fn validate(&self) -> Result<()> {
        let c = &self.com;
        if !(c.min[0] <= c.max[0] && c.min[1] <= c.max[1]) {
            return Err(Error::InvalidArgument("S_CoM box is empty".into()));
        }
        if !(self.foot_x[0] <= self.foot_x[1]) {
            return Err(Error::InvalidArgument("S_foot x range is empty".into()));
        }
        if !(self.foot_y[0] > 0.0 && self.foot_y[0] <= self.foot_y[1]) {
            return Err(Error::InvalidArgument(
                "S_foot lateral clearance must be positive and below the outer bound".into(),
            ));
        }
        Ok(())
    }

    pub fn foot_contains(&self, t: [f64; 2]) -> bool {
        let ay = t[1].abs();
        t[0] >= self.foot_x[0] && t[0] <= self.foot_x[1] && ay >= self.foot_y[0] && ay <= self.foot_y[1]
    }

    /// Nearest admissible foot target.
    pub fn truncate_foot(&self, t: [f64; 2]) -> [f64; 2] {
        let x = t[0].clamp(self.foot_x[0], self.foot_x[1]);
        let sign = if t[1] < 0.0 { -1.0 } else { 1.0 };
        [x, sign * t[1].abs().clamp(self.foot_y[0], self.foot_y[1])]
    }
}

/// Desired post-impact velocities and commanded period index.
///
/// `vy_right` is the lateral velocity wanted at the end of a right-stance
/// step (the impact onto the left foot), `vy_left` at the end of a
/// left-stance step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Desired {
    pub vx: f64,
    pub vy_right: f64,
    pub vy_left: f64,
    pub period_index: usize,
}

impl Desired {
    pub fn new(vx: f64, vy_right: f64, vy_left: f64, period_index: usize) -> Self {
        Desired {
            vx,
            vy_right,
            vy_left,
            period_index,
        }
    }

    pub fn mirrored(self) -> Self {
        Desired {
            vx: self.vx,
            vy_right: -self.vy_left,
            vy_left: -self.vy_right,
            period_index: self.period_index,
        }
    }

    /// Desired lateral velocity at the end of a step on `stance`.
    pub fn vy_for(&self, stance: Stance) -> f64 {
        match stance {
            Stance::Right => self.vy_right,
            Stance::Left => self.vy_left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesizerConfig {
    pub kx: f64,
    pub ky: f64,
    pub regions: FeasibleRegions,
    pub desired: Desired,
    /// Half-extent of a single foot's support box, m.
    pub support_halfwidth: [f64; 2],
    /// Cap on each footstrike modification, m.
    pub max_modification: f64,
    pub gains: PredictorGains,
}

impl Default for SynthesizerConfig {
    fn default() -> Self {
        SynthesizerConfig {
            kx: 0.08,
            ky: 0.095,
            regions: FeasibleRegions::default(),
            desired: Desired::new(0.0, 0.3, -0.3, 0),
            support_halfwidth: [0.07, 0.04],
            max_modification: 0.02,
            gains: PredictorGains::default(),
        }
    }
}

/// Admissible open gain interval `(0, -2/δ)`.
pub fn gain_interval(delta: f64) -> (f64, f64) {
    (0.0, -2.0 / delta)
}

/// `0 < k < -2/δ`, strict on both sides.
pub fn gain_admissible(k: f64, delta: f64) -> bool {
    let (lo, hi) = gain_interval(delta);
    delta < 0.0 && k > lo && k < hi
}

impl SynthesizerConfig {
    pub fn validate(&self) -> Result<()> {
        self.regions.validate()?;
        self.gains.validate()?;
        if !(self.max_modification >= 0.0) {
            return Err(Error::InvalidArgument("max_modification must be non-negative".into()));
        }
        if !(self.support_halfwidth[0] > 0.0 && self.support_halfwidth[1] > 0.0) {
            return Err(Error::InvalidArgument("support_halfwidth must be positive".into()));
        }
        Ok(())
    }

    /// Rejects gains outside `(0, -2/δ)` on either axis.
    pub fn check_gate(&self, delta_x: f64, delta_y: f64) -> Result<()> {
        for (axis, k, d) in [("kx", self.kx, delta_x), ("ky", self.ky, delta_y)] {
            if !gain_admissible(k, d) {
                let (lo, hi) = gain_interval(d);
                return Err(Error::GainGate(format!(
                    "{axis} = {k} outside admissible interval ({lo}, {hi}) for delta = {d}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stance {
    Right,
    Left,
}

impl Stance {
    pub fn other(self) -> Stance {
        match self {
            Stance::Right => Stance::Left,
            Stance::Left => Stance::Right,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Stance::Right => 'R',
            Stance::Left => 'L',
        }
    }
}

/// Timing of the current step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    /// Time since the step started, s.
    pub t0: f64,
    /// Accumulated phase.
    pub s0: f64,
    pub period: f64,
    pub step: usize,
    pub stance: Stance,
}

impl PhaseState {
    pub fn start(period: f64, stance: Stance) -> Self {
        PhaseState {
            t0: 0.0,
            s0: 0.0,
            period,
            step: 0,
            stance,
        }
    }
}

/// Control ticks left until `s` reaches 1 at `period`; at least 1.
pub fn remaining_ticks(s: f64, period: f64, dt: f64) -> usize {
    let r = (1.0 - s) * period / dt;
    (r - 1e-9).ceil().max(1.0) as usize
}

/// Advances the phase by one tick of `dt`, switching to `new_period` first
/// when given. Phase saturates at 1 on the tick that ends the step.
pub fn phase_advance(phase: PhaseState, dt: f64, new_period: Option<f64>) -> PhaseState {
    let period = new_period.unwrap_or(phase.period);
    let ends = remaining_ticks(phase.s0, period, dt) <= 1;
    PhaseState {
        t0: phase.t0 + dt,
        s0: if ends { 1.0 } else { phase.s0 + dt / period },
        period,
        ..phase
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub gait: GaitParams,
    pub period: f64,
    pub period_index: usize,
    /// `t0 + (1 - s0) · T`.
    pub step_duration: f64,
    /// Predicted pre-impact state in the caller's stance frame.
    pub predicted: Option<CentroidalState>,
    pub saturated: bool,
    pub truncated: bool,
    pub fall: bool,
}

/// Is `(p⁻, g_foot)` inside `S_feasible` for period index `j`?
pub fn check_feasible(
    p_minus: [f64; 2],
    v_minus: [f64; 2],
    vys: f64,
    j: usize,
    lib: &GaitLibrary,
    regions: &FeasibleRegions,
) -> Result<bool> {
    if !regions.com.contains(p_minus) {
        return Ok(false);
    }
    let (foot, _) = lib.foot_target(j, v_minus[0], v_minus[1], vys, true)?;
    Ok(regions.foot_contains(foot))
}

/// Algorithm 1 for one tick.
pub fn synthesize(
    state: &CentroidalState,
    phase: &PhaseState,
    lib: &GaitLibrary,
    cfg: &SynthesizerConfig,
) -> Result<SynthesisResult> {
    if lib.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    match phase.stance {
        Stance::Right => synthesize_right(state, phase, lib, cfg, &cfg.desired),
        Stance::Left => {
            let mut r = synthesize_right(&state.mirrored(), phase, lib, cfg, &cfg.desired.mirrored())?;
            r.gait = r.gait.mirror();
            r.predicted = r.predicted.map(CentroidalState::mirrored);
            Ok(r)
        }
    }
}

fn synthesize_right(
    state: &CentroidalState,
    phase: &PhaseState,
    lib: &GaitLibrary,
    cfg: &SynthesizerConfig,
    desired: &Desired,
) -> Result<SynthesisResult> {
    let vys_of = |vy: f64| desired.vy_right + desired.vy_left - vy;
    let start = desired.period_index;
    lib.period(start)?;
    for j in start..lib.periods().len() {
        let period = lib.periods()[j];
        // Height reference of the gait matching the current velocity.
        let current = lib.interpolate(j, state.v[0], state.v[1], vys_of(state.v[1]), true)?;
        let reference = BezierHeight::new(current.gait.row(OutputIndex::ComHeight), period, 0.0, phase.s0)?;
        let horizon = remaining_ticks(phase.s0, period, DT) as f64 * DT;
        let Ok(pred) = predictor::predict_preimpact(state, 0.0, horizon, &reference, &cfg.gains) else {
            continue;
        };
        let vys = vys_of(pred.v[1]);
        if !check_feasible(pred.p, pred.v, vys, j, lib, &cfg.regions)? {
            continue;
        }
        let interp = lib.interpolate(j, pred.v[0], pred.v[1], vys, true)?;
        let mut gait = interp.gait;
        let cap = cfg.max_modification;
        let dx = cfg.kx * (pred.v[0] - desired.vx);
        let dy = -cfg.ky * (pred.v[1] - desired.vy_right);
        let mut truncated = dx.abs() > cap || dy.abs() > cap;
        let base = gait.foot_target();
        let mut target = [base[0] + dx.clamp(-cap, cap), base[1] + dy.clamp(-cap, cap)];
        if !cfg.regions.foot_contains(target) {
            target = cfg.regions.truncate_foot(target);
            truncated = true;
        }
        gait.set_foot_target(target);
        return Ok(SynthesisResult {
            gait,
            period,
            period_index: j,
            step_duration: phase.t0 + (1.0 - phase.s0) * period,
            predicted: Some(pred),
            saturated: interp.saturated,
            truncated,
            fall: false,
        });
    }
    let period = lib.periods()[start];
    let interp = lib.interpolate(start, state.v[0], state.v[1], vys_of(state.v[1]), true)?;
    Ok(SynthesisResult {
        gait: interp.gait,
        period,
        period_index: start,
        step_duration: phase.t0 + (1.0 - phase.s0) * period,
        predicted: None,
        saturated: interp.saturated,
        truncated: false,
        fall: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Standing,
    Walking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandingDecision {
    KeepStanding,
    StartStepping,
    /// At an impact: the capture point is inside the new stance foot's box.
    MayStop,
    KeepWalking,
}

/// Capture-point criterion. `cp` is relative to the center of `support`:
/// the double-support hull while standing, the new stance foot's box at an
/// impact while walking.
pub fn standing_policy(mode: Mode, cp: [f64; 2], support: [f64; 2]) -> StandingDecision {
    let inside = Box2::symmetric(support).contains(cp);
    match (mode, inside) {
        (Mode::Standing, true) => StandingDecision::KeepStanding,
        (Mode::Standing, false) => StandingDecision::StartStepping,
        (Mode::Walking, true) => StandingDecision::MayStop,
        (Mode::Walking, false) => StandingDecision::KeepWalking,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_switch_keeps_continuity() {
        let mut ph = PhaseState::start(0.35, Stance::Right);
        for _ in 0..175 {
            ph = phase_advance(ph, 1e-3, None);
        }
        assert!((ph.s0 - 0.5).abs() < 1e-12);
        let before = ph.s0;
        ph = phase_advance(ph, 1e-3, Some(0.2));
        assert!((ph.s0 - before - 1e-3 / 0.2).abs() < 1e-12);
        let mut ticks = 1;
        while ph.s0 < 1.0 {
            ph = phase_advance(ph, 1e-3, None);
            ticks += 1;
        }
        assert_eq!(ticks, 100);
        assert!((ph.t0 - 0.275).abs() < 1e-12);
    }

    #[test]
    fn remaining_ticks_counts() {
        assert_eq!(remaining_ticks(0.0, 0.35, 1e-3), 350);
        assert_eq!(remaining_ticks(0.5, 0.2, 1e-3), 100);
        assert_eq!(remaining_ticks(0.999, 0.35, 1e-3), 1);
    }

    #[test]
    fn foot_truncation() {
        let r = FeasibleRegions::default();
        assert_eq!(r.truncate_foot([0.5, 0.01]), [0.3, 0.04]);
        assert_eq!(r.truncate_foot([-0.1, -0.5]), [-0.1, -0.3]);
        assert!(!r.foot_contains([0.0, 0.02]));
        assert!(r.foot_contains([0.0, -0.1]));
    }

    #[test]
    fn gate_is_strict() {
        assert!(gain_admissible(0.08, -10.0));
        assert!(!gain_admissible(0.0, -10.0));
        assert!(!gain_admissible(0.2, -10.0));
        assert!(!gain_admissible(0.1, 1.0));
    }

    #[test]
    fn policy_table() {
        assert_eq!(
            standing_policy(Mode::Standing, [0.01, 0.0], [0.07, 0.14]),
            StandingDecision::KeepStanding
        );
        assert_eq!(
            standing_policy(Mode::Standing, [0.1, 0.0], [0.07, 0.14]),
            StandingDecision::StartStepping
        );
        assert_eq!(
            standing_policy(Mode::Walking, [0.0, 0.03], [0.07, 0.04]),
            StandingDecision::MayStop
        );
        assert_eq!(
            standing_policy(Mode::Walking, [0.0, 0.05], [0.07, 0.04]),
            StandingDecision::KeepWalking
        );
    }
}
