//! Reduced-order hybrid walking plant: single-support centroidal dynamics,
//! instantaneous impacts and velocity impulses.

mod log;
mod runner;
mod scenario;

pub use log::{parse_log, read_log, read_steps, to_csv, write_log, LogRow, StepEvent, LOG_HEADER};
pub use runner::{run_scenario, ExitStatus, Outcome};
pub use scenario::{Command, ImpulseEvent, Intent, Scenario, Start, TerrainEvent};

use crate::error::{Error, Result};
use crate::gait::{GaitParams, OutputIndex};
use crate::predictor::{self, BezierHeight, CentroidalState, Forces, PredictorGains, VerticalReference, DT};
use crate::synthesizer::remaining_ticks;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    pub gains: PredictorGains,
    /// Friction coefficient used for cone reporting.
    pub mu: f64,
    /// Multiplier on the commanded vertical force.
    pub fz_bias: f64,
    /// Delay of the tracked vertical reference, s.
    pub z_lag: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        PlantParams {
            gains: PredictorGains::default(),
            mu: 0.6,
            fz_bias: 1.0,
            z_lag: 0.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        if !(self.mu > 0.0) {
            return Err(Error::InvalidArgument("mu must be positive".into()));
        }
        if !(0.8..=1.2).contains(&self.fz_bias) {
            return Err(Error::InvalidArgument(format!(
                "fz_bias {} outside [0.8, 1.2]",
                self.fz_bias
            )));
        }
        if !(self.z_lag >= 0.0) {
            return Err(Error::InvalidArgument("z_lag must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Sagittal,
    Lateral,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::Sagittal => 0,
            Axis::Lateral => 1,
        }
    }
}

struct Lagged<'a> {
    inner: &'a dyn VerticalReference,
    lag: f64,
}

impl VerticalReference for Lagged<'_> {
    fn at(&self, t: f64) -> Result<[f64; 3]> {
        self.inner.at(t - self.lag)
    }
}

/// Advances the stance-relative state by one RK4 step of `dt` from time `t`.
/// Returns the new state and the contact forces at the start of the step.
pub fn step_continuous(
    state: &CentroidalState,
    reference: &dyn VerticalReference,
    t: f64,
    dt: f64,
    params: &PlantParams,
) -> Result<(CentroidalState, Forces)> {
    let lagged = Lagged {
        inner: reference,
        lag: params.z_lag,
    };
    let (_, forces) = predictor::state_rate_scaled(state, lagged.at(t)?, &params.gains, params.fz_bias)?;
    let next = predictor::rk4_step(state, t, dt, &lagged, &params.gains, params.fz_bias)?;
    if !(next.z > 0.0) {
        return Err(Error::Singularity(next.z));
    }
    Ok((next, forces))
}

/// Impact map: the swing foot lands at `foot_target` relative to the CoM and
/// becomes the stance foot. Velocities and height are continuous.
pub fn impact(state: &CentroidalState, foot_target: [f64; 2]) -> CentroidalState {
    CentroidalState {
        p: [-foot_target[0], -foot_target[1]],
        ..*state
    }
}

/// `Δv = impulse / m` on one horizontal axis.
pub fn apply_impulse(state: &CentroidalState, axis: Axis, impulse: f64, mass: f64) -> CentroidalState {
    let mut out = *state;
    out.v[axis.index()] += impulse / mass;
    out
}

/// Simulates one full step of `gait` from phase 0, returning the pre-impact
/// state.
pub fn simulate_step(state: &CentroidalState, gait: &GaitParams, params: &PlantParams) -> Result<CentroidalState> {
    let period = gait.label.period.seconds().ok_or(Error::NoTimeScale)?;
    let reference = BezierHeight::new(gait.row(OutputIndex::ComHeight), period, 0.0, 0.0)?;
    let mut x = *state;
    for k in 0..remaining_ticks(0.0, period, DT) {
        x = step_continuous(&x, &reference, k as f64 * DT, DT, params)?.0;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::ConstantHeight;

    #[test]
    fn impact_keeps_velocity() {
        let s = CentroidalState::new(0.41, 0.0, [0.04, -0.03], [0.3, 0.1]);
        let out = impact(&s, [0.0426, -0.03]);
        assert_eq!(out.v, [0.3, 0.1]);
        assert_eq!(out.p, [-0.0426, 0.03]);
        let twice = impact(&impact(&s, s.p), [-s.p[0], -s.p[1]]);
        assert_eq!(twice.p, s.p);
    }

    #[test]
    fn impulses() {
        let s = CentroidalState::upright(0.41);
        assert_eq!(apply_impulse(&s, Axis::Sagittal, 0.0, 17.0), s);
        let x = apply_impulse(&s, Axis::Sagittal, 9.0, 17.0);
        assert!((x.v[0] - 0.529).abs() < 5e-4);
        let y = apply_impulse(&s, Axis::Lateral, -6.0, 17.0);
        assert!((y.v[1] + 0.353).abs() < 5e-4);
    }

    #[test]
    fn equilibrium_is_fixed() {
        let s = CentroidalState::upright(0.41);
        let (next, f) = step_continuous(&s, &ConstantHeight(0.41), 0.0, DT, &PlantParams::default()).unwrap();
        assert_eq!(next, s);
        assert!((f.fz - 17.0 * 9.81).abs() < 1e-9);
    }

    #[test]
    fn bias_range() {
        let p = PlantParams {
            fz_bias: 1.3,
            ..PlantParams::default()
        };
        assert!(p.validate().is_err());
    }
}
