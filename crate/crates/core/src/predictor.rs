//! Centroidal prediction model: vertical PD force law, horizontal pendulum
//! coupling through the shared `f_z / z`, and fixed-step RK4 integration.

use crate::bezier;
use crate::error::{Error, Result};

/// Integration step, s.
pub const DT: f64 = 1e-3;

/// CoM state relative to the stance foot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CentroidalState {
    pub z: f64,
    pub zdot: f64,
    pub p: [f64; 2],
    pub v: [f64; 2],
}

impl CentroidalState {
    pub fn new(z: f64, zdot: f64, p: [f64; 2], v: [f64; 2]) -> Self {
        CentroidalState { z, zdot, p, v }
    }

    /// Rest at height `z` directly over the foot.
    pub fn upright(z: f64) -> Self {
        CentroidalState::new(z, 0.0, [0.0; 2], [0.0; 2])
    }

    fn to_array(self) -> [f64; 6] {
        [self.z, self.zdot, self.p[0], self.p[1], self.v[0], self.v[1]]
    }

    fn from_array(a: [f64; 6]) -> Self {
        CentroidalState::new(a[0], a[1], [a[2], a[3]], [a[4], a[5]])
    }

    /// Reflection through the sagittal plane.
    pub fn mirrored(self) -> Self {
        CentroidalState::new(self.z, self.zdot, [self.p[0], -self.p[1]], [self.v[0], -self.v[1]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorGains {
    pub kp: f64,
    pub kd: f64,
    pub mass: f64,
    pub gravity: f64,
}

impl Default for PredictorGains {
    fn default() -> Self {
        PredictorGains {
            kp: 100.0,
            kd: 20.0,
            mass: 17.0,
            gravity: 9.81,
        }
    }
}

impl PredictorGains {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kp", self.kp),
            ("kd", self.kd),
            ("mass", self.mass),
            ("gravity", self.gravity),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// `(z*, ż*, z̈*)` at an absolute time.
pub trait VerticalReference {
    fn at(&self, t: f64) -> Result<[f64; 3]>;
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantHeight(pub f64);

impl VerticalReference for ConstantHeight {
    fn at(&self, _t: f64) -> Result<[f64; 3]> {
        Ok([self.0, 0.0, 0.0])
    }
}

/// A gait's CoM-height row played back in time: phase `s0` at time `t0`,
/// advancing at `1 / period`. Phase is held at the step ends.
#[derive(Debug, Clone)]
pub struct BezierHeight {
    row: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    period: f64,
    t0: f64,
    s0: f64,
    constant: bool,
}

impl BezierHeight {
    pub fn new(row: &[f64], period: f64, t0: f64, s0: f64) -> Result<Self> {
        if row.len() < 2 {
            return Err(Error::InvalidArgument(
                "height row needs at least 2 coefficients".into(),
            ));
        }
        if !period.is_finite() {
            return Err(Error::NoTimeScale);
        }
        if !(period > 0.0) {
            return Err(Error::InvalidArgument(format!("period {period} must be positive")));
        }
        let d1 = bezier::hodograph(row);
        let d2 = bezier::hodograph(&d1);
        Ok(BezierHeight {
            row: row.to_vec(),
            d1,
            d2,
            period,
            t0,
            s0,
            constant: row.iter().all(|c| *c == row[0]),
        })
    }
}

impl VerticalReference for BezierHeight {
    fn at(&self, t: f64) -> Result<[f64; 3]> {
        if self.constant {
            return Ok([self.row[0], 0.0, 0.0]);
        }
        let s = (self.s0 + (t - self.t0) / self.period).clamp(0.0, 1.0);
        let z = bezier::eval_unchecked(&self.row, s);
        let zd = bezier::eval_unchecked(&self.d1, s) / self.period;
        let zdd = bezier::eval_unchecked(&self.d2, s) / (self.period * self.period);
        Ok([z, zd, zdd])
    }
}

/// Vertical contact force and whether the unilateral clamp engaged.
pub fn vertical_force(state: &CentroidalState, reference: [f64; 3], gains: &PredictorGains) -> (f64, bool) {
    let [zr, zdr, zddr] = reference;
    let raw = (zddr + gains.kp * (zr - state.z) + gains.kd * (zdr - state.zdot) + gains.gravity) * gains.mass;
    if raw < 0.0 {
        (0.0, true)
    } else {
        (raw, false)
    }
}

/// Contact forces accompanying a state derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Forces {
    pub fz: f64,
    /// Horizontal force `m · p̈`.
    pub fp: [f64; 2],
    pub unilateral: bool,
}

/// `(ż, z̈, ṗ, p̈)` with `f_z` scaled by `fz_scale` (1 for the nominal model).
pub fn state_rate_scaled(
    state: &CentroidalState,
    reference: [f64; 3],
    gains: &PredictorGains,
    fz_scale: f64,
) -> Result<(CentroidalState, Forces)> {
    if !(state.z > 0.0) {
        return Err(Error::Singularity(state.z));
    }
    let (fz0, unilateral) = vertical_force(state, reference, gains);
    let fz = fz0 * fz_scale;
    let a = fz / gains.mass;
    let pdd = [state.p[0] * a / state.z, state.p[1] * a / state.z];
    let rate = CentroidalState::new(state.zdot, a - gains.gravity, state.v, pdd);
    let forces = Forces {
        fz,
        fp: [gains.mass * pdd[0], gains.mass * pdd[1]],
        unilateral,
    };
    Ok((rate, forces))
}

pub fn state_rate(state: &CentroidalState, reference: [f64; 3], gains: &PredictorGains) -> Result<CentroidalState> {
    state_rate_scaled(state, reference, gains, 1.0).map(|(r, _)| r)
}

fn axpy(x: [f64; 6], h: f64, k: [f64; 6]) -> [f64; 6] {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// One classical RK4 step of length `h` (may be negative) from time `t`.
pub fn rk4_step(
    state: &CentroidalState,
    t: f64,
    h: f64,
    reference: &dyn VerticalReference,
    gains: &PredictorGains,
    fz_scale: f64,
) -> Result<CentroidalState> {
    let f = |x: [f64; 6], t: f64| -> Result<[f64; 6]> {
        let s = CentroidalState::from_array(x);
        let (r, _) = state_rate_scaled(&s, reference.at(t)?, gains, fz_scale)?;
        Ok(r.to_array())
    };
    let x = state.to_array();
    let k1 = f(x, t)?;
    let k2 = f(axpy(x, 0.5 * h, k1), t + 0.5 * h)?;
    let k3 = f(axpy(x, 0.5 * h, k2), t + 0.5 * h)?;
    let k4 = f(axpy(x, h, k3), t + h)?;
    let out: [f64; 6] = std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    Ok(CentroidalState::from_array(out))
}

/// Integrates from `t0` to `t1` with steps of `dt`, shortening the last one.
/// `t1 < t0` integrates backward.
pub fn integrate(
    state: &CentroidalState,
    t0: f64,
    t1: f64,
    reference: &dyn VerticalReference,
    gains: &PredictorGains,
    dt: f64,
) -> Result<CentroidalState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "integration step {dt} must be positive"
        )));
    }
    let span = t1 - t0;
    let dir = span.signum();
    // Full steps, tolerating round-off so an exact multiple has no sliver step.
    let full = ((span.abs() / dt) + 1e-9).floor() as usize;
    let mut x = *state;
    let mut t = t0;
    for i in 0..full {
        x = rk4_step(&x, t, dir * dt, reference, gains, 1.0)?;
        t = t0 + dir * dt * (i + 1) as f64;
    }
    let rest = t1 - t;
    if rest.abs() > 1e-12 {
        x = rk4_step(&x, t, rest, reference, gains, 1.0)?;
    }
    Ok(x)
}

/// Pre-impact state at `tt` starting from `state` at `t0`.
pub fn predict_preimpact(
    state: &CentroidalState,
    t0: f64,
    tt: f64,
    reference: &dyn VerticalReference,
    gains: &PredictorGains,
) -> Result<CentroidalState> {
    if tt < t0 {
        return Err(Error::InvalidArgument(format!("horizon end {tt} precedes start {t0}")));
    }
    integrate(state, t0, tt, reference, gains, DT).map_err(|e| match e {
        Error::Singularity(z) => Error::PredictionFailed(format!("CoM height reached {z}")),
        other => Error::PredictionFailed(other.to_string()),
    })
}

/// `CP = p + v · sqrt(z / g)` per horizontal axis.
pub fn capture_point(p: [f64; 2], v: [f64; 2], z: f64, gravity: f64) -> [f64; 2] {
    let w = (z / gravity).sqrt();
    [p[0] + v[0] * w, p[1] + v[1] * w]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lip(p0: f64, v0: f64, t: f64) -> (f64, f64) {
        let l = (9.81f64 / 0.41).sqrt();
        (
            p0 * (l * t).cosh() + v0 / l * (l * t).sinh(),
            p0 * l * (l * t).sinh() + v0 * (l * t).cosh(),
        )
    }

    #[test]
    fn equilibrium_force() {
        let g = PredictorGains::default();
        let (fz, flag) = vertical_force(&CentroidalState::upright(0.41), [0.41, 0.0, 0.0], &g);
        assert!((fz - 166.77).abs() < 1e-9);
        assert!(!flag);
        let (fz2, _) = vertical_force(&CentroidalState::upright(0.40), [0.41, 0.0, 0.0], &g);
        assert!((fz2 - fz - 100.0 * 0.01 * 17.0).abs() < 1e-9);
    }

    #[test]
    fn unilateral_clamp() {
        let g = PredictorGains::default();
        // raw = (9.81 - 100 * 0.1) * 17 - ... pick a state giving a negative raw value.
        let s = CentroidalState::new(0.51, 0.5, [0.0; 2], [0.0; 2]);
        let (fz, flag) = vertical_force(&s, [0.41, 0.0, 0.0], &g);
        assert_eq!(fz, 0.0);
        assert!(flag);
    }

    #[test]
    fn upright_has_no_acceleration() {
        let r = state_rate(
            &CentroidalState::upright(0.41),
            [0.41, 0.0, 0.0],
            &PredictorGains::default(),
        )
        .unwrap();
        assert_eq!(r, CentroidalState::default());
    }

    #[test]
    fn singular_height() {
        let s = CentroidalState::upright(0.0);
        assert!(matches!(
            state_rate(&s, [0.41, 0.0, 0.0], &PredictorGains::default()),
            Err(Error::Singularity(_))
        ));
        let err = predict_preimpact(&s, 0.0, 0.1, &ConstantHeight(0.41), &PredictorGains::default()).unwrap_err();
        assert!(matches!(err, Error::PredictionFailed(_)));
    }

    #[test]
    fn periodic_sagittal_orbit() {
        let s = CentroidalState::new(0.41, 0.0, [-0.0426, 0.0], [0.3, 0.0]);
        let out = predict_preimpact(&s, 0.0, 0.35, &ConstantHeight(0.41), &PredictorGains::default()).unwrap();
        let (p, v) = lip(-0.0426, 0.3, 0.35);
        assert!((out.v[0] - v).abs() < 1e-6 && (out.p[0] - p).abs() < 1e-6);
        assert!((out.v[0] - 0.3).abs() < 1e-3);
    }

    #[test]
    fn partial_final_step() {
        let s = CentroidalState::new(0.41, 0.0, [0.02, -0.01], [0.1, 0.2]);
        let out = integrate(&s, 0.0, 0.2345, &ConstantHeight(0.41), &PredictorGains::default(), DT).unwrap();
        let (p, _) = lip(0.02, 0.1, 0.2345);
        assert!((out.p[0] - p).abs() < 1e-9);
    }

    #[test]
    fn capture_point_value() {
        let cp = capture_point([0.1, 0.0], [0.3, 0.0], 0.41, 9.81);
        assert!((cp[0] - 0.1613).abs() < 1e-4);
        assert_eq!(capture_point([0.05, -0.02], [0.0; 2], 0.41, 9.81), [0.05, -0.02]);
    }

    #[test]
    fn bezier_height_reference() {
        let row = [0.41, 0.41, 0.40, 0.40, 0.41, 0.41];
        let r = BezierHeight::new(&row, 0.35, 0.1, 0.2).unwrap();
        let [z, zd, zdd] = r.at(0.1).unwrap();
        assert!((z - bezier::eval(&row, 0.2).unwrap()).abs() < 1e-15);
        assert!((zd - bezier::rate(&row, 0.2, 0.35).unwrap()).abs() < 1e-12);
        assert!((zdd - bezier::second_derivative(&row, 0.2).unwrap() / 0.35f64.powi(2)).abs() < 1e-9);
        let [z1, zd1, _] = r.at(10.0).unwrap();
        assert_eq!(z1, 0.41);
        assert!(zd1.abs() < 1e-12);
    }
}
