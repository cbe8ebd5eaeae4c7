//! Offline gait library construction on the constant-height linear inverted
//! pendulum.
//!
//! Every built gait is an exact periodic orbit of the pendulum: one step
//! started from `p⁺ = -foot_target`, `v⁺ = v⁻` ends at the label velocities.
//! Swing rows use the shape `[a, a, a, b, b, b]`, which pins both end values
//! and gives zero rate at both ends.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gait::{GaitLabel, GaitLibrary, GaitParams, OutputIndex, BEZIER_ORDER};
use crate::keyval::KeyValues;

#[derive(Debug, Clone, PartialEq)]
pub struct BuilderConfig {
    /// Nominal CoM height, m.
    pub z_bar: f64,
    pub gravity: f64,
    /// Finite periods, descending.
    pub periods: Vec<f64>,
    pub vx_grid: Vec<f64>,
    pub rvy_grid: Vec<f64>,
    pub lvy_grid: Vec<f64>,
    /// Swing-foot height at `s = 0.5`, m.
    pub swing_apex: f64,
    /// Lateral swing-foot offset of the standing posture, m.
    pub stance_width: f64,
    /// Half-extents of the reachable footstrike box, m.
    pub reach: [f64; 2],
}

impl Default for BuilderConfig {
    fn default() -> Self {
        BuilderConfig {
            z_bar: 0.41,
            gravity: 9.81,
            periods: vec![0.35, 0.2],
            vx_grid: vec![-0.5, -0.3, -0.15, 0.0, 0.15, 0.3, 0.5, 0.7],
            rvy_grid: vec![0.1, 0.35, 0.6],
            lvy_grid: vec![-0.6, -0.35, -0.1],
            swing_apex: 0.07,
            stance_width: 0.10,
            reach: [0.3, 0.3],
        }
    }
}

const CONFIG_KEYS: &[&str] = &[
    "z_bar",
    "gravity",
    "periods",
    "vx",
    "rvy",
    "lvy",
    "swing_apex",
    "stance_width",
    "reach",
];

impl BuilderConfig {
    /// Parses `key value...` lines over the defaults, then applies overrides.
    pub fn from_text(text: &str, source: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let mut kv = KeyValues::parse(text, source, &[])?;
        for o in overrides {
            kv.apply_override(o)?;
        }
        kv.reject_unknown(CONFIG_KEYS)?;
        let mut cfg = BuilderConfig::default();
        if let Some(v) = kv.float("z_bar")? {
            cfg.z_bar = v;
        }
        if let Some(v) = kv.float("gravity")? {
            cfg.gravity = v;
        }
        if let Some(v) = kv.floats("periods")? {
            cfg.periods = v;
        }
        for (key, grid) in [
            ("vx", &mut cfg.vx_grid),
            ("rvy", &mut cfg.rvy_grid),
            ("lvy", &mut cfg.lvy_grid),
        ] {
            if let Some(v) = kv.floats(key)? {
                if v.is_empty() || !v.windows(2).all(|w| w[0] < w[1]) {
                    let line = kv.entry(key).map_or(0, |e| e.line);
                    return Err(kv.err(line, format!("{key} grid must be non-empty and strictly ascending")));
                }
                *grid = v;
            }
        }
        if let Some(v) = kv.float("swing_apex")? {
            cfg.swing_apex = v;
        }
        if let Some(v) = kv.float("stance_width")? {
            cfg.stance_width = v;
        }
        if let Some(v) = kv.pair("reach")? {
            cfg.reach = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.z_bar > 0.0) {
            return bad("z_bar must be positive");
        }
        if !(self.gravity > 0.0) {
            return bad("gravity must be positive");
        }
        if !(self.swing_apex > 0.0) {
            return bad("swing_apex must be positive");
        }
        if !(self.stance_width > 0.0) {
            return bad("stance_width must be positive");
        }
        if self.periods.is_empty() {
            return bad("period list is empty");
        }
        if self.periods.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return bad("periods must be finite and positive");
        }
        if !self.periods.windows(2).all(|w| w[0] > w[1]) {
            return bad("periods must be strictly descending");
        }
        for (name, g) in [("vx", &self.vx_grid), ("rvy", &self.rvy_grid), ("lvy", &self.lvy_grid)] {
            if g.is_empty() || !g.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "{name} grid must be non-empty and strictly ascending"
                )));
            }
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        pendulum_rate(self.gravity, self.z_bar)
    }
}

/// `λ = sqrt(g / z)`.
pub fn pendulum_rate(gravity: f64, z_bar: f64) -> f64 {
    (gravity / z_bar).sqrt()
}

/// Lateral footstrike from the orbital-energy formula
/// `y = (vy⁻ - d) / σ`, `σ = λ tanh(Tλ/2)`, `d = λ² sech(Tλ/2) T v̄y / (2σ)`.
pub fn lateral_footstrike(period: f64, vy_minus: f64, vbar_y: f64, z_bar: f64, gravity: f64) -> f64 {
    let lambda = pendulum_rate(gravity, z_bar);
    let half = 0.5 * period * lambda;
    let sigma = lambda * half.tanh();
    let d = lambda * lambda / half.cosh() * period * vbar_y / (2.0 * sigma);
    (vy_minus - d) / sigma
}

/// Sagittal footstrike `x = vx⁻ tanh(λT/2) / λ` that repeats `vx⁻` every step.
pub fn sagittal_footstrike(period: f64, vx_minus: f64, z_bar: f64, gravity: f64) -> f64 {
    let lambda = pendulum_rate(gravity, z_bar);
    vx_minus * (0.5 * lambda * period).tanh() / lambda
}

/// Exact two-step periodic lateral footstrike: the left-stance step started
/// at `p⁺ = -y`, `v⁺ = R vy⁻` ends at `L vy⁻` after `period` seconds.
///
/// Coincides with [`lateral_footstrike`] when `R vy⁻ = -L vy⁻`.
pub fn periodic_lateral_footstrike(period: f64, vy_right: f64, vy_left: f64, z_bar: f64, gravity: f64) -> f64 {
    let lambda = pendulum_rate(gravity, z_bar);
    let a = lambda * period;
    (vy_right * a.cosh() - vy_left) / (lambda * a.sinh())
}

/// Lateral pre-impact speed of the symmetric in-place orbit whose footstrike
/// is `width`: `σ · width`.
pub fn sway_velocity(period: f64, width: f64, z_bar: f64, gravity: f64) -> f64 {
    let lambda = pendulum_rate(gravity, z_bar);
    lambda * (0.5 * lambda * period).tanh() * width
}

/// Average sagittal velocity over one step of the periodic orbit.
pub fn sagittal_average_velocity(period: f64, vx_minus: f64, z_bar: f64, gravity: f64) -> f64 {
    2.0 * sagittal_footstrike(period, vx_minus, z_bar, gravity) / period
}

/// Pendulum position after `t` seconds from `(p0, v0)`.
fn lip_position(p0: f64, v0: f64, lambda: f64, t: f64) -> f64 {
    p0 * (lambda * t).cosh() + v0 / lambda * (lambda * t).sinh()
}

fn swing_row(start: f64, end: f64) -> [f64; BEZIER_ORDER + 1] {
    [start, start, start, end, end, end]
}

/// Coefficient of the `[0, 0, c, c, 0, 0]` swing-height row that puts `apex` at `s = 0.5`.
fn apex_coefficient(apex: f64) -> f64 {
    // B_2,5(0.5) + B_3,5(0.5) = 20/32.
    apex * 32.0 / 20.0
}

pub fn build_gait(label: GaitLabel, cfg: &BuilderConfig) -> Result<GaitParams> {
    let Some(period) = label.period.seconds() else {
        return Ok(standing_gait(cfg));
    };
    let lambda = cfg.lambda();
    let x_end = sagittal_footstrike(period, label.vx, cfg.z_bar, cfg.gravity);
    let y_end = periodic_lateral_footstrike(period, label.vy_right, label.vy_left, cfg.z_bar, cfg.gravity);
    if x_end.abs() > cfg.reach[0] || y_end.abs() > cfg.reach[1] {
        return Err(Error::Unreachable {
            label: label.to_string(),
            x: x_end,
            y: y_end,
        });
    }
    // Swing foot starts at the previous stance foot: minus the pre-impact CoM
    // offset of the preceding step on the same orbit.
    let x_start = -lip_position(-x_end, label.vx, lambda, period);
    let y_start = -lip_position(-y_end, label.vy_right, lambda, period);

    let mut g = GaitParams::zeros(label, BEZIER_ORDER);
    g.row_mut(OutputIndex::ComHeight).fill(cfg.z_bar);
    g.row_mut(OutputIndex::SwingX)
        .copy_from_slice(&swing_row(x_start, x_end));
    g.row_mut(OutputIndex::SwingY)
        .copy_from_slice(&swing_row(y_start, y_end));
    let c = apex_coefficient(cfg.swing_apex);
    g.row_mut(OutputIndex::SwingZ)
        .copy_from_slice(&[0.0, 0.0, c, c, 0.0, 0.0]);
    Ok(g)
}

/// Infinite-period posture: CoM at nominal height, other foot beside the
/// stance foot at `stance_width`.
pub fn standing_gait(cfg: &BuilderConfig) -> GaitParams {
    let mut g = GaitParams::zeros(GaitLabel::standing(), BEZIER_ORDER);
    g.row_mut(OutputIndex::ComHeight).fill(cfg.z_bar);
    g.row_mut(OutputIndex::SwingY).fill(cfg.stance_width);
    g
}

pub fn build_library(cfg: &BuilderConfig) -> Result<GaitLibrary> {
    cfg.validate()?;
    let mut labels = Vec::new();
    for &t in &cfg.periods {
        for &vx in &cfg.vx_grid {
            for &r in &cfg.rvy_grid {
                for &l in &cfg.lvy_grid {
                    labels.push(GaitLabel::new(t, vx, r, l));
                }
            }
        }
    }
    let gaits = labels
        .par_iter()
        .map(|l| build_gait(*l, cfg))
        .collect::<Result<Vec<_>>>()?;
    GaitLibrary::new(
        cfg.periods.clone(),
        cfg.vx_grid.clone(),
        cfg.rvy_grid.clone(),
        cfg.lvy_grid.clone(),
        gaits,
        standing_gait(cfg),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bezier;

    const Z: f64 = 0.41;
    const G: f64 = 9.81;

    /// Closed-form pendulum velocity after `t`.
    fn lip_velocity(p0: f64, v0: f64, t: f64) -> f64 {
        let l = pendulum_rate(G, Z);
        p0 * l * (l * t).sinh() + v0 * (l * t).cosh()
    }

    #[test]
    fn lateral_footstrike_values() {
        assert_eq!(lateral_footstrike(0.35, 0.0, 0.0, Z, G), 0.0);
        let y = lateral_footstrike(0.35, 0.1, 0.0, Z, G);
        assert!((y - 0.029449).abs() < 5e-6, "{y}");
        // One-step cross-check: the orbit alternates +0.1 / -0.1.
        assert!((lip_velocity(-y, 0.1, 0.35) + 0.1).abs() < 1e-12);
        let y2 = lateral_footstrike(0.35, 0.2, 0.0, Z, G);
        assert!((y2 - 2.0 * y).abs() < 1e-15);
    }

    #[test]
    fn lambda_and_sigma() {
        let l = pendulum_rate(G, Z);
        assert!((l - 4.8915).abs() < 1e-4);
        let sigma = l * (0.35 * l / 2.0).tanh();
        assert!((sigma - 3.3957).abs() < 1e-4);
    }

    #[test]
    fn sagittal_footstrike_is_periodic() {
        assert_eq!(sagittal_footstrike(0.35, 0.0, Z, G), 0.0);
        let x = sagittal_footstrike(0.35, 0.3, Z, G);
        assert!((x - 0.0426).abs() < 5e-5, "{x}");
        assert!((lip_velocity(-x, 0.3, 0.35) - 0.3).abs() <= 1e-9);
        let xs: Vec<f64> = [-0.5, 0.0, 0.2, 0.7]
            .iter()
            .map(|v| sagittal_footstrike(0.35, *v, Z, G))
            .collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn periodic_lateral_matches_formula_for_symmetric_sway() {
        for t in [0.2, 0.35] {
            let a = periodic_lateral_footstrike(t, 0.3, -0.3, Z, G);
            let b = lateral_footstrike(t, 0.3, 0.0, Z, G);
            assert!((a - b).abs() < 1e-14);
        }
        let y = periodic_lateral_footstrike(0.2, 0.5, -0.1, Z, G);
        assert!((lip_velocity(-y, 0.5, 0.2) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn built_gait_boundary_conditions() {
        let cfg = BuilderConfig::default();
        let g = build_gait(GaitLabel::new(0.35, 0.3, 0.4, -0.4), &cfg).unwrap();
        assert!((g.foot_target()[0] - 0.0426).abs() < 5e-5);
        let zf = g.row(OutputIndex::SwingZ);
        assert_eq!(bezier::eval(zf, 0.0).unwrap(), 0.0);
        assert_eq!(bezier::eval(zf, 1.0).unwrap(), 0.0);
        assert!((bezier::eval(zf, 0.5).unwrap() - 0.07).abs() < 1e-15);
        for row in [OutputIndex::SwingZ, OutputIndex::SwingX, OutputIndex::SwingY] {
            assert!(g.output_rate(row, 1.0).unwrap().abs() <= 1e-9);
        }
        assert!(g.row(OutputIndex::ComHeight).iter().all(|z| *z == 0.41));
    }

    #[test]
    fn in_place_gait_sways_at_stance_width() {
        let cfg = BuilderConfig::default();
        let u = sway_velocity(0.35, cfg.stance_width, Z, G);
        let g = build_gait(GaitLabel::new(0.35, 0.0, u, -u), &cfg).unwrap();
        let t = g.foot_target();
        assert_eq!(t[0], 0.0);
        assert!((t[1] - cfg.stance_width).abs() < 1e-12);
        // Symmetric orbit: the swing foot starts and ends at the same offset.
        assert!((g.row(OutputIndex::SwingY)[0] - t[1]).abs() < 1e-12);
        assert_eq!(standing_gait(&cfg).foot_target(), [0.0, cfg.stance_width]);
    }

    #[test]
    fn lateral_sign_symmetry() {
        let cfg = BuilderConfig::default();
        for a in [0.1, 0.25, 0.4] {
            let m = build_gait(GaitLabel::new(0.35, 0.15, a, -a), &cfg).unwrap().mirror();
            let b = build_gait(GaitLabel::new(0.35, 0.15, -a, a), &cfg).unwrap();
            assert_eq!(m.label, GaitLabel::new(0.35, 0.15, a, -a));
            for (x, y) in m.coefficients().iter().zip(b.coefficients()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn unreachable_footstrike_names_label() {
        let cfg = BuilderConfig::default();
        let err = build_gait(GaitLabel::new(0.35, 3.0, 0.4, -0.4), &cfg)
            .unwrap_err()
            .to_string();
        assert!(err.contains("vx=3"), "{err}");
    }

    #[test]
    fn library_size() {
        let lib = build_library(&BuilderConfig::default()).unwrap();
        assert_eq!(lib.len(), 2 * 8 * 3 * 3);
        assert_eq!(lib.periods(), &[0.35, 0.2]);
    }

    #[test]
    fn config_file_and_overrides() {
        let cfg = BuilderConfig::from_text(
            "periods 0.35 0.2\nvx -0.15 0 0.15\n",
            "cfg",
            &["swing_apex=0.05".to_string()],
        )
        .unwrap();
        assert_eq!(cfg.vx_grid, vec![-0.15, 0.0, 0.15]);
        assert_eq!(cfg.swing_apex, 0.05);
        assert!(BuilderConfig::from_text("periods\n", "cfg", &[]).is_err());
        assert!(BuilderConfig::from_text("bogus 1\n", "cfg", &[]).is_err());
    }
}
