//! Gaits as Bézier coefficient matrices, and the multi-period gait library.
//!
//! Every gait is stored in the right-stance convention: the swing foot is the
//! left foot and lateral quantities are expressed in the world frame.
//! [`GaitParams::mirror`] converts to and from the left-stance convention.

use std::fmt;

use crate::bezier;
use crate::error::{Error, Result};

/// Number of output rows in a gait.
pub const NUM_OUTPUTS: usize = 10;

/// Bézier order used library-wide.
pub const BEZIER_ORDER: usize = 5;

/// Output rows in their frozen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum OutputIndex {
    TorsoRoll = 0,
    TorsoPitch = 1,
    TorsoYaw = 2,
    ComHeight = 3,
    SwingX = 4,
    SwingY = 5,
    SwingZ = 6,
    FootRoll = 7,
    FootPitch = 8,
    FootYaw = 9,
}

impl OutputIndex {
    pub const ALL: [OutputIndex; NUM_OUTPUTS] = [
        OutputIndex::TorsoRoll,
        OutputIndex::TorsoPitch,
        OutputIndex::TorsoYaw,
        OutputIndex::ComHeight,
        OutputIndex::SwingX,
        OutputIndex::SwingY,
        OutputIndex::SwingZ,
        OutputIndex::FootRoll,
        OutputIndex::FootPitch,
        OutputIndex::FootYaw,
    ];

    /// Rows whose sign flips under a left/right reflection.
    pub const LATERAL_ODD: [OutputIndex; 5] = [
        OutputIndex::TorsoRoll,
        OutputIndex::TorsoYaw,
        OutputIndex::SwingY,
        OutputIndex::FootRoll,
        OutputIndex::FootYaw,
    ];

    pub fn row(self) -> usize {
        self as usize
    }
}

/// Step period of a gait. Standing is the infinite-period gait.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Period {
    Finite(f64),
    Standing,
}

impl Period {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Period::Finite(t) => Some(t),
            Period::Standing => None,
        }
    }

    pub fn is_standing(self) -> bool {
        matches!(self, Period::Standing)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Finite(t) => write!(f, "{t}"),
            Period::Standing => f.write_str("inf"),
        }
    }
}

/// `[T, vx⁻, R vy⁻, L vy⁻]`: period and pre-impact CoM velocities.
///
/// `vy_right` is the lateral pre-impact velocity at the end of a right-stance
/// step, `vy_left` the one at the end of the following left-stance step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitLabel {
    pub period: Period,
    pub vx: f64,
    pub vy_right: f64,
    pub vy_left: f64,
}

impl GaitLabel {
    pub fn new(period: f64, vx: f64, vy_right: f64, vy_left: f64) -> Self {
        GaitLabel {
            period: Period::Finite(period),
            vx,
            vy_right,
            vy_left,
        }
    }

    pub fn standing() -> Self {
        GaitLabel {
            period: Period::Standing,
            vx: 0.0,
            vy_right: 0.0,
            vy_left: 0.0,
        }
    }

    /// Average lateral velocity over the two-step cycle.
    pub fn lateral_average(&self) -> f64 {
        0.5 * (self.vy_right + self.vy_left)
    }

    /// Lateral velocity difference `R vy⁻ - L vy⁻`.
    pub fn lateral_difference(&self) -> f64 {
        self.vy_right - self.vy_left
    }

    /// Inverse of [`lateral_average`](Self::lateral_average) / [`lateral_difference`](Self::lateral_difference).
    pub fn lateral_from_average(average: f64, difference: f64) -> (f64, f64) {
        (average + 0.5 * difference, average - 0.5 * difference)
    }
}

impl fmt::Display for GaitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(T={}, vx={}, Rvy={}, Lvy={})",
            self.period, self.vx, self.vy_right, self.vy_left
        )
    }
}

/// One gait: a `NUM_OUTPUTS × (order + 1)` coefficient matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitParams {
    pub label: GaitLabel,
    order: usize,
    alpha: Vec<f64>,
}

impl GaitParams {
    pub fn zeros(label: GaitLabel, order: usize) -> Self {
        GaitParams {
            label,
            order,
            alpha: vec![0.0; NUM_OUTPUTS * (order + 1)],
        }
    }

    pub fn from_rows(label: GaitLabel, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != NUM_OUTPUTS {
            return Err(Error::InvalidArgument(format!(
                "expected {NUM_OUTPUTS} rows, got {}",
                rows.len()
            )));
        }
        let width = rows[0].len();
        if width < 2 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidArgument("ragged or too short coefficient rows".into()));
        }
        Ok(GaitParams {
            label,
            order: width - 1,
            alpha: rows.concat(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.alpha
    }

    pub fn row(&self, index: OutputIndex) -> &[f64] {
        self.row_at(index.row())
    }

    pub fn row_mut(&mut self, index: OutputIndex) -> &mut [f64] {
        let w = self.order + 1;
        let r = index.row();
        &mut self.alpha[r * w..(r + 1) * w]
    }

    pub(crate) fn row_at(&self, r: usize) -> &[f64] {
        let w = self.order + 1;
        &self.alpha[r * w..(r + 1) * w]
    }

    /// Last coefficient of the x/y swing rows: the pre-impact swing-foot
    /// position relative to the CoM.
    pub fn foot_target(&self) -> [f64; 2] {
        let m = self.order;
        [self.row(OutputIndex::SwingX)[m], self.row(OutputIndex::SwingY)[m]]
    }

    pub fn set_foot_target(&mut self, target: [f64; 2]) {
        let m = self.order;
        self.row_mut(OutputIndex::SwingX)[m] = target[0];
        self.row_mut(OutputIndex::SwingY)[m] = target[1];
    }

    /// Value of output `index` at phase `s`.
    pub fn output(&self, index: OutputIndex, s: f64) -> Result<f64> {
        bezier::eval(self.row(index), s)
    }

    /// Time derivative of output `index` at phase `s`.
    pub fn output_rate(&self, index: OutputIndex, s: f64) -> Result<f64> {
        match self.label.period {
            Period::Finite(t) => bezier::rate(self.row(index), s, t),
            Period::Standing => Err(Error::NoTimeScale),
        }
    }

    /// Reflects the gait through the sagittal plane: lateral-odd rows change
    /// sign and the right/left lateral labels swap with their signs flipped.
    pub fn mirror(&self) -> GaitParams {
        let mut out = self.clone();
        for idx in OutputIndex::LATERAL_ODD {
            for c in out.row_mut(idx) {
                *c = -*c;
            }
        }
        out.label.vy_right = -self.label.vy_left;
        out.label.vy_left = -self.label.vy_right;
        out
    }
}

/// Result of a library query.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolated {
    pub gait: GaitParams,
    /// Some query coordinate lay outside the grid and was clamped.
    pub saturated: bool,
}

/// Per-axis cell location: lower index and blend weight toward `index + 1`.
#[derive(Debug, Clone, Copy)]
struct Cell {
    lower: usize,
    upper: usize,
    xi: f64,
}

fn locate(grid: &[f64], value: f64, axis: &'static str, clamp: bool) -> Result<(Cell, bool)> {
    let first = grid[0];
    let last = grid[grid.len() - 1];
    let mut v = value;
    let mut saturated = false;
    if !(first..=last).contains(&value) {
        if !clamp || value.is_nan() {
            return Err(Error::OutOfRange {
                axis,
                value,
                min: first,
                max: last,
            });
        }
        v = value.clamp(first, last);
        saturated = true;
    }
    if grid.len() == 1 {
        return Ok((
            Cell {
                lower: 0,
                upper: 0,
                xi: 0.0,
            },
            saturated,
        ));
    }
    // Largest lower index with grid[lower] <= v, capped so that upper exists.
    let lower = grid.partition_point(|g| *g <= v).saturating_sub(1).min(grid.len() - 2);
    let upper = lower + 1;
    let xi = (v - grid[lower]) / (grid[upper] - grid[lower]);
    Ok((Cell { lower, upper, xi }, saturated))
}

/// Dense `k × l × n × n` grid of periodic gaits plus the standing gait.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitLibrary {
    order: usize,
    periods: Vec<f64>,
    vx_grid: Vec<f64>,
    rvy_grid: Vec<f64>,
    lvy_grid: Vec<f64>,
    gaits: Vec<GaitParams>,
    standing: GaitParams,
}

fn check_grid(name: &str, grid: &[f64], descending: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} grid has non-finite values")));
    }
    let ok = grid
        .windows(2)
        .all(|w| if descending { w[0] > w[1] } else { w[0] < w[1] });
    if !ok {
        let dir = if descending { "descending" } else { "ascending" };
        return Err(Error::InvalidArgument(format!("{name} grid not {dir}")));
    }
    Ok(())
}

impl GaitLibrary {
    /// Assembles a library from gaits ordered `[period][vx][rvy][lvy]`.
    pub fn new(
        periods: Vec<f64>,
        vx_grid: Vec<f64>,
        rvy_grid: Vec<f64>,
        lvy_grid: Vec<f64>,
        gaits: Vec<GaitParams>,
        standing: GaitParams,
    ) -> Result<Self> {
        check_grid("period", &periods, true)?;
        if periods.iter().any(|t| *t <= 0.0) {
            return Err(Error::InvalidArgument("periods must be positive".into()));
        }
        check_grid("vx", &vx_grid, false)?;
        check_grid("rvy", &rvy_grid, false)?;
        check_grid("lvy", &lvy_grid, false)?;
        let expected = periods.len() * vx_grid.len() * rvy_grid.len() * lvy_grid.len();
        if gaits.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} gaits, got {}",
                gaits.len()
            )));
        }
        let order = standing.order();
        let lib = GaitLibrary {
            order,
            periods,
            vx_grid,
            rvy_grid,
            lvy_grid,
            gaits,
            standing,
        };
        for j in 0..lib.periods.len() {
            for u in 0..lib.vx_grid.len() {
                for v in 0..lib.rvy_grid.len() {
                    for w in 0..lib.lvy_grid.len() {
                        let g = lib.gait(j, u, v, w);
                        let want = GaitLabel::new(lib.periods[j], lib.vx_grid[u], lib.rvy_grid[v], lib.lvy_grid[w]);
                        if g.label != want {
                            return Err(Error::InvalidArgument(format!(
                                "gait [{j},{u},{v},{w}] has label {} but grid says {want}",
                                g.label
                            )));
                        }
                        if g.order() != order {
                            return Err(Error::InvalidArgument(format!(
                                "gait [{j},{u},{v},{w}] has order {} (library order {order})",
                                g.order()
                            )));
                        }
                    }
                }
            }
        }
        if !lib.standing.label.period.is_standing() {
            return Err(Error::InvalidArgument(
                "standing gait must carry the standing period".into(),
            ));
        }
        Ok(lib)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn vx_grid(&self) -> &[f64] {
        &self.vx_grid
    }

    pub fn rvy_grid(&self) -> &[f64] {
        &self.rvy_grid
    }

    pub fn lvy_grid(&self) -> &[f64] {
        &self.lvy_grid
    }

    pub fn standing(&self) -> &GaitParams {
        &self.standing
    }

    pub fn len(&self) -> usize {
        self.gaits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaits.is_empty()
    }

    pub fn gaits(&self) -> &[GaitParams] {
        &self.gaits
    }

    fn flat_index(&self, j: usize, u: usize, v: usize, w: usize) -> usize {
        let n = self.rvy_grid.len();
        let m = self.lvy_grid.len();
        ((j * self.vx_grid.len() + u) * n + v) * m + w
    }

    pub fn gait(&self, j: usize, u: usize, v: usize, w: usize) -> &GaitParams {
        &self.gaits[self.flat_index(j, u, v, w)]
    }

    pub fn period(&self, j: usize) -> Result<f64> {
        self.periods.get(j).copied().ok_or(Error::PeriodIndex {
            index: j,
            len: self.periods.len(),
        })
    }

    fn corners(&self, j: usize, vx: f64, vy: f64, vys: f64, clamp: bool) -> Result<([(usize, f64); 8], bool)> {
        if self.gaits.is_empty() {
            return Err(Error::EmptyLibrary);
        }
        self.period(j)?;
        let (cx, s1) = locate(&self.vx_grid, vx, "vx", clamp)?;
        let (cy, s2) = locate(&self.rvy_grid, vy, "rvy", clamp)?;
        let (cz, s3) = locate(&self.lvy_grid, vys, "lvy", clamp)?;
        let (x1, x2, x3) = (cx.xi, cy.xi, cz.xi);
        let c = |u, v, w| self.flat_index(j, u, v, w);
        // Same eight terms as the trilinear expansion, same order.
        let corners = [
            (c(cx.lower, cy.lower, cz.lower), (1.0 - x1) * (1.0 - x2) * (1.0 - x3)),
            (c(cx.upper, cy.lower, cz.lower), x1 * (1.0 - x2) * (1.0 - x3)),
            (c(cx.lower, cy.upper, cz.lower), (1.0 - x1) * x2 * (1.0 - x3)),
            (c(cx.lower, cy.lower, cz.upper), (1.0 - x1) * (1.0 - x2) * x3),
            (c(cx.upper, cy.lower, cz.upper), x1 * (1.0 - x2) * x3),
            (c(cx.upper, cy.upper, cz.lower), x1 * x2 * (1.0 - x3)),
            (c(cx.lower, cy.upper, cz.upper), (1.0 - x1) * x2 * x3),
            (c(cx.upper, cy.upper, cz.upper), x1 * x2 * x3),
        ];
        Ok((corners, s1 || s2 || s3))
    }

    /// Blend weights of the trilinear query (exposed for property checks).
    pub fn blend_weights(&self, j: usize, vx: f64, vy: f64, vys: f64) -> Result<[f64; 8]> {
        let (corners, _) = self.corners(j, vx, vy, vys, false)?;
        Ok(corners.map(|(_, w)| w))
    }

    /// Trilinear interpolation of the period-`j` slice at `(vx, vy, vys)`,
    /// where `vy` is read on the right-lateral axis and `vys` on the left one.
    ///
    /// With `clamp`, out-of-grid coordinates are clamped to the boundary and
    /// the result is flagged saturated; otherwise they are an error.
    pub fn interpolate(&self, j: usize, vx: f64, vy: f64, vys: f64, clamp: bool) -> Result<Interpolated> {
        let (corners, saturated) = self.corners(j, vx, vy, vys, clamp)?;
        let mut alpha = vec![0.0; NUM_OUTPUTS * (self.order + 1)];
        for (idx, w) in corners {
            if w == 0.0 {
                continue;
            }
            for (a, c) in alpha.iter_mut().zip(self.gaits[idx].coefficients()) {
                *a += w * c;
            }
        }
        Ok(Interpolated {
            gait: GaitParams {
                label: GaitLabel::new(self.periods[j], vx, vy, vys),
                order: self.order,
                alpha,
            },
            saturated,
        })
    }

    /// Pre-impact swing-foot position of the interpolated gait, without
    /// materializing the full coefficient matrix.
    pub fn foot_target(&self, j: usize, vx: f64, vy: f64, vys: f64, clamp: bool) -> Result<([f64; 2], bool)> {
        let (corners, saturated) = self.corners(j, vx, vy, vys, clamp)?;
        let mut out = [0.0; 2];
        for (idx, w) in corners {
            if w == 0.0 {
                continue;
            }
            let t = self.gaits[idx].foot_target();
            out[0] += w * t[0];
            out[1] += w * t[1];
        }
        Ok((out, saturated))
    }

    /// Largest-period-first index of the period closest to `seconds`.
    pub fn period_index(&self, seconds: f64) -> Option<usize> {
        self.periods.iter().position(|t| (t - seconds).abs() < 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_gait(label: GaitLabel, seed: f64) -> GaitParams {
        let mut g = GaitParams::zeros(label, BEZIER_ORDER);
        for (i, c) in g.alpha.iter_mut().enumerate() {
            *c = ((i as f64 + 1.0) * seed).sin() + label.vx * 0.3 - label.vy_left * 0.7 + label.vy_right;
        }
        g
    }

    fn toy_library() -> GaitLibrary {
        let periods = vec![0.35, 0.2];
        let vx = vec![-0.2, 0.0, 0.3];
        let rvy = vec![0.1, 0.4];
        let lvy = vec![-0.4, -0.2, -0.1];
        let mut gaits = Vec::new();
        for (j, &t) in periods.iter().enumerate() {
            for &a in &vx {
                for &b in &rvy {
                    for &c in &lvy {
                        gaits.push(toy_gait(GaitLabel::new(t, a, b, c), 0.7 + j as f64));
                    }
                }
            }
        }
        let standing = GaitParams::zeros(GaitLabel::standing(), BEZIER_ORDER);
        GaitLibrary::new(periods, vx, rvy, lvy, gaits, standing).unwrap()
    }

    #[test]
    fn vertex_queries_are_exact() {
        let lib = toy_library();
        for j in 0..2 {
            for (u, &a) in lib.vx_grid().iter().enumerate() {
                for (v, &b) in lib.rvy_grid().iter().enumerate() {
                    for (w, &c) in lib.lvy_grid().iter().enumerate() {
                        let got = lib.interpolate(j, a, b, c, false).unwrap();
                        assert!(!got.saturated);
                        let want = lib.gait(j, u, v, w);
                        for (x, y) in got.gait.coefficients().iter().zip(want.coefficients()) {
                            assert!((x - y).abs() <= 1e-12);
                        }
                        assert_eq!(got.gait.label, want.label);
                    }
                }
            }
        }
    }

    #[test]
    fn cell_center_is_corner_mean() {
        let lib = toy_library();
        let got = lib.interpolate(1, 0.15, 0.25, -0.15, false).unwrap().gait;
        let mut mean = vec![0.0; got.coefficients().len()];
        for u in 1..3 {
            for v in 0..2 {
                for w in 1..3 {
                    for (m, c) in mean.iter_mut().zip(lib.gait(1, u, v, w).coefficients()) {
                        *m += c / 8.0;
                    }
                }
            }
        }
        for (a, b) in got.coefficients().iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn clamping_flags_saturation() {
        let lib = toy_library();
        assert!(matches!(
            lib.interpolate(0, 0.9, 0.2, -0.2, false),
            Err(Error::OutOfRange { axis: "vx", .. })
        ));
        let clamped = lib.interpolate(0, 0.9, 0.2, -0.2, true).unwrap();
        assert!(clamped.saturated);
        let edge = lib.interpolate(0, 0.3, 0.2, -0.2, false).unwrap();
        assert_eq!(clamped.gait.coefficients(), edge.gait.coefficients());
    }

    #[test]
    fn bad_period_index() {
        let lib = toy_library();
        assert!(matches!(
            lib.interpolate(2, 0.0, 0.2, -0.2, true),
            Err(Error::PeriodIndex { index: 2, len: 2 })
        ));
    }

    #[test]
    fn foot_target_matches_full_interpolation() {
        let lib = toy_library();
        let full = lib.interpolate(0, 0.05, 0.33, -0.27, false).unwrap().gait.foot_target();
        let (quick, _) = lib.foot_target(0, 0.05, 0.33, -0.27, false).unwrap();
        assert!((full[0] - quick[0]).abs() < 1e-15 && (full[1] - quick[1]).abs() < 1e-15);
    }

    #[test]
    fn mirror_flips_lateral_rows_only() {
        let g = toy_gait(GaitLabel::new(0.35, 0.1, 0.3, -0.2), 1.3);
        let m = g.mirror();
        assert_eq!(m.mirror(), g);
        assert_eq!(m.row(OutputIndex::SwingX), g.row(OutputIndex::SwingX));
        assert_eq!(m.row(OutputIndex::ComHeight), g.row(OutputIndex::ComHeight));
        assert_eq!(m.foot_target()[1], -g.foot_target()[1]);
        assert_eq!((m.label.vy_right, m.label.vy_left), (0.2, -0.3));
    }

    #[test]
    fn field_read_foot_target() {
        let mut g = GaitParams::zeros(GaitLabel::new(0.35, 0.3, 0.3, -0.3), BEZIER_ORDER);
        g.set_foot_target([0.0426, -0.085]);
        assert_eq!(g.foot_target(), [0.0426, -0.085]);
    }

    #[test]
    fn rejects_mislabeled_cells() {
        let lib = toy_library();
        let mut gaits = lib.gaits().to_vec();
        gaits[3].label.vx += 1e-9;
        let err = GaitLibrary::new(
            lib.periods().to_vec(),
            lib.vx_grid().to_vec(),
            lib.rvy_grid().to_vec(),
            lib.lvy_grid().to_vec(),
            gaits,
            lib.standing().clone(),
        );
        assert!(err.is_err());
    }
}
