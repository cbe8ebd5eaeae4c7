//! Empirical estimates of the step-to-step stability constants: periodicity
//! error `ε`, footstrike sensitivity `δ`, foot-target Lipschitz constant `K`,
//! and the contraction/UUB quantities derived from them.

mod report;
mod verify;

pub use report::{analyze, AnalysisConfig, StabilityReport};
pub use verify::{desired_post_impact, uub_check, verify_log, StepCheck, UubCheck, VerifyReport, VerifySlack};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gait::{GaitLibrary, GaitParams, OutputIndex};
use crate::plant::{simulate_step, PlantParams};
use crate::predictor::CentroidalState;

const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    out
}

/// Halton sequence with a seeded Cranley-Patterson rotation.
#[derive(Debug, Clone)]
pub struct Halton {
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dims: usize, seed: u64) -> Self {
        assert!(dims <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Halton {
            shift: (0..dims).map(|_| rng.random::<f64>()).collect(),
        }
    }

    /// Point `i` in the unit cube.
    pub fn point(&self, i: u64) -> Vec<f64> {
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(s, p)| (radical_inverse(i + 1, p) + s).fract())
            .collect()
    }
}

fn lerp(range: [f64; 2], u: f64) -> f64 {
    range[0] + u * (range[1] - range[0])
}

fn hull(grid: &[f64]) -> [f64; 2] {
    [grid[0], grid[grid.len() - 1]]
}

/// Velocity-space point `[vx, Rvy, Lvy]` of the library hull.
pub fn hull_point(lib: &GaitLibrary, u: &[f64]) -> [f64; 3] {
    [
        lerp(hull(lib.vx_grid()), u[0]),
        lerp(hull(lib.rvy_grid()), u[1]),
        lerp(hull(lib.lvy_grid()), u[2]),
    ]
}

/// One step of the gait's successor on the matched plant: the post-impact
/// state is `p⁺ = -foot_target(gait)`, `v⁺ = v⁻`. Returns the next
/// pre-impact horizontal velocity.
pub fn poincare_map(gait: &GaitParams, v_minus: [f64; 2], plant: &PlantParams) -> Result<[f64; 2]> {
    if gait.label.period.is_standing() {
        return Err(Error::NoTimeScale);
    }
    let z = gait.row(OutputIndex::ComHeight)[0];
    let t = gait.foot_target();
    let start = CentroidalState::new(z, 0.0, [-t[0], -t[1]], v_minus);
    let end = simulate_step(&start, gait, plant)?;
    Ok(end.v)
}

/// Periodicity error of the gait at query `q = [vx, Rvy, Lvy]`.
pub fn periodicity_error(lib: &GaitLibrary, j: usize, q: [f64; 3], plant: &PlantParams) -> Result<[f64; 2]> {
    let g = lib.interpolate(j, q[0], q[1], q[2], false)?.gait;
    let p = poincare_map(&g, [q[0], q[1]], plant)?;
    Ok([(p[0] - q[0]).abs(), (p[1] - q[2]).abs()])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonEstimate {
    pub eps_x: f64,
    pub eps_y: f64,
    pub samples: usize,
    /// Samples whose map was undefined.
    pub excluded: usize,
}

fn fold_eps(results: Vec<Result<[f64; 2]>>) -> EpsilonEstimate {
    let mut est = EpsilonEstimate {
        eps_x: 0.0,
        eps_y: 0.0,
        samples: results.len(),
        excluded: 0,
    };
    for r in results {
        match r {
            Ok([ex, ey]) => {
                est.eps_x = est.eps_x.max(ex);
                est.eps_y = est.eps_y.max(ey);
            }
            Err(_) => est.excluded += 1,
        }
    }
    est
}

/// Maximum periodicity error over `samples` quasi-random hull points, spread
/// evenly over the periods.
pub fn estimate_epsilon(lib: &GaitLibrary, samples: usize, seed: u64, plant: &PlantParams) -> Result<EpsilonEstimate> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    if lib.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    let seq = Halton::new(3, seed);
    let k = lib.periods().len();
    let results = (0..samples)
        .into_par_iter()
        .map(|i| periodicity_error(lib, i % k, hull_point(lib, &seq.point(i as u64)), plant))
        .collect();
    Ok(fold_eps(results))
}

/// Periodicity error at every grid vertex.
pub fn epsilon_at_vertices(lib: &GaitLibrary, plant: &PlantParams) -> EpsilonEstimate {
    let mut queries = Vec::new();
    for j in 0..lib.periods().len() {
        for &a in lib.vx_grid() {
            for &b in lib.rvy_grid() {
                for &c in lib.lvy_grid() {
                    queries.push((j, [a, b, c]));
                }
            }
        }
    }
    let results = queries
        .par_iter()
        .map(|(j, q)| periodicity_error(lib, *j, *q, plant))
        .collect();
    fold_eps(results)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodDelta {
    pub period: f64,
    pub min_x: f64,
    pub max_x: f64,
    pub min_y: f64,
    pub max_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEstimate {
    /// Most negative ratio per axis.
    pub delta_x: f64,
    pub delta_y: f64,
    pub per_period: Vec<PeriodDelta>,
    pub samples: usize,
    pub probe: f64,
}

/// Central-difference sensitivities `(∂P^x/∂x_foot, ∂P^y/∂y_foot)` of one gait.
pub fn footstrike_sensitivity(
    gait: &GaitParams,
    v_minus: [f64; 2],
    probe: f64,
    plant: &PlantParams,
) -> Result<[f64; 2]> {
    let base = gait.foot_target();
    let mut out = [0.0; 2];
    for (axis, slot) in out.iter_mut().enumerate() {
        let mut hi = gait.clone();
        let mut lo = gait.clone();
        let mut t = base;
        t[axis] = base[axis] + probe;
        hi.set_foot_target(t);
        t[axis] = base[axis] - probe;
        lo.set_foot_target(t);
        let ph = poincare_map(&hi, v_minus, plant)?;
        let pl = poincare_map(&lo, v_minus, plant)?;
        *slot = (ph[axis] - pl[axis]) / (2.0 * probe);
    }
    Ok(out)
}

/// Footstrike sensitivity bounds over sampled gaits. Fails if any ratio is
/// not strictly negative.
pub fn estimate_delta(
    lib: &GaitLibrary,
    probe: f64,
    samples: usize,
    seed: u64,
    plant: &PlantParams,
) -> Result<DeltaEstimate> {
    if !(1e-4..=1e-2).contains(&probe) {
        return Err(Error::InvalidArgument(format!("probe {probe} outside [1e-4, 1e-2] m")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if lib.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    let seq = Halton::new(3, seed);
    let k = lib.periods().len();
    let ratios = (0..samples)
        .into_par_iter()
        .map(|i| {
            let j = i % k;
            let q = hull_point(lib, &seq.point(i as u64));
            let g = lib.interpolate(j, q[0], q[1], q[2], false)?.gait;
            footstrike_sensitivity(&g, [q[0], q[1]], probe, plant).map(|r| (j, q, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_period: Vec<PeriodDelta> = lib
        .periods()
        .iter()
        .map(|&period| PeriodDelta {
            period,
            min_x: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            min_y: f64::INFINITY,
            max_y: f64::NEG_INFINITY,
        })
        .collect();
    for (j, q, [rx, ry]) in &ratios {
        if !(*rx < 0.0 && *ry < 0.0) {
            return Err(Error::PropertyViolation(format!(
                "non-negative footstrike sensitivity ({rx}, {ry}) at T={} v=({}, {}, {})",
                lib.periods()[*j],
                q[0],
                q[1],
                q[2]
            )));
        }
        let d = &mut per_period[*j];
        d.min_x = d.min_x.min(*rx);
        d.max_x = d.max_x.max(*rx);
        d.min_y = d.min_y.min(*ry);
        d.max_y = d.max_y.max(*ry);
    }
    per_period.retain(|d| d.min_x.is_finite());
    Ok(DeltaEstimate {
        delta_x: per_period.iter().map(|d| d.min_x).fold(f64::INFINITY, f64::min),
        delta_y: per_period.iter().map(|d| d.min_y).fold(f64::INFINITY, f64::min),
        per_period,
        samples,
        probe,
    })
}

/// Largest sampled `‖g_foot(V_a) - g_foot(V_b)‖ / ‖V_a - V_b‖` over all periods.
pub fn estimate_lipschitz(lib: &GaitLibrary, pairs: usize, seed: u64) -> Result<f64> {
    if pairs < 1000 {
        return Err(Error::InvalidArgument(format!("need at least 1000 pairs, got {pairs}")));
    }
    if lib.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    let seq = Halton::new(6, seed);
    let k = lib.periods().len();
    let mut best = 0.0f64;
    for j in 0..k {
        let worst = (0..pairs)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let u = seq.point(i as u64);
                let a = hull_point(lib, &u[..3]);
                let b = hull_point(lib, &u[3..]);
                let dv = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                if dv == 0.0 {
                    return Ok(0.0);
                }
                let (ga, _) = lib.foot_target(j, a[0], a[1], a[2], false)?;
                let (gb, _) = lib.foot_target(j, b[0], b[1], b[2], false)?;
                Ok(((ga[0] - gb[0]).powi(2) + (ga[1] - gb[1]).powi(2)).sqrt() / dv)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        best = best.max(worst);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub gate_x: bool,
    pub gate_y: bool,
    pub interval_x: (f64, f64),
    pub interval_y: (f64, f64),
}

impl Constants {
    pub fn gate(&self) -> bool {
        self.gate_x && self.gate_y
    }
}

pub fn derive_constants(delta_x: f64, delta_y: f64, lipschitz: f64, kx: f64, ky: f64) -> Constants {
    use crate::synthesizer::{gain_admissible, gain_interval};
    Constants {
        k1: (1.0 + delta_x * kx).abs(),
        k2: (1.0 + delta_y * ky).abs(),
        k3: 2f64.sqrt() * lipschitz + kx,
        k4: 2f64.sqrt() * lipschitz + ky,
        gate_x: gain_admissible(kx, delta_x),
        gate_y: gain_admissible(ky, delta_y),
        interval_x: gain_interval(delta_x),
        interval_y: gain_interval(delta_y),
    }
}

/// Largest `|1 + δ k|` over a sensitivity range `[δ_min, δ_max]`.
pub fn worst_contraction(delta_min: f64, delta_max: f64, k: f64) -> f64 {
    (1.0 + delta_min * k).abs().max((1.0 + delta_max * k).abs())
}

/// Smallest `N ≥ 0` with `k^N a + ε/(1-k) ≤ b`.
pub fn uub_bound(eps: f64, k: f64, a: f64, b: f64) -> Result<usize> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::InvalidArgument(format!("contraction {k} outside (0, 1)")));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("initial error {a} must be positive")));
    }
    let floor = eps / (1.0 - k);
    if !(b > floor) {
        return Err(Error::InvalidBound { b, floor });
    }
    let n = ((b - floor) / a).ln() / k.ln();
    // Guard against ceil(7.000000000001) style round-off.
    Ok((n - 1e-12).ceil().max(0.0) as usize)
}

/// Distance from `vx_d` to the nearer end of the sagittal grid.
pub fn library_margin(lib: &GaitLibrary, vx_d: f64) -> f64 {
    let [lo, hi] = hull(lib.vx_grid());
    (vx_d - lo).abs().min((hi - vx_d).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uub_examples() {
        assert_eq!(uub_bound(0.02, 0.8, 0.5, 0.2).unwrap(), 8);
        assert_eq!(uub_bound(0.0, 0.5, 0.3, 0.3).unwrap(), 0);
        assert!(matches!(
            uub_bound(0.02, 0.8, 0.5, 0.1),
            Err(Error::InvalidBound { .. })
        ));
    }

    #[test]
    fn constants_arithmetic() {
        let c = derive_constants(-10.0, -10.0, 0.5, 0.08, 0.0);
        assert!((c.k1 - 0.2).abs() < 1e-12);
        assert!(c.gate_x);
        assert!(!c.gate_y);
        assert!(!derive_constants(-10.0, -10.0, 0.5, 0.2, 0.1).gate_x);
        assert!((c.k3 - (2f64.sqrt() * 0.5 + 0.08)).abs() < 1e-15);
    }

    #[test]
    fn halton_is_deterministic_and_in_cube() {
        let a = Halton::new(3, 7);
        let b = Halton::new(3, 7);
        for i in 0..50 {
            let p = a.point(i);
            assert_eq!(p, b.point(i));
            assert!(p.iter().all(|x| (0.0..1.0).contains(x)));
        }
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn worst_contraction_spans_range() {
        assert!((worst_contraction(-13.1, -5.6, 0.08) - 0.552).abs() < 1e-9);
    }
}
