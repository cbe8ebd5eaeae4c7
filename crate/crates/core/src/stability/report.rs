use std::fmt::Write as _;
use std::path::Path;

use super::{
    derive_constants, estimate_delta, estimate_epsilon, estimate_lipschitz, library_margin, uub_bound,
    worst_contraction, PeriodDelta,
};
use crate::error::{Error, Result};
use crate::gait::GaitLibrary;
use crate::gaitlib_io::fmt17;
use crate::keyval::KeyValues;
use crate::plant::PlantParams;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub kx: f64,
    pub ky: f64,
    pub seed: u64,
    pub eps_samples: usize,
    pub delta_samples: usize,
    pub probe: f64,
    pub lipschitz_pairs: usize,
    /// Desired sagittal velocity used for the library margin `c`.
    pub vx_d: f64,
    /// Ultimate bound used for the settling step count.
    pub b: f64,
    pub library: Option<String>,
    pub plant: PlantParams,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            kx: 0.08,
            ky: 0.095,
            seed: 0,
            eps_samples: 512,
            delta_samples: 512,
            probe: 1e-3,
            lipschitz_pairs: 2000,
            vx_d: 0.0,
            b: 0.05,
            library: None,
            plant: PlantParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub library: Option<String>,
    pub seed: u64,
    pub eps_samples: usize,
    pub eps_excluded: usize,
    pub delta_samples: usize,
    pub probe: f64,
    pub lipschitz_pairs: usize,
    /// Plant mass, kg.
    pub mass: f64,
    /// Largest sagittal grid spacing, m/s.
    pub grid_spacing: f64,
    pub eps_x: f64,
    pub eps_y: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    pub delta_periods: Vec<PeriodDelta>,
    pub lipschitz: f64,
    pub kx: f64,
    pub ky: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    /// `max |1 + δ k|` over the whole sampled sensitivity range.
    pub k1_worst: f64,
    pub k2_worst: f64,
    pub gate: bool,
    pub interval_x: (f64, f64),
    pub interval_y: (f64, f64),
    pub c: f64,
    pub uub_b: f64,
    pub uub_n_x: Option<usize>,
    pub uub_n_y: Option<usize>,
}

pub fn analyze(lib: &GaitLibrary, cfg: &AnalysisConfig) -> Result<StabilityReport> {
    let eps = estimate_epsilon(lib, cfg.eps_samples, cfg.seed, &cfg.plant)?;
    let delta = estimate_delta(lib, cfg.probe, cfg.delta_samples, cfg.seed.wrapping_add(1), &cfg.plant)?;
    let lipschitz = estimate_lipschitz(lib, cfg.lipschitz_pairs, cfg.seed.wrapping_add(2))?;
    let c = derive_constants(delta.delta_x, delta.delta_y, lipschitz, cfg.kx, cfg.ky);
    let k1_worst = delta
        .per_period
        .iter()
        .map(|d| worst_contraction(d.min_x, d.max_x, cfg.kx))
        .fold(0.0, f64::max);
    let k2_worst = delta
        .per_period
        .iter()
        .map(|d| worst_contraction(d.min_y, d.max_y, cfg.ky))
        .fold(0.0, f64::max);
    let margin = library_margin(lib, cfg.vx_d);
    let settle = |eps: f64, k: f64| {
        if c.gate() && margin > 0.0 {
            uub_bound(eps, k, margin, cfg.b).ok()
        } else {
            None
        }
    };
    let grid_spacing = lib.vx_grid().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(StabilityReport {
        library: cfg.library.clone(),
        seed: cfg.seed,
        eps_samples: eps.samples,
        eps_excluded: eps.excluded,
        delta_samples: delta.samples,
        probe: cfg.probe,
        lipschitz_pairs: cfg.lipschitz_pairs,
        mass: cfg.plant.gains.mass,
        grid_spacing,
        eps_x: eps.eps_x,
        eps_y: eps.eps_y,
        delta_x: delta.delta_x,
        delta_y: delta.delta_y,
        delta_periods: delta.per_period,
        lipschitz,
        kx: cfg.kx,
        ky: cfg.ky,
        k1: c.k1,
        k2: c.k2,
        k3: c.k3,
        k4: c.k4,
        k1_worst,
        k2_worst,
        gate: c.gate(),
        interval_x: c.interval_x,
        interval_y: c.interval_y,
        c: margin,
        uub_b: cfg.b,
        uub_n_x: settle(eps.eps_x, c.k1),
        uub_n_y: settle(eps.eps_y, c.k2),
    })
}

const KEYS: &[&str] = &[
    "library",
    "seed",
    "eps_samples",
    "eps_excluded",
    "delta_samples",
    "delta_probe",
    "lipschitz_pairs",
    "mass",
    "grid_spacing",
    "eps_x",
    "eps_y",
    "delta_x",
    "delta_y",
    "lipschitz",
    "kx",
    "ky",
    "k1",
    "k2",
    "k3",
    "k4",
    "k1_worst",
    "k2_worst",
    "gate",
    "admissible_kx",
    "admissible_ky",
    "c",
    "uub_b",
    "uub_n_x",
    "uub_n_y",
];

fn opt_count(n: Option<usize>) -> String {
    n.map_or_else(|| "none".to_string(), |n| n.to_string())
}

impl StabilityReport {
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        o.push_str("# step-to-step stability report\n");
        o.push_str("# delta is the finite-difference ratio measured on the plant, per sampled gait\n");
        if let Some(l) = &self.library {
            let _ = writeln!(o, "library {l}");
        }
        let _ = writeln!(o, "seed {}", self.seed);
        let _ = writeln!(o, "eps_samples {}", self.eps_samples);
        let _ = writeln!(o, "eps_excluded {}", self.eps_excluded);
        let _ = writeln!(o, "delta_samples {}", self.delta_samples);
        let _ = writeln!(o, "delta_probe {}", fmt17(self.probe));
        let _ = writeln!(o, "lipschitz_pairs {}", self.lipschitz_pairs);
        let _ = writeln!(o, "mass {}", fmt17(self.mass));
        let _ = writeln!(o, "grid_spacing {}", fmt17(self.grid_spacing));
        for (k, v) in [
            ("eps_x", self.eps_x),
            ("eps_y", self.eps_y),
            ("delta_x", self.delta_x),
            ("delta_y", self.delta_y),
        ] {
            let _ = writeln!(o, "{k} {}", fmt17(v));
        }
        for d in &self.delta_periods {
            let _ = writeln!(
                o,
                "delta_period {} {} {} {} {}",
                fmt17(d.period),
                fmt17(d.min_x),
                fmt17(d.max_x),
                fmt17(d.min_y),
                fmt17(d.max_y)
            );
        }
        for (k, v) in [
            ("lipschitz", self.lipschitz),
            ("kx", self.kx),
            ("ky", self.ky),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("k1_worst", self.k1_worst),
            ("k2_worst", self.k2_worst),
        ] {
            let _ = writeln!(o, "{k} {}", fmt17(v));
        }
        let _ = writeln!(o, "gate {}", if self.gate { "pass" } else { "fail" });
        let _ = writeln!(
            o,
            "admissible_kx {} {}",
            fmt17(self.interval_x.0),
            fmt17(self.interval_x.1)
        );
        let _ = writeln!(
            o,
            "admissible_ky {} {}",
            fmt17(self.interval_y.0),
            fmt17(self.interval_y.1)
        );
        let _ = writeln!(o, "c {}", fmt17(self.c));
        let _ = writeln!(o, "uub_b {}", fmt17(self.uub_b));
        let _ = writeln!(o, "uub_n_x {}", opt_count(self.uub_n_x));
        let _ = writeln!(o, "uub_n_y {}", opt_count(self.uub_n_y));
        o
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, source: impl AsRef<Path>) -> Result<Self> {
        let kv = KeyValues::parse(text, source, &["delta_period"])?;
        kv.reject_unknown(KEYS)?;
        let need = |k: &str| -> Result<f64> { kv.float(k)?.ok_or_else(|| kv.err(0, format!("missing `{k}`"))) };
        let count = |k: &str| -> Result<usize> {
            let v = need(k)?;
            if v < 0.0 || v.fract() != 0.0 {
                let line = kv.entry(k).map_or(0, |e| e.line);
                return Err(kv.err(line, format!("`{k}` must be a count")));
            }
            Ok(v as usize)
        };
        let opt = |k: &str| -> Result<Option<usize>> {
            match kv.text(k)? {
                None | Some("none") => Ok(None),
                Some(t) => t.parse().map(Some).map_err(|_| {
                    let line = kv.entry(k).map_or(0, |e| e.line);
                    kv.err(line, format!("invalid `{k}` value `{t}`"))
                }),
            }
        };
        let interval = |k: &str| -> Result<(f64, f64)> {
            let [a, b] = kv.pair(k)?.ok_or_else(|| kv.err(0, format!("missing `{k}`")))?;
            Ok((a, b))
        };
        let mut delta_periods = Vec::new();
        for e in kv.repeated("delta_period") {
            let v = e
                .values
                .iter()
                .map(|t| kv.parse_f64(e.line, t))
                .collect::<Result<Vec<_>>>()?;
            let [period, min_x, max_x, min_y, max_y] = v[..] else {
                return Err(kv.err(e.line, "`delta_period` takes 5 values"));
            };
            delta_periods.push(PeriodDelta {
                period,
                min_x,
                max_x,
                min_y,
                max_y,
            });
        }
        let gate = match kv.text("gate")? {
            Some("pass") => true,
            Some("fail") => false,
            _ => return Err(kv.err(kv.entry("gate").map_or(0, |e| e.line), "`gate` must be pass or fail")),
        };
        Ok(StabilityReport {
            library: kv.text("library")?.map(str::to_string),
            seed: count("seed")? as u64,
            eps_samples: count("eps_samples")?,
            eps_excluded: count("eps_excluded")?,
            delta_samples: count("delta_samples")?,
            probe: need("delta_probe")?,
            lipschitz_pairs: count("lipschitz_pairs")?,
            mass: need("mass")?,
            grid_spacing: need("grid_spacing")?,
            eps_x: need("eps_x")?,
            eps_y: need("eps_y")?,
            delta_x: need("delta_x")?,
            delta_y: need("delta_y")?,
            delta_periods,
            lipschitz: need("lipschitz")?,
            kx: need("kx")?,
            ky: need("ky")?,
            k1: need("k1")?,
            k2: need("k2")?,
            k3: need("k3")?,
            k4: need("k4")?,
            k1_worst: need("k1_worst")?,
            k2_worst: need("k2_worst")?,
            gate,
            interval_x: interval("admissible_kx")?,
            interval_y: interval("admissible_ky")?,
            c: need("c")?,
            uub_b: need("uub_b")?,
            uub_n_x: opt("uub_n_x")?,
            uub_n_y: opt("uub_n_y")?,
        })
    }
}
