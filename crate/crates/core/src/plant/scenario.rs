//! `.scn` scenario files.
//!
//! ```text
//! duration 30
//! start standing            # or: start walking R 0.5
//! initial 0 0 0 0           # px py vx vy
//! command 1.0 0.3 0.3 -0.3 0 walk
//! impulse 4.0 x 5.0
//! terrain 6.0 0.02
//! ```

use std::path::{Path, PathBuf};

use super::{Axis, PlantParams};
use crate::error::{Error, Result};
use crate::keyval::KeyValues;
use crate::synthesizer::{Box2, Desired, FeasibleRegions, Stance, SynthesizerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    Walk,
    Stand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub time: f64,
    pub desired: Desired,
    pub intent: Intent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseEvent {
    pub time: f64,
    pub axis: Axis,
    /// N·s.
    pub impulse: f64,
}

/// Next impact lands on ground `dz` higher than the current stance foot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainEvent {
    pub time: f64,
    pub dz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    Standing,
    Walking { stance: Stance, phase: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub duration: f64,
    pub start: Start,
    /// `[px, py, vx, vy]` relative to the feet midpoint (standing) or the
    /// stance foot (walking).
    pub initial: [f64; 4],
    pub plant: PlantParams,
    /// Gains, regions and limits; `desired` is the state before any command.
    pub synth: SynthesizerConfig,
    /// Capture-point feedback gain of the standing balance law.
    pub k_cp: f64,
    pub initial_intent: Intent,
    pub commands: Vec<Command>,
    pub impulses: Vec<ImpulseEvent>,
    pub terrain: Vec<TerrainEvent>,
    pub log: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            duration: 10.0,
            start: Start::Standing,
            initial: [0.0; 4],
            plant: PlantParams::default(),
            synth: SynthesizerConfig::default(),
            k_cp: 1.0,
            initial_intent: Intent::Stand,
            commands: Vec::new(),
            impulses: Vec::new(),
            terrain: Vec::new(),
            log: None,
        }
    }
}

const KEYS: &[&str] = &[
    "duration",
    "start",
    "initial",
    "mass",
    "gravity",
    "mu",
    "kp",
    "kd",
    "fz_bias",
    "z_lag",
    "kx",
    "ky",
    "support",
    "s_com",
    "s_foot",
    "max_modification",
    "k_cp",
    "log",
];

const EVENTS: &[&str] = &["command", "impulse", "terrain"];

fn parse_stance(kv: &KeyValues, line: usize, tok: &str) -> Result<Stance> {
    match tok {
        "R" | "r" | "right" => Ok(Stance::Right),
        "L" | "l" | "left" => Ok(Stance::Left),
        _ => Err(kv.err(line, format!("unknown stance `{tok}`"))),
    }
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, overrides)
    }

    pub fn parse(text: &str, source: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let mut kv = KeyValues::parse(text, source, EVENTS)?;
        for o in overrides {
            kv.apply_override(o)?;
        }
        kv.reject_unknown(KEYS)?;
        let mut sc = Scenario::default();
        if let Some(v) = kv.float("duration")? {
            sc.duration = v;
        }
        if let Some(e) = kv.entry("start") {
            sc.start = match e.values.first().map(String::as_str) {
                Some("standing") if e.values.len() == 1 => Start::Standing,
                Some("walking") if e.values.len() == 3 => Start::Walking {
                    stance: parse_stance(&kv, e.line, &e.values[1])?,
                    phase: kv.parse_f64(e.line, &e.values[2])?,
                },
                _ => return Err(kv.err(e.line, "expected `start standing` or `start walking R|L <phase>`")),
            };
        }
        if let Some(v) = kv.floats("initial")? {
            let line = kv.entry("initial").map_or(0, |e| e.line);
            sc.initial = v.try_into().map_err(|_| kv.err(line, "`initial` takes px py vx vy"))?;
        }
        let g = &mut sc.plant.gains;
        for (key, slot) in [
            ("mass", &mut g.mass),
            ("gravity", &mut g.gravity),
            ("kp", &mut g.kp),
            ("kd", &mut g.kd),
        ] {
            if let Some(v) = kv.float(key)? {
                *slot = v;
            }
        }
        sc.synth.gains = sc.plant.gains;
        for (key, slot) in [
            ("mu", &mut sc.plant.mu),
            ("fz_bias", &mut sc.plant.fz_bias),
            ("z_lag", &mut sc.plant.z_lag),
            ("kx", &mut sc.synth.kx),
            ("ky", &mut sc.synth.ky),
            ("max_modification", &mut sc.synth.max_modification),
            ("k_cp", &mut sc.k_cp),
        ] {
            if let Some(v) = kv.float(key)? {
                *slot = v;
            }
        }
        if let Some(v) = kv.pair("support")? {
            sc.synth.support_halfwidth = v;
        }
        if let Some(v) = kv.pair("s_com")? {
            sc.synth.regions.com = Box2::symmetric(v);
        }
        if let Some(v) = kv.floats("s_foot")? {
            let line = kv.entry("s_foot").map_or(0, |e| e.line);
            let [x0, x1, y0, y1]: [f64; 4] = v
                .try_into()
                .map_err(|_| kv.err(line, "`s_foot` takes xmin xmax ymin ymax"))?;
            sc.synth.regions = FeasibleRegions {
                foot_x: [x0, x1],
                foot_y: [y0, y1],
                ..sc.synth.regions
            };
        }
        if let Some(v) = kv.text("log")? {
            sc.log = Some(PathBuf::from(v));
        }

        for e in kv.repeated("command") {
            let [t, vx, r, l, j, mode] = e.values.as_slice() else {
                return Err(kv.err(e.line, "expected `command t vx vy_R vy_L period_index walk|stand`"));
            };
            let period_index = j
                .parse::<usize>()
                .map_err(|_| kv.err(e.line, format!("invalid period index `{j}`")))?;
            let intent = match mode.as_str() {
                "walk" => Intent::Walk,
                "stand" => Intent::Stand,
                _ => return Err(kv.err(e.line, format!("unknown mode `{mode}`"))),
            };
            sc.commands.push(Command {
                time: kv.parse_f64(e.line, t)?,
                desired: Desired::new(
                    kv.parse_f64(e.line, vx)?,
                    kv.parse_f64(e.line, r)?,
                    kv.parse_f64(e.line, l)?,
                    period_index,
                ),
                intent,
            });
        }
        for e in kv.repeated("impulse") {
            let [t, axis, value] = e.values.as_slice() else {
                return Err(kv.err(e.line, "expected `impulse t x|y value`"));
            };
            let axis = match axis.as_str() {
                "x" => Axis::Sagittal,
                "y" => Axis::Lateral,
                _ => return Err(kv.err(e.line, format!("unknown axis `{axis}`"))),
            };
            sc.impulses.push(ImpulseEvent {
                time: kv.parse_f64(e.line, t)?,
                axis,
                impulse: kv.parse_f64(e.line, value)?,
            });
        }
        for e in kv.repeated("terrain") {
            let [t, dz] = e.values.as_slice() else {
                return Err(kv.err(e.line, "expected `terrain t dz`"));
            };
            sc.terrain.push(TerrainEvent {
                time: kv.parse_f64(e.line, t)?,
                dz: kv.parse_f64(e.line, dz)?,
            });
        }
        let sorted = sc.commands.windows(2).all(|w| w[0].time <= w[1].time);
        if !sorted {
            let line = kv.repeated("command").last().map_or(0, |e| e.line);
            return Err(kv.err(line, "command timeline not sorted by time"));
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::InvalidArgument("duration must be positive".into()));
        }
        self.plant.validate()?;
        self.synth.validate()?;
        if let Start::Walking { phase, .. } = self.start {
            if !(0.0..1.0).contains(&phase) {
                return Err(Error::InvalidArgument(format!("start phase {phase} outside [0, 1)")));
            }
        }
        if !self.commands.windows(2).all(|w| w[0].time <= w[1].time) {
            return Err(Error::InvalidArgument("command timeline not sorted by time".into()));
        }
        for ev in &self.impulses {
            if !(0.0..=self.duration).contains(&ev.time) {
                return Err(Error::InvalidArgument(format!(
                    "impulse at {} s outside the {} s horizon",
                    ev.time, self.duration
                )));
            }
        }
        Ok(())
    }
}
