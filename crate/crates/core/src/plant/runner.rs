use super::log::{LogRow, StepEvent};
use super::scenario::{Intent, Scenario, Start};
use super::{apply_impulse, step_continuous};
use crate::error::{Error, Result};
use crate::gait::{GaitLibrary, OutputIndex};
use crate::predictor::{capture_point, BezierHeight, CentroidalState, ConstantHeight, DT};
use crate::synthesizer::{
    phase_advance, standing_policy, synthesize, Mode, PhaseState, Stance, StandingDecision, SynthesizerConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Completed,
    Fall,
    PlantFailure,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Completed => 0,
            ExitStatus::Fall => 2,
            ExitStatus::PlantFailure => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: ExitStatus,
    pub rows: Vec<LogRow>,
    pub steps: Vec<StepEvent>,
    /// Times at which the plant switched from walking back to standing.
    pub stops: Vec<f64>,
    pub message: Option<String>,
}

fn stance_slot(s: Stance) -> usize {
    match s {
        Stance::Right => 0,
        Stance::Left => 1,
    }
}

/// World-frame plant state.
struct World {
    com: [f64; 2],
    z: f64,
    zdot: f64,
    v: [f64; 2],
    /// Right, left.
    feet: [[f64; 2]; 2],
}

impl World {
    fn relative_to(&self, origin: [f64; 2]) -> CentroidalState {
        CentroidalState::new(
            self.z,
            self.zdot,
            [self.com[0] - origin[0], self.com[1] - origin[1]],
            self.v,
        )
    }

    fn midpoint(&self) -> [f64; 2] {
        [
            0.5 * (self.feet[0][0] + self.feet[1][0]),
            0.5 * (self.feet[0][1] + self.feet[1][1]),
        ]
    }

    fn set_from(&mut self, origin: [f64; 2], s: &CentroidalState) {
        self.com = [origin[0] + s.p[0], origin[1] + s.p[1]];
        self.z = s.z;
        self.zdot = s.zdot;
        self.v = s.v;
    }
}

/// Closed-loop run at 1 kHz: commands and impulses, per-tick synthesis,
/// plant integration, impacts and standing transitions.
pub fn run_scenario(sc: &Scenario, lib: &GaitLibrary) -> Result<Outcome> {
    sc.validate()?;
    for c in &sc.commands {
        lib.period(c.desired.period_index)?;
    }
    let standing = lib.standing();
    let z0 = standing.row(OutputIndex::ComHeight)[0];
    let width = standing.foot_target()[1].abs();
    let gravity = sc.plant.gains.gravity;
    let mass = sc.plant.gains.mass;
    let mut cfg: SynthesizerConfig = sc.synth;
    cfg.gains = sc.plant.gains;
    lib.period(cfg.desired.period_index)?;
    let mut intent = sc.initial_intent;

    let [px, py, vx, vy] = sc.initial;
    let mut world = World {
        com: [0.0; 2],
        z: z0,
        zdot: 0.0,
        v: [vx, vy],
        feet: [[0.0, -width], [0.0, width]],
    };
    let mut mode;
    let mut phase = PhaseState::start(lib.periods()[cfg.desired.period_index], Stance::Right);
    match sc.start {
        Start::Standing => {
            mode = Mode::Standing;
            world.com = [px, py];
        }
        Start::Walking { stance, phase: s0 } => {
            mode = Mode::Walking;
            phase.stance = stance;
            phase.s0 = s0;
            let foot = world.feet[stance_slot(stance)];
            world.com = [foot[0] + px, foot[1] + py];
        }
    }

    let ticks = (sc.duration / DT).round() as usize;
    let mut rows = Vec::with_capacity(ticks);
    let mut steps = Vec::new();
    let mut stops = Vec::new();
    let mut next_command = 0;
    let mut next_impulse = 0;
    let mut next_terrain = 0;
    let mut pending_dz = 0.0;
    let mut step = 0usize;
    let mut impulses: Vec<_> = sc.impulses.clone();
    impulses.sort_by(|a, b| a.time.total_cmp(&b.time));
    let mut terrain: Vec<_> = sc.terrain.clone();
    terrain.sort_by(|a, b| a.time.total_cmp(&b.time));

    for k in 0..ticks {
        let t = k as f64 * DT;
        let due = t + 1e-9;
        while next_command < sc.commands.len() && sc.commands[next_command].time <= due {
            let c = sc.commands[next_command];
            cfg.desired = c.desired;
            intent = c.intent;
            next_command += 1;
        }
        while next_impulse < impulses.len() && impulses[next_impulse].time <= due {
            let ev = impulses[next_impulse];
            let s = apply_impulse(&world.relative_to([0.0; 2]), ev.axis, ev.impulse, mass);
            world.v = s.v;
            next_impulse += 1;
        }
        while next_terrain < terrain.len() && terrain[next_terrain].time <= due {
            pending_dz += terrain[next_terrain].dz;
            next_terrain += 1;
        }

        if mode == Mode::Standing {
            let center = world.midpoint();
            let rel = world.relative_to(center);
            let cp = capture_point(rel.p, rel.v, rel.z, gravity);
            // Bounding box of both foot support boxes.
            let hull = [
                cfg.support_halfwidth[0] + 0.5 * (world.feet[0][0] - world.feet[1][0]).abs(),
                cfg.support_halfwidth[1] + 0.5 * (world.feet[0][1] - world.feet[1][1]).abs(),
            ];
            let decision = standing_policy(Mode::Standing, cp, hull);
            if intent == Intent::Walk || decision == StandingDecision::StartStepping {
                let stance = if cp[1] >= 0.0 { Stance::Right } else { Stance::Left };
                mode = Mode::Walking;
                phase = PhaseState {
                    t0: 0.0,
                    s0: 0.5,
                    period: lib.periods()[cfg.desired.period_index],
                    step,
                    stance,
                };
            } else {
                // Capture-point regulation toward the midpoint through a ZMP
                // kept inside the support hull.
                let zmp_rel = [
                    ((1.0 + sc.k_cp) * cp[0]).clamp(-hull[0], hull[0]),
                    ((1.0 + sc.k_cp) * cp[1]).clamp(-hull[1], hull[1]),
                ];
                let zmp = [center[0] + zmp_rel[0], center[1] + zmp_rel[1]];
                let (next, forces) =
                    match step_continuous(&world.relative_to(zmp), &ConstantHeight(z0), t, DT, &sc.plant) {
                        Ok(x) => x,
                        Err(e) => return Ok(failure(rows, steps, stops, e)),
                    };
                world.set_from(zmp, &next);
                let rel = world.relative_to(center);
                rows.push(LogRow {
                    t: t + DT,
                    s: 0.0,
                    period: None,
                    step,
                    stance: None,
                    p: rel.p,
                    z: rel.z,
                    v: rel.v,
                    fz: forces.fz,
                    fp: forces.fp,
                    foot: standing.foot_target(),
                    saturated: false,
                    truncated: false,
                    fall: false,
                });
                continue;
            }
        }

        let foot = world.feet[stance_slot(phase.stance)];
        let rel = world.relative_to(foot);
        let res = synthesize(&rel, &phase, lib, &cfg)?;
        if res.fall {
            rows.push(LogRow {
                t: t + DT,
                s: phase.s0,
                period: Some(phase.period),
                step,
                stance: Some(phase.stance),
                p: rel.p,
                z: rel.z,
                v: rel.v,
                fz: 0.0,
                fp: [0.0; 2],
                foot: res.gait.foot_target(),
                saturated: res.saturated,
                truncated: res.truncated,
                fall: true,
            });
            return Ok(Outcome {
                status: ExitStatus::Fall,
                rows,
                steps,
                stops,
                message: Some(format!("no feasible period at t = {:.3} s", t)),
            });
        }
        let reference = BezierHeight::new(res.gait.row(OutputIndex::ComHeight), res.period, phase.t0, phase.s0)?;
        let (next, forces) = match step_continuous(&rel, &reference, phase.t0, DT, &sc.plant) {
            Ok(x) => x,
            Err(e) => return Ok(failure(rows, steps, stops, e)),
        };
        phase = phase_advance(phase, DT, Some(res.period));
        world.set_from(foot, &next);
        let target = res.gait.foot_target();
        rows.push(LogRow {
            t: t + DT,
            s: phase.s0,
            period: Some(phase.period),
            step,
            stance: Some(phase.stance),
            p: next.p,
            z: next.z,
            v: next.v,
            fz: forces.fz,
            fp: forces.fp,
            foot: target,
            saturated: res.saturated,
            truncated: res.truncated,
            fall: false,
        });

        if phase.s0 >= 1.0 {
            let event = StepEvent::from_row(rows.last().expect("row just pushed")).expect("impact row");
            steps.push(event);
            let swing = phase.stance.other();
            world.feet[stance_slot(swing)] = [world.com[0] + target[0], world.com[1] + target[1]];
            world.z -= pending_dz;
            pending_dz = 0.0;
            step += 1;
            phase = PhaseState {
                t0: 0.0,
                s0: 0.0,
                period: phase.period,
                step,
                stance: swing,
            };
            if intent == Intent::Stand {
                let post = world.relative_to(world.feet[stance_slot(swing)]);
                let cp = capture_point(post.p, post.v, post.z, gravity);
                if standing_policy(Mode::Walking, cp, cfg.support_halfwidth) == StandingDecision::MayStop {
                    mode = Mode::Standing;
                    stops.push(t + DT);
                }
            }
        }
    }
    Ok(Outcome {
        status: ExitStatus::Completed,
        rows,
        steps,
        stops,
        message: None,
    })
}

fn failure(rows: Vec<LogRow>, steps: Vec<StepEvent>, stops: Vec<f64>, e: Error) -> Outcome {
    Outcome {
        status: ExitStatus::PlantFailure,
        rows,
        steps,
        stops,
        message: Some(e.to_string()),
    }
}
