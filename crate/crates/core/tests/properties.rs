use std::sync::OnceLock;

use gaitsynth::bezier;
use gaitsynth::builder::{build_library, lateral_footstrike, periodic_lateral_footstrike, BuilderConfig};
use gaitsynth::gaitlib_io;
use gaitsynth::plant::{impact, parse_log, to_csv, LogRow};
use gaitsynth::predictor::capture_point;
use gaitsynth::synthesizer::{phase_advance, synthesize, FeasibleRegions};
use gaitsynth::{CentroidalState, GaitLibrary, OutputIndex, PhaseState, Stance, SynthesizerConfig};
use proptest::prelude::*;

fn library() -> &'static GaitLibrary {
    static LIB: OnceLock<GaitLibrary> = OnceLock::new();
    LIB.get_or_init(|| build_library(&BuilderConfig::default()).expect("default library"))
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 2..8)
}

fn stance() -> impl Strategy<Value = Stance> {
    prop_oneof![Just(Stance::Right), Just(Stance::Left)]
}

proptest! {
    #[test]
    fn bezier_meets_end_coefficients(c in coeffs()) {
        prop_assert!((bezier::eval(&c, 0.0).unwrap() - c[0]).abs() < 1e-12);
        prop_assert!((bezier::eval(&c, 1.0).unwrap() - c[c.len() - 1]).abs() < 1e-12);
    }

    #[test]
    fn bezier_stays_in_coefficient_hull(c in coeffs(), s in 0.0..=1.0f64) {
        let v = bezier::eval(&c, s).unwrap();
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn bezier_derivative_matches_difference(c in coeffs(), s in 0.05..0.95f64) {
        let h = 1e-6;
        let fd = (bezier::eval(&c, s + h).unwrap() - bezier::eval(&c, s - h).unwrap()) / (2.0 * h);
        prop_assert!((bezier::derivative(&c, s).unwrap() - fd).abs() < 1e-5);
    }

    #[test]
    fn blend_weights_form_a_partition(
        j in 0usize..2,
        vx in -0.5..0.7f64,
        r in 0.1..0.6f64,
        l in -0.6..-0.1f64,
    ) {
        let w = library().blend_weights(j, vx, r, l).unwrap();
        prop_assert!(w.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_exact_at_vertices(
        j in 0usize..2,
        u in 0usize..8,
        v in 0usize..3,
        w in 0usize..3,
    ) {
        let lib = library();
        let g = lib.gait(j, u, v, w);
        let i = lib.interpolate(j, lib.vx_grid()[u], lib.rvy_grid()[v], lib.lvy_grid()[w], false).unwrap();
        prop_assert!(!i.saturated);
        for (a, b) in i.gait.coefficients().iter().zip(g.coefficients()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn clamped_queries_are_flagged(vx in 0.71..3.0f64, r in 0.1..0.6f64) {
        let lib = library();
        let i = lib.interpolate(0, vx, r, -0.3, true).unwrap();
        prop_assert!(i.saturated);
        let edge = lib.interpolate(0, 0.7, r, -0.3, false).unwrap();
        prop_assert_eq!(i.gait.coefficients(), edge.gait.coefficients());
        prop_assert!(lib.interpolate(0, vx, r, -0.3, false).is_err());
    }

    #[test]
    fn mirror_is_an_involution(u in 0usize..8, v in 0usize..3, w in 0usize..3) {
        let g = library().gait(1, u, v, w);
        let m = g.mirror();
        prop_assert_eq!(m.label.vy_right, -g.label.vy_left);
        prop_assert_eq!(m.foot_target()[1], -g.foot_target()[1]);
        prop_assert_eq!(m.row(OutputIndex::ComHeight), g.row(OutputIndex::ComHeight));
        prop_assert_eq!(&m.mirror(), g);
    }

    #[test]
    fn symmetric_lateral_footstrike_agrees(period in 0.15..0.5f64, vy in 0.0..0.8f64) {
        let a = lateral_footstrike(period, vy, 0.0, 0.41, 9.81);
        let b = periodic_lateral_footstrike(period, vy, -vy, 0.41, 9.81);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn impact_keeps_velocity_and_negates_target(
        p in prop::array::uniform2(-0.3..0.3f64),
        v in prop::array::uniform2(-1.0..1.0f64),
        t in prop::array::uniform2(-0.3..0.3f64),
    ) {
        let s = CentroidalState::new(0.41, 0.01, p, v);
        let out = impact(&s, t);
        prop_assert_eq!(out.v, v);
        prop_assert_eq!(out.p, [-t[0], -t[1]]);
        prop_assert_eq!((out.z, out.zdot), (s.z, s.zdot));
    }

    #[test]
    fn capture_point_at_rest_is_position(p in prop::array::uniform2(-0.3..0.3f64)) {
        prop_assert_eq!(capture_point(p, [0.0, 0.0], 0.41, 9.81), p);
    }

    #[test]
    fn phase_is_monotone_and_continuous(
        switches in prop::collection::vec((0usize..400, prop_oneof![Just(0.35), Just(0.2)]), 0..4),
    ) {
        let mut phase = PhaseState::start(0.35, Stance::Right);
        for tick in 0..400 {
            let new = switches.iter().find(|(at, _)| *at == tick).map(|(_, t)| *t);
            let next = phase_advance(phase, 1e-3, new);
            if phase.s0 >= 1.0 {
                break;
            }
            let ds = next.s0 - phase.s0;
            prop_assert!(ds >= 0.0);
            prop_assert!(ds <= 1e-3 / 0.2 + 1e-12);
            phase = next;
        }
    }

    #[test]
    fn synthesis_is_safe_and_deterministic(
        px in -0.1..0.1f64,
        py in 0.0..0.12f64,
        vx in -0.6..0.8f64,
        vy in -0.6..0.6f64,
        s0 in 0.0..0.98f64,
        st in stance(),
        jd in 0usize..2,
    ) {
        let lib = library();
        let mut cfg = SynthesizerConfig::default();
        cfg.desired.period_index = jd;
        let sign = if st == Stance::Right { 1.0 } else { -1.0 };
        let state = CentroidalState::new(0.41, 0.0, [px, sign * py], [vx, vy]);
        let phase = PhaseState { t0: s0 * 0.35, s0, period: 0.35, step: 0, stance: st };
        let a = synthesize(&state, &phase, lib, &cfg).unwrap();
        let b = synthesize(&state, &phase, lib, &cfg).unwrap();
        prop_assert_eq!(&a.gait, &b.gait);
        prop_assert_eq!(a.period_index, b.period_index);
        prop_assert!(a.period_index >= jd);
        if !a.fall {
            let t = a.gait.foot_target();
            let right_frame = if st == Stance::Right { t } else { [t[0], -t[1]] };
            prop_assert!(FeasibleRegions::default().foot_contains(right_frame), "target {:?}", t);
        }
    }

    #[test]
    fn library_file_round_trip(
        vx in prop::collection::btree_set(-50i32..70, 1..4),
        apex in 0.02..0.1f64,
    ) {
        let cfg = BuilderConfig {
            vx_grid: vx.into_iter().map(|v| v as f64 / 100.0).collect(),
            rvy_grid: vec![0.2, 0.4],
            lvy_grid: vec![-0.3],
            swing_apex: apex,
            ..BuilderConfig::default()
        };
        let lib = build_library(&cfg).unwrap();
        let back = gaitlib_io::parse(&gaitlib_io::to_string(&lib), "mem").unwrap();
        prop_assert_eq!(back, lib);
    }

    #[test]
    fn log_csv_round_trip(
        t in 0.0..30.0f64,
        s in 0.0..=1.0f64,
        p in prop::array::uniform2(-0.3..0.3f64),
        v in prop::array::uniform2(-1.0..1.0f64),
        st in prop::option::of(stance()),
        flags in prop::array::uniform3(any::<bool>()),
    ) {
        let row = LogRow {
            t,
            s,
            period: st.map(|_| 0.35),
            step: 3,
            stance: st,
            p,
            z: 0.41,
            v,
            fz: 166.77,
            fp: [v[0] * 3.0, p[1] * 40.0],
            foot: [p[1], p[0]],
            saturated: flags[0],
            truncated: flags[1],
            fall: flags[2],
        };
        let back = parse_log(&to_csv(std::slice::from_ref(&row)), "mem").unwrap();
        prop_assert_eq!(back.len(), 1);
        let b = &back[0];
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-10 * (1.0 + y.abs());
        prop_assert!(close(b.t, t) && close(b.s, s) && close(b.p[0], p[0]) && close(b.v[1], v[1]));
        prop_assert_eq!(b.stance, st);
        prop_assert_eq!([b.saturated, b.truncated, b.fall], flags);
    }
}
