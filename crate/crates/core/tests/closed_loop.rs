use std::path::PathBuf;
use std::sync::OnceLock;

use gaitsynth::builder::{build_library, BuilderConfig};
use gaitsynth::plant::{run_scenario, ExitStatus, Scenario};
use gaitsynth::predictor::DT;
use gaitsynth::GaitLibrary;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn library() -> &'static GaitLibrary {
    static LIB: OnceLock<GaitLibrary> = OnceLock::new();
    LIB.get_or_init(|| {
        let cfg = BuilderConfig::load(fixture("desk.cfg"), &[]).unwrap();
        build_library(&cfg).unwrap()
    })
}

fn scenario(text: &str) -> Scenario {
    Scenario::parse(text, "inline.scn", &[]).unwrap()
}

#[test]
fn standing_at_rest_stays_put() {
    let out = run_scenario(&scenario("duration 3\nstart standing\ninitial 0 0 0 0\n"), library()).unwrap();
    assert_eq!(out.status, ExitStatus::Completed);
    assert!(out.steps.is_empty());
    for r in &out.rows {
        assert!(
            r.p[0].abs() <= 1e-6 && r.p[1].abs() <= 1e-6,
            "drift at t={}: {:?}",
            r.t,
            r.p
        );
        assert!(r.stance.is_none());
    }
}

#[test]
fn one_row_per_tick() {
    let out = run_scenario(&scenario("duration 2\nstart standing\ninitial 0 0 0 0\n"), library()).unwrap();
    assert_eq!(out.rows.len(), (2.0 / DT).round() as usize);
    for w in out.rows.windows(2) {
        assert!((w[1].t - w[0].t - DT).abs() < 1e-9);
    }
}

#[test]
fn impacts_keep_velocity_and_relocate_the_com() {
    let sc = scenario("duration 4\nstart standing\ninitial 0 0 0 0\ncommand 0.5 0.3 0.3 -0.3 0 walk\n");
    let out = run_scenario(&sc, library()).unwrap();
    assert_eq!(out.status, ExitStatus::Completed);
    assert!(out.steps.len() >= 5);
    for (i, row) in out.rows.iter().enumerate() {
        if !row.is_impact() || i + 1 >= out.rows.len() {
            continue;
        }
        let next = &out.rows[i + 1];
        if next.stance.is_none() {
            continue;
        }
        // The first tick after an impact starts at -target with the same velocity.
        let p0 = [-row.foot[0], -row.foot[1]];
        let dv = [next.v[0] - row.v[0], next.v[1] - row.v[1]];
        assert!(
            dv[0].abs() < 0.05 && dv[1].abs() < 0.05,
            "velocity jump {dv:?} at t={}",
            row.t
        );
        let dp = [next.p[0] - p0[0], next.p[1] - p0[1]];
        assert!(
            dp[0].abs() < 2e-3 && dp[1].abs() < 2e-3,
            "position jump {dp:?} at t={}",
            row.t
        );
    }
}

#[test]
fn large_push_is_a_fall() {
    let out = run_scenario(
        &scenario("duration 3\nstart standing\ninitial 0 0 0 0\nimpulse 0.5 x 100\n"),
        library(),
    )
    .unwrap();
    assert_eq!(out.status, ExitStatus::Fall);
    assert_eq!(out.status.code(), 2);
    assert!(out.rows.last().unwrap().fall);
    assert!(out.rows.last().unwrap().t < 3.0);
}

#[test]
fn terrain_offsets_complete() {
    let sc = Scenario::load(fixture("impact_height_offsets.scn"), &[]).unwrap();
    let out = run_scenario(&sc, library()).unwrap();
    assert_eq!(out.status, ExitStatus::Completed, "{:?}", out.message);
    assert!(out.steps.len() > 20);
    assert!(out.rows.iter().all(|r| !r.fall));
}

#[test]
fn standing_transitions_stop_twice() {
    let sc = Scenario::load(fixture("standing_transitions.scn"), &[]).unwrap();
    let out = run_scenario(&sc, library()).unwrap();
    assert_eq!(out.status, ExitStatus::Completed);
    assert_eq!(out.stops.len(), 2, "stops {:?}", out.stops);
    assert!(out.stops[0] > 3.0 && out.stops[0] < 6.0);
    assert!(out.stops[1] > 8.5);
    assert!(out.rows.last().unwrap().stance.is_none());
}

#[test]
fn runs_are_deterministic() {
    let sc = Scenario::load(fixture("push_recovery.scn"), &[]).unwrap();
    let a = run_scenario(&sc, library()).unwrap();
    let b = run_scenario(&sc, library()).unwrap();
    assert_eq!(a.rows, b.rows);
}

#[test]
fn unknown_period_index_is_rejected() {
    let sc = scenario("duration 2\nstart standing\ninitial 0 0 0 0\ncommand 0.5 0.3 0.3 -0.3 5 walk\n");
    assert!(run_scenario(&sc, library()).is_err());
}
