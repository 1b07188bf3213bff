use modesheaf::complex::Simplex;
use modesheaf::environment::TrackEnvironment;
use modesheaf::modes::{comfort_zone_status, inc_domain_check, proj_domain_check, tran, ModeSystem, TransitionReason, Zone};
use modesheaf::scenario::{make_algorithm, Directive, Scenario, StepContext};
use modesheaf::state::State;

const L: f64 = 8.0;

fn fixture(name: &str) -> Scenario {
    Scenario::load(format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn with_epsilon(eps: f64) -> ModeSystem {
    let mut f = fixture("single_car.json").file;
    for v in f.system.thresholds.epsilon.values_mut() {
        *v = eps;
    }
    ModeSystem::from_file(&f.system).unwrap()
}

fn s(x: f64, v: f64) -> State {
    State::from_pairs([("x", x), ("v", v)])
}

fn m(key: &str) -> Simplex {
    Simplex::parse_key(key).unwrap()
}

// oracle: the Cu ramp, 0 before 3L/8 and 1 after 5L/8
fn phi_cu(x: f64) -> f64 {
    ((x - 3.0 * L / 8.0) / (2.0 * L / 8.0)).clamp(0.0, 1.0)
}

/// Runs one algorithm call for `mode` with the car placed at `x`.
fn drive(system: &ModeSystem, mode: &str, x: f64, state: State, start: bool) -> (Directive, State, TrackEnvironment) {
    let pkg = system.package(&m(mode)).unwrap();
    let mut env = TrackEnvironment::new(L, 1);
    env.place(0, x);
    let mut state = state;
    let mut algo = make_algorithm(&pkg.algorithm).unwrap();
    let mut cx = StepContext { system, package: pkg, state: &mut state, env: &mut env, car: 0 };
    let d = if start { algo.start(&mut cx) } else { algo.step(&mut cx) };
    (d, state, env)
}

#[test]
fn straight_starts_at_full_speed() {
    let sc = fixture("single_car.json");
    let (d, st, env) = drive(sc.system(), "Str", 0.0, State::new(), true);
    assert_eq!(d, Directive::Stay);
    assert_eq!(env.speed(0), 120.0);
    assert_eq!(st, s(0.0, 120.0));
    let (d, _, _) = drive(sc.system(), "Str", 0.0, s(0.0, 120.0), false);
    assert_eq!(d, Directive::Stay);
}

#[test]
fn straight_requests_the_joint_mode_past_two_fifths() {
    let sc = fixture("single_car.json");
    let x = 0.41 * L;
    assert!(1.0 - phi_cu(x) < 0.9);
    let (d, _, _) = drive(sc.system(), "Str", x, s(0.0, 120.0), false);
    let Directive::Transfer(o) = d else { panic!("expected a transfer, got {d:?}") };
    assert_eq!(o.new_mode, Some(m("Cu+Str")));
    assert_eq!(o.reason, TransitionReason::ToSuperset);
    // just below the threshold nothing happens
    let (d, _, _) = drive(sc.system(), "Str", 0.39 * L, s(0.0, 120.0), false);
    assert_eq!(d, Directive::Stay);
}

#[test]
fn refused_transfer_stops_the_car() {
    let sc = fixture("mutants/narrow_joint_space.json");
    let (d, _, env) = drive(sc.system(), "Str", 0.41 * L, s(0.0, 120.0), false);
    let Directive::Halt(o) = d else { panic!("expected a halt, got {d:?}") };
    assert_eq!(o.reason, TransitionReason::DomainViolation);
    assert_eq!(env.speed(0), 0.0);
}

#[test]
fn joint_mode_blends_the_speed() {
    let sc = fixture("single_car.json");
    for (x, v) in [(0.5 * L, 100.0), (0.6 * L, 84.0)] {
        let t = phi_cu(x);
        let (d, st, env) = drive(sc.system(), "Cu+Str", x, s(x, 120.0), false);
        assert_eq!(d, Directive::Stay);
        assert!((st.get("v").unwrap() - v).abs() < 1e-9, "x={x}");
        assert!((env.speed(0) - (80.0 * t + 120.0 * (1.0 - t))).abs() < 1e-12);
    }
    let (d, _, _) = drive(sc.system(), "Cu+Str", 5.0 * L / 8.0, s(5.0, 100.0), false);
    let Directive::Transfer(o) = d else { panic!("expected a transfer, got {d:?}") };
    assert_eq!(o.new_mode, Some(m("Cu")));
}

#[test]
fn curve_holds_eighty() {
    let sc = fixture("single_car.json");
    let (d, st, env) = drive(sc.system(), "Cu", 5.5, s(5.5, 84.0), true);
    assert_eq!(d, Directive::Stay);
    assert_eq!(env.speed(0), 80.0);
    assert_eq!(st.get("v"), Some(80.0));
    for x in [5.5, 7.0, L] {
        assert_eq!(drive(sc.system(), "Cu", x, s(x, 80.0), false).0, Directive::Stay);
    }
}

#[test]
fn domain_check_examples() {
    let sys = with_epsilon(0.1);
    let tt = sys.table();
    let (str_, cu, joint) = (m("Str"), m("Cu"), m("Cu+Str"));
    let p_str = sys.package(&str_).unwrap();
    let p_joint = sys.package(&joint).unwrap();
    let inc = |x: f64| inc_domain_check(tt, p_str, &joint, &s(x, 120.0)).unwrap();
    assert!(inc(0.45 * L));
    assert!(!inc(0.5 * L));
    assert!(!inc(0.2 * L));
    let proj = |x: f64| proj_domain_check(tt, p_joint, &str_, &s(x, 120.0)).unwrap();
    assert!(proj(0.3 * L));
    assert!(!proj((3.0 + 2.0 * 0.1) / 8.0 * L));
    assert!(proj_domain_check(tt, p_joint, &cu, &s(0.7 * L, 90.0)).unwrap());
    assert!(inc_domain_check(tt, p_str, &cu, &s(3.0, 120.0)).is_err());
}

#[test]
fn comfort_zones_of_the_straight() {
    let sc = fixture("single_car.json");
    let p = sc.system().package(&m("Str")).unwrap();
    // B_Str(Str) = 1 - φ_Cu; κ = 0.9, π = 0.6
    let zone = |x: f64| comfort_zone_status(p, &s(x, 120.0)).unwrap();
    assert_eq!(zone(1.0), Zone::Comfort);
    assert_eq!(zone(3.1), Zone::Comfort);
    assert_eq!(zone(3.6), Zone::GrowingCrisis);
    assert_eq!(zone(4.4), Zone::Panic);
    assert!(comfort_zone_status(p, &s(7.0, 120.0)).is_err());
}

#[test]
fn tran_cases() {
    let sc = fixture("single_car.json");
    let sys = sc.system();
    let st = s(2.5, 120.0);
    let joint = sys.package(&m("Cu+Str")).unwrap();
    let same = tran(sys, joint, &st, &m("Cu+Str"));
    assert!(same.is_ok());
    assert_eq!(same.reason, TransitionReason::Identity);
    let down = tran(sys, joint, &st, &m("Str"));
    assert_eq!(down.reason, TransitionReason::ToSubset);
    assert_eq!(down.new_state, Some(st.clone()));
    let str_ = sys.package(&m("Str")).unwrap();
    let across = tran(sys, str_, &st, &m("Cu"));
    assert!(!across.is_ok());
    assert_eq!(across.reason, TransitionReason::Unrelated);
    // outside the proj domain: B(Str) too large to drop it
    let refused = tran(sys, joint, &s(4.0, 100.0), &m("Cu"));
    assert_eq!(refused.reason, TransitionReason::DomainViolation);
    assert!(refused.new_mode.is_none());
}

#[test]
fn product_run_matches_two_single_runs() {
    let single = fixture("single_car.json").run(&Default::default()).unwrap();
    let sc = fixture("two_car_slots.json");
    let r = sc.run(&Default::default()).unwrap();
    assert_eq!(r.summary.exit_code(), 0);
    let trace = r.trace.unwrap();
    assert_eq!(trace.vertices().len(), 4);
    for c in &r.summary.cars {
        assert_eq!(c.modes, single.summary.cars[0].modes);
        assert_eq!(c.final_v, 80.0);
    }
    // the product weights are products of the marginals
    for row in trace.rows().iter().step_by(997) {
        let x1 = trace.coord(row, "x1").unwrap();
        let x2 = trace.coord(row, "x2").unwrap();
        let w = trace.weight(row, "(Cu,Str)").unwrap();
        assert!((w - phi_cu(x1) * (1.0 - phi_cu(x2))).abs() < 1e-12);
    }
}

#[test]
fn chicane_default_run_waits_and_resumes() {
    let sc = fixture("two_car_chicane.json");
    let r = sc.run(&Default::default()).unwrap();
    assert_eq!(r.summary.exit_code(), 0);
    let trace = r.trace.unwrap();
    let csv = trace.to_csv_string();
    assert!(csv.contains("Wait:1") && csv.contains("Wait:2"));
    assert!(csv.contains("Resume:1") && csv.contains("Resume:2"));
    let ep = &r.summary.wait_episodes;
    assert_eq!(ep.len(), 1);
    assert!(ep[0].car2_first());
    // the shorter timer: round(0.4 / 0.01) = 40 blocked steps, counting the one where both stopped
    assert_eq!(ep[0].resumed[1], Some(ep[0].start + 39));
}

#[test]
fn chicane_with_equal_timers_is_rejected() {
    let text = std::fs::read_to_string(format!("{}/../../scenarios/two_car_chicane.json", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let bad = text.replace("\"t2_s\": 0.4", "\"t2_s\": 1.0");
    assert_ne!(bad, text);
    assert!(Scenario::from_json(&bad).is_err());
}

#[test]
fn identical_runs_are_identical() {
    let sc = fixture("two_car_chicane.json");
    let a = sc.run(&Default::default()).unwrap().trace.unwrap().to_csv_string();
    let b = sc.run(&Default::default()).unwrap().trace.unwrap().to_csv_string();
    assert_eq!(a, b);
}

#[test]
fn trace_invariants_hold_for_every_fixture() {
    for name in ["single_car.json", "two_car_slots.json", "two_car_chicane.json"] {
        let trace = fixture(name).run(&Default::default()).unwrap().trace.unwrap();
        let rows = trace.rows();
        for (i, row) in rows.iter().enumerate() {
            let sum: f64 = row.weights.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-9, "{name} step {}: weights sum to {sum}", row.step);
            if i > 0 {
                assert!(row.step > rows[i - 1].step);
                if row.has(modesheaf::trace::EventKind::TransferOK) {
                    assert_ne!(row.active_mode, rows[i - 1].active_mode, "{name} step {}", row.step);
                }
            }
        }
    }
}

#[test]
fn joint_mode_speed_follows_the_blend() {
    let trace = fixture("single_car.json").run(&Default::default()).unwrap().trace.unwrap();
    let mut last = f64::INFINITY;
    for row in trace.rows().iter().filter(|r| r.active_mode == "Cu+Str") {
        let (x, v) = (trace.coord(row, "x").unwrap(), trace.coord(row, "v").unwrap());
        let t = phi_cu(x);
        assert!((v - (80.0 * t + 120.0 * (1.0 - t))).abs() < 1e-9);
        assert!(v <= last);
        last = v;
    }
    assert!(last.is_finite());
}
