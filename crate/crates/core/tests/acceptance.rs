//! Acceptance suite: every release criterion at its stated tolerance, one
//! pass/fail line per criterion (visible with `--nocapture`).
//!
//! 1. Sensor anchors (resistance endpoints, selectivity percentages)
//! 2. RF anchors (gain endpoints, environmental table knots)
//! 3. Thermal anchors (voltage -> steady-state temperature)
//! 4. Release anchors (cumulative fractions, headspace points)
//! 5. Zero-leakage property (bitwise, 10,000 randomized trajectories)
//! 6. Closed-loop ordering property (randomized smart runs)
//! 7. Shelf-life reproduction (bundled scenarios)
//! 8. Numerical properties (dt convergence, analytic release, monotonicity)
//! 9. Optimizer oracle (simplex vs grid, synthetic round-trip)
//! 10. Determinism (byte-identical serialized traces)

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smartpack::calibrate::{self, AnchorSet};
use smartpack::engine::{self, simulate};
use smartpack::release::{gate_open, step_release, CompoundParams, ReleaseParams, ReleaseState};
use smartpack::rf_link::{gain_db, harvested_voltage, EnvCondition};
use smartpack::sensor::{response_percent, sensor_resistance, Gas};
use smartpack::thermal::steady_state_temp;
use smartpack::trace::EventKind;
use smartpack::{CalibratedParams, ScenarioConfig};
use std::path::PathBuf;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> ScenarioConfig {
    let path = repo_root().join("scenarios").join(name);
    ScenarioConfig::from_toml_file(&path, &CalibratedParams::default()).unwrap()
}

fn check(criterion: &str, ok: bool, detail: &str) {
    println!(
        "[acceptance] {criterion}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{criterion} failed: {detail}");
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

#[test]
fn criterion_01_sensor_anchors() {
    let m = CalibratedParams::default().sensor;
    let r0 = sensor_resistance(0.0, 0.0, 0.0, &m).unwrap();
    let r90 = sensor_resistance(90.0, 0.0, 0.0, &m).unwrap();
    let nh3 = response_percent(Gas::Nh3, 90.0, &m).unwrap();
    let ch4 = response_percent(Gas::Ch4, 500.0, &m).unwrap();
    let co2 = response_percent(Gas::Co2, 7500.0, &m).unwrap();
    let ok = within(r0, 900.0, 9.0)
        && within(r90, 1800.0, 18.0)
        && within(nh3, 13.0, 0.2)
        && within(ch4, 5.0, 0.2)
        && within(co2, 3.5, 0.2);
    check(
        "criterion 1 sensor anchors",
        ok,
        &format!("R(0)={r0:.1} R(90)={r90:.1} resp={nh3:.2}/{ch4:.2}/{co2:.2} %"),
    );
}

#[test]
fn criterion_02_rf_anchors() {
    let p = CalibratedParams::default();
    let env = EnvCondition::neutral();
    let g_fresh = gain_db(&p.rf, 900.0, &env).unwrap();
    let g_loaded = gain_db(&p.rf, 1800.0, &env).unwrap();
    let t = &p.rf.env_shift_tables;
    let knots_exact = (14.0 + t.strain_freq.eval(40.0) - 12.0).abs() < 1e-12
        && (14.0 + t.bend_freq.eval(5000.0) - 15.5).abs() < 1e-12
        && (14.0 + t.temp_freq.eval(5.0) - 14.9).abs() < 1e-12
        && (14.0 + t.humidity_freq.eval(80.0) - 15.5).abs() < 1e-12
        && (t.strain_trace_ohm.eval(0.0) - 0.3).abs() < 1e-12
        && (t.strain_trace_ohm.eval(40.0) - 2.2).abs() < 1e-12
        && (t.electrode_ohm.eval(0.0) - 3.0).abs() < 1e-12
        && (t.electrode_ohm.eval(40.0) - 8.0).abs() < 1e-12;
    let ok = within(g_fresh, 0.4, 0.2) && within(g_loaded, -5.6, 0.2) && knots_exact;
    check(
        "criterion 2 rf anchors",
        ok,
        &format!("gain {g_fresh:.2}/{g_loaded:.2} dB, knots exact: {knots_exact}"),
    );
}

#[test]
fn criterion_03_thermal_anchors() {
    let t = CalibratedParams::default().thermal;
    let t3 = steady_state_temp(3.0, &t).unwrap();
    let t58 = steady_state_temp(5.8, &t).unwrap();
    let ok = within(t3, 27.0, 0.5) && within(t58, 37.0, 0.5);
    check(
        "criterion 3 thermal anchors",
        ok,
        &format!("T(3V)={t3:.2} C, T(5.8V)={t58:.2} C"),
    );
}

fn gate_open_run(hours: f64, dt_s: f64, p: &ReleaseParams) -> Vec<(f64, ReleaseState)> {
    let dt_h = dt_s / 3600.0;
    let steps = (hours * 3600.0 / dt_s).round() as usize;
    let mut s = ReleaseState::sealed();
    let mut out = Vec::with_capacity(steps);
    for i in 0..steps {
        s = step_release(&s, true, dt_h, p).unwrap();
        out.push(((i + 1) as f64 * dt_h, s.clone()));
    }
    out
}

#[test]
fn criterion_04_release_anchors() {
    let p = CalibratedParams::default().release;
    let run = gate_open_run(24.0, 10.0, &p);
    let at = |h: f64| &run[(h * 360.0) as usize - 1].1;
    let (ca4, eg4) = (at(4.0).ca_headspace_ppm, at(4.0).eg_headspace_ppm);
    let (ca24, eg24) = (at(24.0).ca_headspace_ppm, at(24.0).eg_headspace_ppm);
    let frac_ca = at(24.0).ca_released_fraction;
    let frac_eg = at(24.0).eg_released_fraction;
    let ok = within(frac_ca, 0.67, 0.02)
        && frac_eg >= 0.995
        && within(ca4, 270.0, 27.0)
        && within(eg4, 70.0, 7.0)
        && within(ca24, 160.0, 16.0)
        && within(eg24, 32.0, 3.2);
    check(
        "criterion 4 release anchors",
        ok,
        &format!(
            "frac24 CA={frac_ca:.3} EG={frac_eg:.4}; headspace 4h=({ca4:.0},{eg4:.1}) 24h=({ca24:.0},{eg24:.1}) ppm"
        ),
    );
}

#[test]
fn criterion_05_zero_leakage_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ea1);
    let mut worst_bits_moved = false;
    for _ in 0..10_000 {
        let p = ReleaseParams {
            lcst_c: 32.0,
            ca: CompoundParams {
                total_load: 1.0,
                rate_constant: rng.gen_range(0.001..1.0),
                headspace_yield: rng.gen_range(10.0..5000.0),
                headspace_loss: rng.gen_range(0.001..1.0),
            },
            eg: CompoundParams {
                total_load: 1.0,
                rate_constant: rng.gen_range(0.001..1.0),
                headspace_yield: rng.gen_range(10.0..5000.0),
                headspace_loss: rng.gen_range(0.001..1.0),
            },
        };
        let mut state = ReleaseState::sealed();
        for _ in 0..20 {
            // mat temperature always strictly below the LCST
            let temp = rng.gen_range(-5.0..31.999);
            let gate = gate_open(temp, &p).unwrap();
            assert!(!gate);
            let dt = rng.gen_range(0.001..1.0);
            state = step_release(&state, gate, dt, &p).unwrap();
        }
        if state.ca_released_fraction.to_bits() != 0.0f64.to_bits()
            || state.eg_released_fraction.to_bits() != 0.0f64.to_bits()
        {
            worst_bits_moved = true;
        }
    }
    check(
        "criterion 5 zero leakage",
        !worst_bits_moved,
        "10000 sub-LCST trajectories, released mass bitwise zero",
    );
}

#[test]
fn criterion_06_closed_loop_ordering() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x06de6);
    let positions = ["inner_edge_5cm", "center", "outer_edge_10cm"];
    let mut crossings = 0usize;
    let mut opens = 0usize;
    for run in 0..200 {
        let mut cfg = scenario("rt_salmon_smart.toml");
        cfg.name = format!("randomized_{run}");
        cfg.duration_h = rng.gen_range(12.0..48.0);
        cfg.dt_s = [5.0, 10.0, 30.0, 60.0][rng.gen_range(0..4)];
        cfg.ambient_c = rng.gen_range(4.0..24.0);
        cfg.params.thermal.ambient_c = cfg.ambient_c;
        cfg.humidity_rh = rng.gen_range(20.0..80.0);
        cfg.strain_pct = rng.gen_range(0.0..40.0);
        cfg.bend_cycles = rng.gen_range(0.0..5000.0);
        cfg.position = positions[rng.gen_range(0..positions.len())].to_string();
        cfg.params.spoilage.growth_rate_rt = rng.gen_range(0.1..1.0);
        cfg.params.spoilage.tvbn_cap = rng.gen_range(10.0..40.0);
        cfg.params.spoilage.q10 = rng.gen_range(1.0..4.0);
        cfg.comparator_mode = run % 10 == 0;
        let trace = simulate(&cfg).unwrap();
        let cross = trace
            .events
            .iter()
            .find(|e| e.kind == EventKind::Nh3CrossedThreshold)
            .map(|e| e.t_h);
        let open = trace
            .events
            .iter()
            .find(|e| e.kind == EventKind::GateOpened)
            .map(|e| e.t_h);
        if cross.is_some() {
            crossings += 1;
        }
        match (cross, open) {
            (None, Some(t)) => panic!("run {run}: gate opened at {t} h without a threshold crossing"),
            (Some(tc), Some(to)) => {
                opens += 1;
                assert!(
                    to >= tc,
                    "run {run}: gate at {to} h before crossing at {tc} h"
                );
            }
            _ => {}
        }
        // and never any release without the gate
        if open.is_none() {
            let last = trace.rows.last().unwrap();
            assert_eq!(last.ca_released_frac.to_bits(), 0.0f64.to_bits());
        }
    }
    check(
        "criterion 6 closed-loop ordering",
        crossings > 20 && opens > 10,
        &format!("200 randomized smart runs, {crossings} crossings, {opens} gate openings, ordering held"),
    );
}

#[test]
fn criterion_07_shelf_life() {
    let cold_control = simulate(&scenario("cold_salmon_control.toml")).unwrap();
    let cold_smart = simulate(&scenario("cold_salmon_smart.toml")).unwrap();
    let rt_control = simulate(&scenario("rt_salmon_control.toml")).unwrap();

    let control_cross = cold_control
        .events
        .iter()
        .find(|e| e.kind == EventKind::TvbnLimitExceeded)
        .map(|e| e.t_h);
    let smart_crossed = cold_smart
        .events
        .iter()
        .any(|e| e.kind == EventKind::TvbnLimitExceeded);
    let rt60 = rt_control
        .rows
        .windows(2)
        .find(|w| w[0].nh3_ppm < 60.0 && w[1].nh3_ppm >= 60.0)
        .map(|w| {
            let (a, b) = (w[0].nh3_ppm, w[1].nh3_ppm);
            (w[0].t_s + (60.0 - a) / (b - a) * (w[1].t_s - w[0].t_s)) / 3600.0
        });

    let ok_control = control_cross.is_some_and(|t| t <= 96.0);
    let ok_smart = !smart_crossed && cold_smart.duration_h() >= 336.0;
    let ok_rt = rt60.is_some_and(|t| within(t, 16.0, 1.0));
    check(
        "criterion 7 shelf life",
        ok_control && ok_smart && ok_rt,
        &format!(
            "4C control limit at {:?} h (<=96), 4C smart crossed: {smart_crossed} (336 h), RT 60 ppm at {:?} h (16 +- 1)",
            control_cross, rt60
        ),
    );
}

#[test]
fn criterion_08_numerical_properties() {
    // dt halving: final TVB-N and released fractions move < 0.5 %, on both
    // the room-temperature physical-chain run and the refrigerated run
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(1e-12);
    let mut dt_ok = true;
    for name in ["rt_salmon_smart.toml", "cold_salmon_smart.toml"] {
        let base = scenario(name);
        let mut halved = scenario(name);
        halved.dt_s = base.dt_s / 2.0;
        let t1 = simulate(&base).unwrap();
        let t2 = simulate(&halved).unwrap();
        let (a, b) = (t1.rows.last().unwrap(), t2.rows.last().unwrap());
        dt_ok &= rel(a.tvbn_mg100g, b.tvbn_mg100g) < 0.005
            && rel(a.ca_released_frac, b.ca_released_frac) < 0.005
            && rel(a.eg_released_frac, b.eg_released_frac) < 0.005;
    }

    // gate-open release matches the analytic exponential within 0.1 %
    let p = CalibratedParams::default();
    let run = gate_open_run(24.0, 10.0, &p.release);
    let analytic_ok = run.iter().all(|(t, s)| {
        let analytic = 1.0 - (-p.release.ca.rate_constant * t).exp();
        (s.ca_released_fraction - analytic).abs() <= 0.001 * analytic.max(1e-9)
    });

    // monotonicity sweeps, 1000 points each
    let env = EnvCondition::neutral();
    let mut mono_ok = true;
    let mut prev = [-1.0f64; 5];
    for i in 0..=1000 {
        let x = f64::from(i) / 1000.0;
        let r_nh3 = sensor_resistance(90.0 * x, 0.0, 0.0, &p.sensor).unwrap();
        let r_ch4 = sensor_resistance(0.0, 500.0 * x, 0.0, &p.sensor).unwrap();
        let r_co2 = sensor_resistance(0.0, 0.0, 7500.0 * x, &p.sensor).unwrap();
        let r_load = sensor_resistance(90.0 * x, 0.0, 0.0, &p.sensor).unwrap();
        let v = harvested_voltage(&p.rf, r_load, &env).unwrap();
        let t_ss = steady_state_temp(8.0 * x, &p.thermal).unwrap();
        let cur = [r_nh3, r_ch4, r_co2, v, t_ss];
        for (c, pr) in cur.iter().zip(&prev) {
            if c < pr {
                mono_ok = false;
            }
        }
        if i > 0 && t_ss <= prev[4] {
            mono_ok = false; // steady-state temperature is strictly increasing
        }
        prev = cur;
    }

    check(
        "criterion 8 numerical properties",
        dt_ok && analytic_ok && mono_ok,
        &format!("dt-halving ok: {dt_ok}, analytic release ok: {analytic_ok}, monotone sweeps ok: {mono_ok}"),
    );
}

#[test]
fn criterion_09_optimizer_oracle() {
    let anchors = AnchorSet::from_csv_path(&repo_root().join("anchors/paper_anchors.csv")).unwrap();
    let outcome = calibrate::calibrate_all(&anchors).unwrap();
    let mut all_ok = true;
    let mut detail = String::new();
    for spec in calibrate::problem_specs() {
        if spec.dimension() == 0 {
            continue;
        }
        let resolution = match spec.dimension() {
            1 => 64,
            2 => 32,
            _ => 24,
        };
        let fitted = calibrate::fit(spec.id, &anchors, &spec.init, &spec.bounds, &outcome.params)
            .unwrap();
        let oracle =
            calibrate::fit_grid_oracle(spec.id, &anchors, &spec.bounds, resolution, &outcome.params)
                .unwrap();
        if fitted.residual > oracle.residual + 1e-6 {
            all_ok = false;
            detail.push_str(&format!(
                "{}: fit {:.3e} > grid {:.3e}; ",
                spec.id, fitted.residual, oracle.residual
            ));
        }
    }

    // synthetic round-trip: planted thermal parameters, init perturbed 10 %
    let planted = [1.9, 1.21];
    let mut base = CalibratedParams::default();
    calibrate::apply_params("thermal", &mut base, &planted);
    let synth = |v: f64| smartpack::calibrate::Anchor {
        model_id: "thermal".to_string(),
        input: serde_json::json!({ "v": v }),
        observed: 20.0 + planted[0] * v.powf(planted[1]),
        tolerance: 0.25,
        provenance: "synthetic".to_string(),
    };
    let synth_set = AnchorSet {
        anchors: vec![synth(2.0), synth(4.0), synth(6.0)],
    };
    let recovered = calibrate::fit(
        "thermal",
        &synth_set,
        &[planted[0] * 1.1, planted[1] * 1.1],
        &[(0.01, 50.0), (0.2, 4.0)],
        &CalibratedParams::default(),
    )
    .unwrap();
    let round_trip_ok = recovered
        .params
        .iter()
        .zip(&planted)
        .all(|(got, want)| ((got - want) / want).abs() < 1e-6);

    check(
        "criterion 9 optimizer oracle",
        all_ok && round_trip_ok,
        &format!("grid cross-check ok: {all_ok} {detail}; synthetic round-trip ok: {round_trip_ok}"),
    );
}

#[test]
fn criterion_10_determinism() {
    let cfg_a = scenario("rt_salmon_smart.toml");
    let cfg_b = scenario("rt_salmon_smart.toml");
    let csv_a = simulate(&cfg_a).unwrap().to_csv();
    let csv_b = simulate(&cfg_b).unwrap().to_csv();
    let events_a = simulate(&cfg_a).unwrap().events_csv();
    let events_b = simulate(&cfg_b).unwrap().events_csv();
    check(
        "criterion 10 determinism",
        csv_a == csv_b && events_a == events_b,
        &format!("{} identical bytes of trace.csv", csv_a.len()),
    );
    // and the comparison of the two runs shows zero deltas everywhere
    let ta = simulate(&cfg_a).unwrap();
    let tb = simulate(&cfg_b).unwrap();
    let report = engine::compare(&[&ta, &tb]).unwrap();
    assert!(report
        .deltas
        .iter()
        .flatten()
        .all(|d| d.max_abs_delta == 0.0));
}
