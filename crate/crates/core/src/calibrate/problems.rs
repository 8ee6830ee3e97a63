//! The bundled calibration problems: one per model, fit independently in
//! dependency order (sensor -> rf link -> thermal -> release -> spoilage ->
//! closed-loop constants), freezing upstream parameters as each fit lands.
//!
//! Each problem names the parameters it fits, their box bounds, and a
//! neutral starting point. Predictions for closed-loop anchors (VOC markers,
//! inhibition endpoint) run the actual engine on a reduced-duration
//! scenario, so the fit sees exactly the deployed dynamics.

use super::simplex::{fit_simplex, grid_oracle, FitResult};
use super::{objective, Anchor, AnchorSet};
use crate::engine;
use crate::error::{Error, Result};
use crate::params::CalibratedParams;
use crate::rf_link::{self, EnvCondition};
use crate::scenario::ScenarioConfig;
use crate::sensor::{self, Gas};
use crate::spoilage::{logistic_crossing_time, logistic_tvbn};
use crate::thermal;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ProblemSpec {
    pub id: &'static str,
    pub param_names: Vec<&'static str>,
    pub bounds: Vec<(f64, f64)>,
    pub init: Vec<f64>,
}

impl ProblemSpec {
    pub fn dimension(&self) -> usize {
        self.param_names.len()
    }
}

/// Bundled problems in dependency order.
pub fn problem_specs() -> Vec<ProblemSpec> {
    vec![
        ProblemSpec {
            id: "sensor_resistance",
            param_names: vec!["r_baseline", "r_saturated"],
            bounds: vec![(100.0, 5000.0), (200.0, 10000.0)],
            init: vec![1000.0, 2500.0],
        },
        ProblemSpec {
            id: "sensor_response",
            param_names: vec!["transient_response_max", "sens_ch4", "sens_co2"],
            bounds: vec![(0.001, 1.0), (1e-6, 1e-2), (1e-8, 1e-3)],
            init: vec![0.1, 1e-4, 1e-5],
        },
        ProblemSpec {
            id: "sensor_bending",
            param_names: vec!["bend_loss_at_5000"],
            bounds: vec![(0.0, 0.9)],
            init: vec![0.1],
        },
        ProblemSpec {
            id: "rf_env",
            param_names: vec![],
            bounds: vec![],
            init: vec![],
        },
        ProblemSpec {
            id: "rf_coupling",
            param_names: vec![],
            bounds: vec![],
            init: vec![],
        },
        ProblemSpec {
            id: "rf_pull",
            param_names: vec!["load_pull_mhz"],
            bounds: vec![(0.0, 2.0)],
            init: vec![0.8],
        },
        ProblemSpec {
            id: "rf_gain",
            param_names: vec!["gain_unloaded", "gain_fullscale"],
            bounds: vec![(-5.0, 5.0), (-30.0, 0.0)],
            init: vec![0.0, -10.0],
        },
        ProblemSpec {
            id: "rf_voltage",
            param_names: vec!["v_peak", "knee_mid_ohm", "knee_width_ohm"],
            bounds: vec![(1.0, 20.0), (1000.0, 1700.0), (1.0, 200.0)],
            init: vec![6.0, 1400.0, 50.0],
        },
        ProblemSpec {
            id: "thermal",
            param_names: vec!["power_coefficient", "power_exponent"],
            bounds: vec![(0.01, 50.0), (0.2, 4.0)],
            init: vec![1.0, 2.0],
        },
        ProblemSpec {
            id: "release_ca_rate",
            param_names: vec!["ca_rate_constant"],
            bounds: vec![(1e-4, 2.0)],
            init: vec![0.1],
        },
        ProblemSpec {
            id: "release_ca_headspace",
            param_names: vec!["ca_headspace_yield", "ca_headspace_loss"],
            bounds: vec![(10.0, 100000.0), (1e-4, 5.0)],
            init: vec![1000.0, 0.1],
        },
        ProblemSpec {
            id: "release_eg_headspace",
            param_names: vec!["eg_headspace_yield", "eg_headspace_loss"],
            bounds: vec![(10.0, 100000.0), (1e-4, 5.0)],
            init: vec![1000.0, 0.1],
        },
        ProblemSpec {
            id: "spoilage_rt",
            param_names: vec!["growth_rate_rt", "tvbn_cap", "nh3_per_tvbn"],
            bounds: vec![(0.05, 2.0), (25.05, 45.0), (0.5, 10.0)],
            init: vec![0.3, 30.0, 2.0],
        },
        ProblemSpec {
            id: "spoilage_q10",
            param_names: vec!["q10"],
            bounds: vec![(1.0, 6.0)],
            init: vec![2.0],
        },
        ProblemSpec {
            id: "marker_butanone",
            param_names: vec!["marker_yield_butanone"],
            bounds: vec![(1.0, 100000.0)],
            init: vec![500.0],
        },
        ProblemSpec {
            id: "marker_methylbutanol",
            param_names: vec!["marker_yield_methylbutanol"],
            bounds: vec![(0.1, 1000.0)],
            init: vec![10.0],
        },
        ProblemSpec {
            id: "spoilage_halfdose",
            param_names: vec!["inhibition_halfdose"],
            bounds: vec![(1.0, 2000.0)],
            init: vec![25.0],
        },
    ]
}

/// Writes a candidate parameter vector into the full parameter set.
pub fn apply_params(id: &str, params: &mut CalibratedParams, x: &[f64]) {
    match id {
        "sensor_resistance" => {
            params.sensor.r_baseline = x[0];
            params.sensor.r_saturated = x[1];
        }
        "sensor_response" => {
            params.sensor.transient_response_max = x[0];
            params.sensor.sens_ch4 = x[1];
            params.sensor.sens_co2 = x[2];
        }
        "sensor_bending" => params.sensor.bend_loss_at_5000 = x[0],
        "rf_env" | "rf_coupling" => {}
        "rf_pull" => params.rf.load_pull_mhz = x[0],
        "rf_gain" => {
            params.rf.gain_unloaded = x[0];
            params.rf.gain_fullscale = x[1];
        }
        "rf_voltage" => {
            params.rf.v_peak = x[0];
            params.rf.knee_mid_ohm = x[1];
            params.rf.knee_width_ohm = x[2];
        }
        "thermal" => {
            params.thermal.power_coefficient = x[0];
            params.thermal.power_exponent = x[1];
        }
        "release_ca_rate" => params.release.ca.rate_constant = x[0],
        "release_ca_headspace" => {
            params.release.ca.headspace_yield = x[0];
            params.release.ca.headspace_loss = x[1];
        }
        "release_eg_headspace" => {
            params.release.eg.headspace_yield = x[0];
            params.release.eg.headspace_loss = x[1];
        }
        "spoilage_rt" => {
            params.spoilage.growth_rate_rt = x[0];
            params.spoilage.tvbn_cap = x[1];
            params.spoilage.nh3_per_tvbn = x[2];
        }
        "spoilage_q10" => params.spoilage.q10 = x[0],
        "marker_butanone" => params.spoilage.marker_yield_butanone = x[0],
        "marker_methylbutanol" => params.spoilage.marker_yield_methylbutanol = x[0],
        "spoilage_halfdose" => params.spoilage.inhibition_halfdose = x[0],
        other => panic!("unknown calibration problem `{other}`"),
    }
}

/// Reads the current values of a problem's parameters.
pub fn current_params(id: &str, params: &CalibratedParams) -> Vec<f64> {
    match id {
        "sensor_resistance" => vec![params.sensor.r_baseline, params.sensor.r_saturated],
        "sensor_response" => vec![
            params.sensor.transient_response_max,
            params.sensor.sens_ch4,
            params.sensor.sens_co2,
        ],
        "sensor_bending" => vec![params.sensor.bend_loss_at_5000],
        "rf_env" | "rf_coupling" => vec![],
        "rf_pull" => vec![params.rf.load_pull_mhz],
        "rf_gain" => vec![params.rf.gain_unloaded, params.rf.gain_fullscale],
        "rf_voltage" => vec![
            params.rf.v_peak,
            params.rf.knee_mid_ohm,
            params.rf.knee_width_ohm,
        ],
        "thermal" => vec![
            params.thermal.power_coefficient,
            params.thermal.power_exponent,
        ],
        "release_ca_rate" => vec![params.release.ca.rate_constant],
        "release_ca_headspace" => vec![
            params.release.ca.headspace_yield,
            params.release.ca.headspace_loss,
        ],
        "release_eg_headspace" => vec![
            params.release.eg.headspace_yield,
            params.release.eg.headspace_loss,
        ],
        "spoilage_rt" => vec![
            params.spoilage.growth_rate_rt,
            params.spoilage.tvbn_cap,
            params.spoilage.nh3_per_tvbn,
        ],
        "spoilage_q10" => vec![params.spoilage.q10],
        "marker_butanone" => vec![params.spoilage.marker_yield_butanone],
        "marker_methylbutanol" => vec![params.spoilage.marker_yield_methylbutanol],
        "spoilage_halfdose" => vec![params.spoilage.inhibition_halfdose],
        other => panic!("unknown calibration problem `{other}`"),
    }
}

fn analytic_headspace(t: f64, k: f64, yield_ppm: f64, loss: f64) -> f64 {
    if (loss - k).abs() < 1e-12 {
        yield_ppm * k * t * (-k * t).exp()
    } else {
        yield_ppm * k / (loss - k) * ((-k * t).exp() - (-loss * t).exp())
    }
}

fn gas_from_str(s: &str) -> Result<Gas> {
    match s {
        "nh3" => Ok(Gas::Nh3),
        "ch4" => Ok(Gas::Ch4),
        "co2" => Ok(Gas::Co2),
        other => Err(Error::invalid(format!("unknown gas `{other}`"))),
    }
}

/// Scenario used for closed-loop marker anchors: room-temperature smart run,
/// physical trigger chain.
fn rt_smart_config(params: &CalibratedParams, duration_h: f64, dt_s: f64) -> ScenarioConfig {
    let mut params = params.clone();
    params.thermal.ambient_c = 20.0;
    params.thermal.series_electrode_resistance = thermal::ELECTRODE_REST_OHM;
    ScenarioConfig {
        name: "fit_rt_smart".to_string(),
        duration_h,
        dt_s,
        smart_packaging_enabled: true,
        comparator_mode: false,
        trigger_threshold_ppm: 40.0,
        tvbn_limit: 25.0,
        ambient_c: 20.0,
        humidity_rh: 20.0,
        position: "inner_edge_5cm".to_string(),
        strain_pct: 0.0,
        bend_cycles: 0.0,
        ch4_ppm: 0.0,
        co2_ppm: 0.0,
        food_present: true,
        params,
    }
}

/// Scenario used for the inhibition endpoint: refrigerated smart run with
/// the comparator ablation (the physical chain cannot reach the LCST at
/// refrigerated ambient).
fn cold_smart_config(params: &CalibratedParams, duration_h: f64, dt_s: f64) -> ScenarioConfig {
    let mut cfg = rt_smart_config(params, duration_h, dt_s);
    cfg.name = "fit_cold_smart".to_string();
    cfg.comparator_mode = true;
    cfg.ambient_c = 4.0;
    cfg.params.thermal.ambient_c = 4.0;
    cfg
}

/// Model prediction for one anchor with the candidate parameters in place.
pub fn predict(id: &str, params: &CalibratedParams, anchor: &Anchor) -> Result<f64> {
    let neutral = EnvCondition::neutral();
    match id {
        "sensor_resistance" => {
            sensor::sensor_resistance(anchor.num("nh3")?, 0.0, 0.0, &params.sensor)
        }
        "sensor_response" => {
            if anchor.input.get("kind").and_then(|v| v.as_str()) == Some("passivation_ratio") {
                let mut passivated = params.sensor.clone();
                passivated.passivation_factor = anchor.num("factor")?;
                let full = sensor::response_percent(Gas::Nh3, 90.0, &params.sensor)?;
                let part = sensor::response_percent(Gas::Nh3, 90.0, &passivated)?;
                return Ok(part / full);
            }
            sensor::response_percent(gas_from_str(anchor.text("gas")?)?, anchor.num("conc")?, &params.sensor)
        }
        "sensor_bending" => {
            let cycles = anchor.num("cycles")? as u32;
            let degraded = sensor::degrade_by_bending(&params.sensor, cycles);
            Ok(degraded.bend_retention())
        }
        "rf_env" => {
            let kind = anchor.text("kind")?;
            let x = anchor.num("x")?;
            let t = &params.rf.env_shift_tables;
            Ok(match kind {
                "strain_freq" => params.rf.f_res_nominal + t.strain_freq.eval(x),
                "bend_freq" => params.rf.f_res_nominal + t.bend_freq.eval(x),
                "temp_freq" => params.rf.f_res_nominal + t.temp_freq.eval(x),
                "humidity_freq" => params.rf.f_res_nominal + t.humidity_freq.eval(x),
                "strain_trace" => rf_link::antenna_trace_resistance(&params.rf, x),
                "electrode" => rf_link::electrode_resistance(&params.rf, x),
                other => return Err(Error::invalid(format!("unknown rf_env kind `{other}`"))),
            })
        }
        "rf_coupling" => {
            let (factor, _) = params.rf.lookup_coupling(anchor.text("position")?);
            Ok(factor)
        }
        "rf_pull" => rf_link::resonance_frequency(&params.rf, anchor.num("r_load")?, &neutral),
        "rf_gain" => rf_link::gain_db(&params.rf, anchor.num("r_load")?, &neutral),
        "rf_voltage" => rf_link::harvested_voltage(&params.rf, anchor.num("r_load")?, &neutral),
        "thermal" => {
            let mut t = params.thermal.clone();
            t.ambient_c = 20.0;
            t.series_electrode_resistance = thermal::ELECTRODE_REST_OHM;
            thermal::steady_state_temp(anchor.num("v")?, &t)
        }
        "release_ca_rate" => {
            Ok(1.0 - (-params.release.ca.rate_constant * anchor.num("hours")?).exp())
        }
        "release_ca_headspace" => Ok(analytic_headspace(
            anchor.num("hours")?,
            params.release.ca.rate_constant,
            params.release.ca.headspace_yield,
            params.release.ca.headspace_loss,
        )),
        "release_eg_headspace" => {
            if anchor.input.get("kind").and_then(|v| v.as_str()) == Some("fraction") {
                return Ok(1.0 - (-params.release.eg.rate_constant * anchor.num("hours")?).exp());
            }
            Ok(analytic_headspace(
                anchor.num("hours")?,
                params.release.eg.rate_constant,
                params.release.eg.headspace_yield,
                params.release.eg.headspace_loss,
            ))
        }
        "spoilage_rt" => {
            let kind = anchor.text("kind")?;
            let s = &params.spoilage;
            Ok(match kind {
                "tvbn_at" => logistic_tvbn(anchor.num("hours")?, s.growth_rate_rt, s),
                "crossing_h" => logistic_crossing_time(anchor.num("level")?, s.growth_rate_rt, s)
                    .unwrap_or(1e6),
                "nh3_at_tvbn" => s.nh3_per_tvbn * (anchor.num("tvbn")? - s.tvbn_initial).max(0.0),
                "initial" => s.tvbn_initial,
                other => return Err(Error::invalid(format!("unknown spoilage_rt kind `{other}`"))),
            })
        }
        "spoilage_q10" => {
            let kind = anchor.text("kind")?;
            let s = &params.spoilage;
            let temp_c = anchor.num("temp_c")?;
            let rate = s.growth_rate_rt * s.q10.powf((temp_c - 20.0) / 10.0);
            Ok(match kind {
                "cold_crossing_h" => {
                    logistic_crossing_time(anchor.num("level")?, rate, s).unwrap_or(1e6)
                }
                "tvbn_at_cold" => logistic_tvbn(anchor.num("hours")?, rate, s),
                other => return Err(Error::invalid(format!("unknown spoilage_q10 kind `{other}`"))),
            })
        }
        "marker_butanone" | "marker_methylbutanol" => {
            let hours = anchor.num("hours")?;
            let cfg = rt_smart_config(params, hours, 10.0);
            let trace = engine::simulate(&cfg)?;
            let row = trace
                .row_at_hours(hours)
                .ok_or_else(|| Error::invalid("empty fit trace".to_string()))?;
            Ok(match anchor.text("which")? {
                "butanone" => row.butanone_ppm,
                "methylbutanol" => row.methylbutanol_ppm,
                other => return Err(Error::invalid(format!("unknown marker `{other}`"))),
            })
        }
        "spoilage_halfdose" => {
            let hours = anchor.num("hours")?;
            let cfg = cold_smart_config(params, hours, 60.0);
            let trace = engine::simulate(&cfg)?;
            let row = trace
                .row_at_hours(hours)
                .ok_or_else(|| Error::invalid("empty fit trace".to_string()))?;
            Ok(row.tvbn_mg100g)
        }
        other => Err(Error::Unsupported(format!("unknown calibration problem `{other}`"))),
    }
}

/// Rebuilds the antenna's environmental shift tables and coupling table from
/// anchor rows, so re-digitized data flows into the calibrated parameters
/// without recompiling. Frequency-table knots store the shift relative to
/// the nominal resonance; resistance tables store absolute values.
pub fn rf_tables_from_anchors(
    anchors: &AnchorSet,
    f_res_nominal: f64,
) -> Result<(crate::rf_link::EnvShiftTables, Vec<(String, f64)>)> {
    let mut knots: std::collections::BTreeMap<&str, Vec<(f64, f64)>> = Default::default();
    for a in anchors.for_model("rf_env") {
        let kind = a.text("kind")?;
        let x = a.num("x")?;
        let y = match kind {
            "strain_freq" | "bend_freq" | "temp_freq" | "humidity_freq" => {
                a.observed - f_res_nominal
            }
            "strain_trace" | "electrode" => a.observed,
            other => return Err(Error::AnchorFormat(format!("unknown rf_env kind `{other}`"))),
        };
        knots.entry(kind).or_default().push((x, y));
    }
    let mut table = |kind: &str| -> Result<crate::rf_link::PiecewiseTable> {
        let mut k = knots
            .remove(kind)
            .ok_or_else(|| Error::AnchorFormat(format!("no rf_env knots for `{kind}`")))?;
        k.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(crate::rf_link::PiecewiseTable::new(k))
    };
    let tables = crate::rf_link::EnvShiftTables {
        strain_freq: table("strain_freq")?,
        strain_trace_ohm: table("strain_trace")?,
        bend_freq: table("bend_freq")?,
        temp_freq: table("temp_freq")?,
        humidity_freq: table("humidity_freq")?,
        electrode_ohm: table("electrode")?,
    };
    let mut coupling: Vec<(String, f64)> = anchors
        .for_model("rf_coupling")
        .iter()
        .map(|a| Ok((a.text("position")?.to_string(), a.observed)))
        .collect::<Result<_>>()?;
    if coupling.is_empty() {
        return Err(Error::AnchorFormat("no rf_coupling rows".to_string()));
    }
    coupling.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok((tables, coupling))
}

/// One row of the per-anchor residual report.
#[derive(Debug, Clone, Serialize)]
pub struct AnchorResidual {
    pub provenance: String,
    pub observed: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub residual: f64,
    pub verify_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub problem_id: String,
    pub param_names: Vec<String>,
    pub result: FitResult,
    /// All fitted parameters strictly inside their bounds.
    pub in_bounds: bool,
    pub anchors: Vec<AnchorResidual>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationOutcome {
    pub params: CalibratedParams,
    pub reports: Vec<FitReport>,
}

/// Fits one problem against its anchors with upstream parameters frozen in
/// `base`. Returns the raw fit result; does not mutate `base`.
pub fn fit(
    id: &str,
    anchors: &AnchorSet,
    init: &[f64],
    bounds: &[(f64, f64)],
    base: &CalibratedParams,
) -> Result<FitResult> {
    let rows = anchors.for_model(id);
    if rows.is_empty() {
        return Err(Error::AnchorFormat(format!("no anchors for problem `{id}`")));
    }
    let obj = |x: &[f64]| {
        objective(x, &rows, bounds, |x, a| {
            let mut scratch = base.clone();
            apply_params(id, &mut scratch, x);
            predict(id, &scratch, a)
        })
    };
    Ok(fit_simplex(init, obj))
}

/// Grid-oracle counterpart of `fit` over the same objective.
pub fn fit_grid_oracle(
    id: &str,
    anchors: &AnchorSet,
    bounds: &[(f64, f64)],
    resolution: usize,
    base: &CalibratedParams,
) -> Result<FitResult> {
    let rows = anchors.for_model(id);
    if rows.is_empty() {
        return Err(Error::AnchorFormat(format!("no anchors for problem `{id}`")));
    }
    grid_oracle(bounds, resolution, |x: &[f64]| {
        objective(x, &rows, bounds, |x, a| {
            let mut scratch = base.clone();
            apply_params(id, &mut scratch, x);
            predict(id, &scratch, a)
        })
    })
}

/// Runs every bundled problem in dependency order, freezing each fit into
/// the parameter set before the next problem runs.
pub fn calibrate_all(anchors: &AnchorSet) -> Result<CalibrationOutcome> {
    let mut params = CalibratedParams::default();
    let (tables, coupling) = rf_tables_from_anchors(anchors, params.rf.f_res_nominal)?;
    params.rf.env_shift_tables = tables;
    params.rf.coupling_table = coupling;
    let mut reports = Vec::new();
    for spec in problem_specs() {
        let rows = anchors.for_model(spec.id);
        if rows.is_empty() {
            return Err(Error::AnchorFormat(format!(
                "anchor set has no rows for problem `{}`",
                spec.id
            )));
        }
        let result = if spec.dimension() == 0 {
            FitResult {
                params: vec![],
                residual: 0.0,
                iterations: 0,
                converged: true,
            }
        } else {
            let fitted = fit(spec.id, anchors, &spec.init, &spec.bounds, &params)?;
            apply_params(spec.id, &mut params, &fitted.params);
            fitted
        };
        let in_bounds = result
            .params
            .iter()
            .zip(&spec.bounds)
            .all(|(x, (lo, hi))| x > lo && x < hi);
        let mut anchor_rows = Vec::new();
        let mut fit_residual = 0.0;
        for a in &rows {
            let predicted = predict(spec.id, &params, a)?;
            let residual = a.residual(predicted);
            if !a.verify_only() {
                fit_residual += residual * residual;
            }
            anchor_rows.push(AnchorResidual {
                provenance: a.provenance.clone(),
                observed: a.observed,
                predicted,
                tolerance: a.tolerance,
                residual,
                verify_only: a.verify_only(),
            });
        }
        reports.push(FitReport {
            problem_id: spec.id.to_string(),
            param_names: spec.param_names.iter().map(|s| s.to_string()).collect(),
            result: FitResult {
                residual: fit_residual,
                ..result
            },
            in_bounds,
            anchors: anchor_rows,
        });
    }
    params.validate()?;
    Ok(CalibrationOutcome { params, reports })
}

impl CalibrationOutcome {
    /// CSV residual report: one row per anchor, grouped by problem.
    pub fn residual_report_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("problem,provenance,observed,predicted,tolerance,residual,verify_only,converged,in_bounds\n");
        for r in &self.reports {
            for a in &r.anchors {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.problem_id,
                    a.provenance.replace(',', ";"),
                    crate::trace::format_sig(a.observed),
                    crate::trace::format_sig(a.predicted),
                    crate::trace::format_sig(a.tolerance),
                    crate::trace::format_sig(a.residual),
                    a.verify_only,
                    r.result.converged,
                    r.in_bounds,
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn thermal_round_trip_recovers_planted_params() {
        // synthetic anchors from known params; init perturbed 10 %
        let planted = [1.9, 1.21];
        let mut base = CalibratedParams::default();
        apply_params("thermal", &mut base, &planted);
        let mk = |v: f64| Anchor {
            model_id: "thermal".to_string(),
            input: json!({ "v": v }),
            observed: predict("thermal", &base, &Anchor {
                model_id: "thermal".to_string(),
                input: json!({ "v": v }),
                observed: 0.0,
                tolerance: 1.0,
                provenance: "synthetic".to_string(),
            })
            .unwrap(),
            tolerance: 0.25,
            provenance: "synthetic".to_string(),
        };
        let anchors = AnchorSet {
            anchors: vec![mk(2.0), mk(4.0), mk(6.0)],
        };
        let init = [planted[0] * 1.1, planted[1] * 1.1];
        let bounds = [(0.01, 50.0), (0.2, 4.0)];
        let fitted = fit("thermal", &anchors, &init, &bounds, &CalibratedParams::default()).unwrap();
        assert!(fitted.converged);
        for (got, want) in fitted.params.iter().zip(&planted) {
            assert!(
                ((got - want) / want).abs() < 1e-6,
                "recovered {got} expected {want}"
            );
        }
    }

    #[test]
    fn release_rate_fit_matches_closed_form() {
        let anchors = AnchorSet {
            anchors: vec![Anchor {
                model_id: "release_ca_rate".to_string(),
                input: json!({ "kind": "fraction", "hours": 24.0 }),
                observed: 0.67,
                tolerance: 0.01,
                provenance: "cumulative release assay".to_string(),
            }],
        };
        let fitted = fit(
            "release_ca_rate",
            &anchors,
            &[0.1],
            &[(1e-4, 2.0)],
            &CalibratedParams::default(),
        )
        .unwrap();
        let closed_form = -(0.33f64.ln()) / 24.0;
        assert!(
            (fitted.params[0] - closed_form).abs() < 5e-4,
            "k = {} vs {closed_form}",
            fitted.params[0]
        );
        // grid oracle within one cell of the closed-form constant
        let oracle = fit_grid_oracle(
            "release_ca_rate",
            &anchors,
            &[(1e-4, 2.0)],
            1024,
            &CalibratedParams::default(),
        )
        .unwrap();
        let cell = (2.0 - 1e-4) / 1023.0;
        assert!((oracle.params[0] - closed_form).abs() <= cell);
        assert!(fitted.residual <= oracle.residual + 1e-6);
    }

    #[test]
    fn thermal_objective_small_at_closed_form_point() {
        // the two heater anchors evaluated at the rounded closed-form solve
        let anchors = vec![
            Anchor {
                model_id: "thermal".to_string(),
                input: json!({ "v": 3.0 }),
                observed: 27.0,
                tolerance: 0.5,
                provenance: "heater map".to_string(),
            },
            Anchor {
                model_id: "thermal".to_string(),
                input: json!({ "v": 5.8 }),
                observed: 37.0,
                tolerance: 0.5,
                provenance: "heater map".to_string(),
            },
        ];
        let rows: Vec<&Anchor> = anchors.iter().collect();
        let base = CalibratedParams::default();
        let bounds = [(0.01, 50.0), (0.2, 4.0)];
        let obj = |x: &[f64]| {
            super::super::objective(x, &rows, &bounds, |x, a| {
                let mut scratch = base.clone();
                apply_params("thermal", &mut scratch, x);
                predict("thermal", &scratch, a)
            })
        };
        // closed-form two-anchor solve as the oracle, by direct substitution
        let b = (17.0f64 / 7.0).ln() / (5.8f64 / 3.0).ln();
        let a = 7.0 / 3.0f64.powf(b);
        assert!(obj(&[a, b]) < 1e-4);
        assert!((a - 1.594).abs() < 2e-3 && (b - 1.346).abs() < 1e-4);
        // local minimum: perturbing either parameter strictly increases it
        let opt = [base.thermal.power_coefficient, base.thermal.power_exponent];
        let at_opt = obj(&opt);
        for (dim, eps) in [(0usize, 1e-3), (1, 1e-3)] {
            for sign in [-1.0, 1.0] {
                let mut p = opt;
                p[dim] += sign * eps;
                assert!(obj(&p) > at_opt, "perturbing dim {dim} by {sign}{eps} did not increase");
            }
        }
    }

    #[test]
    fn problem_dimensions_within_oracle_support() {
        for spec in problem_specs() {
            assert!(spec.dimension() <= 4, "{} too wide", spec.id);
            assert_eq!(spec.bounds.len(), spec.dimension());
            assert_eq!(spec.init.len(), spec.dimension());
        }
    }
}
