//! Closed-loop simulation engine: fixed-step, module-ordered evaluation of
//! spoilage -> sensor -> rf link -> thermal -> release, with the release
//! headspace fed back as the next step's spoilage inhibitor.
//!
//! Each step sees the current step's upstream outputs and the previous
//! step's inhibitor (Gauss-Seidel ordering). The run is a pure function of
//! its configuration: identical configs produce byte-identical serialized
//! traces. The designed trigger concentration is not an if-statement in the
//! loop: heating is continuous and the gate opens when the mat crosses the
//! LCST, which the calibration places just above the designed threshold. The
//! comparator ablation (gate commanded directly by the concentration
//! comparator) is available per scenario.

use crate::error::{Error, Result};
use crate::release::{self, ReleaseState};
use crate::rf_link;
use crate::scenario::ScenarioConfig;
use crate::sensor;
use crate::spoilage::{self, SpoilageState};
use crate::thermal::{self, ThermalState};
use crate::trace::{Event, EventKind, SimulationTrace, TraceRow, TRACE_COLUMNS};
use serde::Serialize;

/// Runs the scenario and returns the trace with its ordered event log.
pub fn simulate(config: &ScenarioConfig) -> Result<SimulationTrace> {
    let warnings = config.validate()?;
    let p = &config.params;
    let env = config.env_condition();
    let dt_h = config.dt_s / 3600.0;
    let steps = (config.duration_h * 3600.0 / config.dt_s).round() as usize;
    if steps == 0 {
        return Err(Error::config(
            "scenario.duration_h",
            "duration shorter than one timestep",
        ));
    }

    let mut food = if config.food_present {
        Some(SpoilageState::fresh(&p.spoilage))
    } else {
        None
    };
    let mut mat = ThermalState {
        mat_temp_c: config.ambient_c,
    };
    let mut rel = ReleaseState::sealed();
    let mut rows = Vec::with_capacity(steps + 1);

    let observe = |t_s: f64,
                   food: &Option<SpoilageState>,
                   mat: &ThermalState,
                   rel: &ReleaseState|
     -> Result<TraceRow> {
        let (nh3, tvbn, butanone, methylbutanol) = match food {
            Some(s) => (s.nh3, s.tvbn, s.butanone, s.methylbutanol),
            None => (0.0, 0.0, 0.0, 0.0),
        };
        let r_sensor = sensor::sensor_resistance(nh3, config.ch4_ppm, config.co2_ppm, &p.sensor)?;
        let f_res = rf_link::resonance_frequency(&p.rf, r_sensor, &env)?;
        let gain = rf_link::gain_db(&p.rf, r_sensor, &env)?;
        let v = rf_link::harvested_voltage(&p.rf, r_sensor, &env)?;
        Ok(TraceRow {
            t_s,
            tvbn_mg100g: tvbn,
            nh3_ppm: nh3,
            r_sensor_ohm: r_sensor,
            f_res_mhz: f_res,
            gain_db: gain,
            v_harvest_v: v,
            temp_mat_c: mat.mat_temp_c,
            gate_open: rel.gate_open,
            ca_released_frac: rel.ca_released_fraction,
            eg_released_frac: rel.eg_released_fraction,
            ca_headspace_ppm: rel.ca_headspace_ppm,
            eg_headspace_ppm: rel.eg_headspace_ppm,
            butanone_ppm: butanone,
            methylbutanol_ppm: methylbutanol,
        })
    };

    rows.push(observe(0.0, &food, &mat, &rel)?);

    for i in 0..steps {
        // previous step's release headspace drives this step's inhibition
        let inhibitor = rel.ca_headspace_ppm + rel.eg_headspace_ppm;

        if let Some(state) = food.take() {
            food = Some(spoilage::step_spoilage(
                &state,
                config.ambient_c,
                inhibitor,
                dt_h,
                &p.spoilage,
            )?);
        }
        let nh3 = food.as_ref().map_or(0.0, |s| s.nh3);

        let r_sensor = sensor::sensor_resistance(nh3, config.ch4_ppm, config.co2_ppm, &p.sensor)?;
        let v = rf_link::harvested_voltage(&p.rf, r_sensor, &env)?;
        mat = thermal::step_thermal(&mat, v, config.dt_s, &p.thermal)?;

        let gate = if !config.smart_packaging_enabled {
            false
        } else if config.comparator_mode {
            nh3 >= config.trigger_threshold_ppm
        } else {
            release::gate_open(mat.mat_temp_c, &p.release)?
        };
        rel = release::step_release(&rel, gate, dt_h, &p.release)?;

        rows.push(observe((i + 1) as f64 * config.dt_s, &food, &mat, &rel)?);
    }

    let mut trace = SimulationTrace {
        scenario_name: config.name.clone(),
        config_digest: config.digest(),
        dt_s: config.dt_s,
        trigger_threshold_ppm: config.trigger_threshold_ppm,
        tvbn_limit: config.tvbn_limit,
        rows,
        warnings,
        events: Vec::new(),
    };
    trace.events = detect_events(&trace, config);
    Ok(trace)
}

/// Derives the ordered event log from a completed trace. Threshold crossings
/// are located by sign change with linear interpolation of the crossing
/// time; gate transitions are reported at the step where they appear.
/// Idempotent: recomputing on the same trace yields the same log.
pub fn detect_events(trace: &SimulationTrace, config: &ScenarioConfig) -> Vec<Event> {
    let mut events: Vec<Event> = trace.warnings.clone();

    let crossing_times = |value: fn(&TraceRow) -> f64, threshold: f64| -> Vec<f64> {
        let mut out = Vec::new();
        for w in trace.rows.windows(2) {
            let (a, b) = (value(&w[0]), value(&w[1]));
            if a < threshold && b >= threshold {
                let frac = (threshold - a) / (b - a);
                out.push((w[0].t_s + frac * (w[1].t_s - w[0].t_s)) / 3600.0);
            }
        }
        out
    };

    for t in crossing_times(|r| r.nh3_ppm, config.trigger_threshold_ppm) {
        events.push(Event {
            kind: EventKind::Nh3CrossedThreshold,
            t_h: t,
            detail: format!("nh3 reached {} ppm", config.trigger_threshold_ppm),
        });
    }
    for t in crossing_times(|r| r.tvbn_mg100g, config.tvbn_limit) {
        events.push(Event {
            kind: EventKind::TvbnLimitExceeded,
            t_h: t,
            detail: format!("tvbn reached {} mg per 100 g", config.tvbn_limit),
        });
    }
    for w in trace.rows.windows(2) {
        if !w[0].gate_open && w[1].gate_open {
            events.push(Event {
                kind: EventKind::GateOpened,
                t_h: w[1].t_s / 3600.0,
                detail: "release gate opened".to_string(),
            });
        }
        if w[0].gate_open && !w[1].gate_open {
            events.push(Event {
                kind: EventKind::GateClosed,
                t_h: w[1].t_s / 3600.0,
                detail: "release gate closed".to_string(),
            });
        }
    }
    events.sort_by(|a, b| a.t_h.total_cmp(&b.t_h));
    events
}

/// Per-trace summary used by the comparison report.
#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub scenario_name: String,
    pub duration_h: f64,
    /// Interpolated time at which TVB-N crosses the trace's limit, if ever.
    pub time_to_limit_h: Option<f64>,
    pub nh3_crossed_at_h: Option<f64>,
    pub gate_opened_at_h: Option<f64>,
    pub final_tvbn: f64,
    pub final_ca_released: f64,
    pub final_eg_released: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ColumnDelta {
    pub column: String,
    /// Max |trace_i - trace_0| over the shared time-grid prefix.
    pub max_abs_delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub traces: Vec<TraceSummary>,
    /// Per-observable deltas of each non-reference trace against the first;
    /// empty for a single trace.
    pub deltas: Vec<Vec<ColumnDelta>>,
    /// `time_to_limit(last) - time_to_limit(first)`, with "never crossed"
    /// counted as the trace duration. Present when comparing >= 2 traces.
    pub shelf_life_extension_h: Option<f64>,
}

fn summarize(trace: &SimulationTrace) -> TraceSummary {
    let cross = |value: fn(&TraceRow) -> f64, threshold: f64| -> Option<f64> {
        trace.rows.windows(2).find_map(|w| {
            let (a, b) = (value(&w[0]), value(&w[1]));
            if a < threshold && b >= threshold {
                Some((w[0].t_s + (threshold - a) / (b - a) * (w[1].t_s - w[0].t_s)) / 3600.0)
            } else {
                None
            }
        })
    };
    let last = trace.rows.last().expect("trace has rows");
    TraceSummary {
        scenario_name: trace.scenario_name.clone(),
        duration_h: trace.duration_h(),
        time_to_limit_h: cross(|r| r.tvbn_mg100g, trace.tvbn_limit),
        nh3_crossed_at_h: cross(|r| r.nh3_ppm, trace.trigger_threshold_ppm),
        gate_opened_at_h: trace
            .rows
            .windows(2)
            .find(|w| !w[0].gate_open && w[1].gate_open)
            .map(|w| w[1].t_s / 3600.0),
        final_tvbn: last.tvbn_mg100g,
        final_ca_released: last.ca_released_frac,
        final_eg_released: last.eg_released_frac,
    }
}

/// Compares traces sharing a time grid: per-observable deltas against the
/// first trace over the common prefix, per-trace time-to-limit, and the
/// shelf-life extension of the last trace over the first.
pub fn compare(traces: &[&SimulationTrace]) -> Result<ComparisonReport> {
    if traces.is_empty() {
        return Err(Error::invalid("compare requires at least one trace".to_string()));
    }
    for t in traces {
        if (t.dt_s - traces[0].dt_s).abs() > 1e-12 {
            return Err(Error::GridMismatch(format!(
                "dt_s {} vs {}",
                t.dt_s, traces[0].dt_s
            )));
        }
    }
    let summaries: Vec<TraceSummary> = traces.iter().map(|t| summarize(t)).collect();

    let mut deltas = Vec::new();
    for t in traces.iter().skip(1) {
        let n = t.rows.len().min(traces[0].rows.len());
        let mut cols = Vec::new();
        for name in TRACE_COLUMNS.iter().skip(1) {
            let mut max_abs: f64 = 0.0;
            for i in 0..n {
                let a = traces[0].rows[i].column(name).unwrap();
                let b = t.rows[i].column(name).unwrap();
                max_abs = max_abs.max((b - a).abs());
            }
            cols.push(ColumnDelta {
                column: (*name).to_string(),
                max_abs_delta: max_abs,
            });
        }
        deltas.push(cols);
    }

    let shelf_life_extension_h = if traces.len() >= 2 {
        let first = &summaries[0];
        let last = &summaries[summaries.len() - 1];
        Some(
            last.time_to_limit_h.unwrap_or(last.duration_h)
                - first.time_to_limit_h.unwrap_or(first.duration_h),
        )
    } else {
        None
    };

    Ok(ComparisonReport {
        traces: summaries,
        deltas,
        shelf_life_extension_h,
    })
}

impl ComparisonReport {
    /// CSV form: summary rows, then delta rows per compared trace.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let fmt_opt = |v: Option<f64>| v.map_or("never".to_string(), crate::trace::format_sig);
        let mut out = String::new();
        out.push_str("section,name,time_to_limit_h,nh3_crossed_at_h,gate_opened_at_h,final_tvbn,final_ca_released,final_eg_released\n");
        for s in &self.traces {
            let _ = writeln!(
                out,
                "summary,{},{},{},{},{},{},{}",
                s.scenario_name,
                fmt_opt(s.time_to_limit_h),
                fmt_opt(s.nh3_crossed_at_h),
                fmt_opt(s.gate_opened_at_h),
                crate::trace::format_sig(s.final_tvbn),
                crate::trace::format_sig(s.final_ca_released),
                crate::trace::format_sig(s.final_eg_released),
            );
        }
        for (i, cols) in self.deltas.iter().enumerate() {
            for c in cols {
                let _ = writeln!(
                    out,
                    "delta_vs_first,{}:{},{},,,,,",
                    self.traces[i + 1].scenario_name,
                    c.column,
                    crate::trace::format_sig(c.max_abs_delta),
                );
            }
        }
        out
    }

    /// Human-readable shelf-life report.
    pub fn shelf_life_report(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for s in &self.traces {
            match s.time_to_limit_h {
                Some(t) => {
                    let _ = writeln!(out, "{}: TVB-N limit crossed at {:.2} h", s.scenario_name, t);
                }
                None => {
                    let _ = writeln!(
                        out,
                        "{}: TVB-N stayed below the limit through {:.1} h",
                        s.scenario_name, s.duration_h
                    );
                }
            }
        }
        if let Some(ext) = self.shelf_life_extension_h {
            let _ = writeln!(out, "shelf-life extension: {ext:.1} h");
        }
        out
    }
}
