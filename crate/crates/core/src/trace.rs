//! Simulation trace: a uniform time grid of every observable, the ordered
//! event log, and byte-stable CSV serialization (9 significant digits, LF
//! line endings, a config-digest header comment).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Trace CSV column names, in the serialized order.
pub const TRACE_COLUMNS: [&str; 15] = [
    "t_s",
    "tvbn_mg100g",
    "nh3_ppm",
    "r_sensor_ohm",
    "f_res_mhz",
    "gain_db",
    "v_harvest_v",
    "temp_mat_c",
    "gate_open",
    "ca_released_frac",
    "eg_released_frac",
    "ca_headspace_ppm",
    "eg_headspace_ppm",
    "butanone_ppm",
    "methylbutanol_ppm",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub tvbn_mg100g: f64,
    pub nh3_ppm: f64,
    pub r_sensor_ohm: f64,
    pub f_res_mhz: f64,
    pub gain_db: f64,
    pub v_harvest_v: f64,
    pub temp_mat_c: f64,
    pub gate_open: bool,
    pub ca_released_frac: f64,
    pub eg_released_frac: f64,
    pub ca_headspace_ppm: f64,
    pub eg_headspace_ppm: f64,
    pub butanone_ppm: f64,
    pub methylbutanol_ppm: f64,
}

impl TraceRow {
    pub fn column(&self, name: &str) -> Option<f64> {
        Some(match name {
            "t_s" => self.t_s,
            "tvbn_mg100g" => self.tvbn_mg100g,
            "nh3_ppm" => self.nh3_ppm,
            "r_sensor_ohm" => self.r_sensor_ohm,
            "f_res_mhz" => self.f_res_mhz,
            "gain_db" => self.gain_db,
            "v_harvest_v" => self.v_harvest_v,
            "temp_mat_c" => self.temp_mat_c,
            "gate_open" => f64::from(u8::from(self.gate_open)),
            "ca_released_frac" => self.ca_released_frac,
            "eg_released_frac" => self.eg_released_frac,
            "ca_headspace_ppm" => self.ca_headspace_ppm,
            "eg_headspace_ppm" => self.eg_headspace_ppm,
            "butanone_ppm" => self.butanone_ppm,
            "methylbutanol_ppm" => self.methylbutanol_ppm,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Nh3CrossedThreshold,
    GateOpened,
    GateClosed,
    TvbnLimitExceeded,
    ExtrapolationWarning,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Nh3CrossedThreshold => "NH3_CROSSED_THRESHOLD",
            EventKind::GateOpened => "GATE_OPENED",
            EventKind::GateClosed => "GATE_CLOSED",
            EventKind::TvbnLimitExceeded => "TVBN_LIMIT_EXCEEDED",
            EventKind::ExtrapolationWarning => "EXTRAPOLATION_WARNING",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    /// Event time, hours; threshold crossings are linearly interpolated.
    pub t_h: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub scenario_name: String,
    pub config_digest: String,
    pub dt_s: f64,
    pub trigger_threshold_ppm: f64,
    pub tvbn_limit: f64,
    pub rows: Vec<TraceRow>,
    /// Validation-time extrapolation warnings (t = 0).
    pub warnings: Vec<Event>,
    /// Full ordered event log, warnings included.
    pub events: Vec<Event>,
}

/// Fixed 9-significant-digit float formatting used for all CSV output.
pub fn format_sig(x: f64) -> String {
    format!("{x:.8e}")
}

impl SimulationTrace {
    pub fn duration_h(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t_s / 3600.0)
    }

    /// Row nearest to `t_h` hours.
    pub fn row_at_hours(&self, t_h: f64) -> Option<&TraceRow> {
        let idx = (t_h * 3600.0 / self.dt_s).round() as usize;
        self.rows.get(idx.min(self.rows.len().saturating_sub(1)))
    }

    pub fn header_comment(&self) -> String {
        format!(
            "# scenario: {} sha256:{} dt_s:{}",
            self.scenario_name,
            self.config_digest,
            format_sig(self.dt_s)
        )
    }

    /// Byte-stable trace CSV: header comment, column header, one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 220 + 256);
        out.push_str(&self.header_comment());
        out.push('\n');
        out.push_str(&TRACE_COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                format_sig(r.t_s),
                format_sig(r.tvbn_mg100g),
                format_sig(r.nh3_ppm),
                format_sig(r.r_sensor_ohm),
                format_sig(r.f_res_mhz),
                format_sig(r.gain_db),
                format_sig(r.v_harvest_v),
                format_sig(r.temp_mat_c),
                u8::from(r.gate_open),
                format_sig(r.ca_released_frac),
                format_sig(r.eg_released_frac),
                format_sig(r.ca_headspace_ppm),
                format_sig(r.eg_headspace_ppm),
                format_sig(r.butanone_ppm),
                format_sig(r.methylbutanol_ppm),
            );
        }
        out
    }

    /// Event-log CSV with the same header comment.
    pub fn events_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header_comment());
        out.push('\n');
        out.push_str("kind,t_h,detail\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{}",
                e.kind.as_str(),
                format_sig(e.t_h),
                e.detail.replace(',', ";")
            );
        }
        out
    }

    /// Parses a trace CSV produced by `to_csv`.
    pub fn rows_from_csv(text: &str) -> Result<Vec<TraceRow>> {
        let mut rows = Vec::new();
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty trace csv".to_string()))?;
        if header != TRACE_COLUMNS.join(",") {
            return Err(Error::invalid(format!("unexpected trace header: {header}")));
        }
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != TRACE_COLUMNS.len() {
                return Err(Error::invalid(format!("row {i}: expected 15 fields")));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("row {i}: bad number `{s}`")))
            };
            rows.push(TraceRow {
                t_s: num(f[0])?,
                tvbn_mg100g: num(f[1])?,
                nh3_ppm: num(f[2])?,
                r_sensor_ohm: num(f[3])?,
                f_res_mhz: num(f[4])?,
                gain_db: num(f[5])?,
                v_harvest_v: num(f[6])?,
                temp_mat_c: num(f[7])?,
                gate_open: f[8] == "1",
                ca_released_frac: num(f[9])?,
                eg_released_frac: num(f[10])?,
                ca_headspace_ppm: num(f[11])?,
                eg_headspace_ppm: num(f[12])?,
                butanone_ppm: num(f[13])?,
                methylbutanol_ppm: num(f[14])?,
            });
        }
        Ok(rows)
    }
}
