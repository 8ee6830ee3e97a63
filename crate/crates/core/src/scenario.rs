//! Scenario configuration: the structured text file describing one run, its
//! resolution against calibrated defaults, validation with field-path
//! diagnostics, and the reproducibility digest.
//!
//! Config files are TOML. Unknown keys are errors (fail-closed) so typos in
//! physical parameters cannot silently fall back to defaults. Every field is
//! optional except `scenario.name` and `scenario.duration_h`; omitted device
//! and food fields resolve to the calibrated parameter set.

use crate::error::{Error, Result};
use crate::params::CalibratedParams;
use crate::rf_link::EnvCondition;
use crate::trace::{Event, EventKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub food: FoodSection,
    #[serde(default)]
    pub device: DeviceSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub duration_h: f64,
    pub dt_s: Option<f64>,
    pub smart_packaging_enabled: Option<bool>,
    /// Ablation: gate commanded by the concentration comparator instead of
    /// the analog voltage -> temperature chain.
    pub comparator_mode: Option<bool>,
    pub trigger_threshold_ppm: Option<f64>,
    pub tvbn_limit_mg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub ambient_c: Option<f64>,
    pub humidity_rh: Option<f64>,
    pub position: Option<String>,
    pub strain_pct: Option<f64>,
    pub bend_cycles: Option<f64>,
    pub ch4_ppm: Option<f64>,
    pub co2_ppm: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoodSection {
    pub present: Option<bool>,
    pub tvbn_initial: Option<f64>,
    pub growth_rate_rt: Option<f64>,
    pub q10: Option<f64>,
    pub tvbn_cap: Option<f64>,
    pub nh3_per_tvbn: Option<f64>,
    pub inhibition_halfdose: Option<f64>,
    pub marker_yield_butanone: Option<f64>,
    pub marker_decay_butanone: Option<f64>,
    pub marker_yield_methylbutanol: Option<f64>,
    pub marker_decay_methylbutanol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    #[serde(default)]
    pub sensor: SensorOverrides,
    #[serde(default)]
    pub rf: RfOverrides,
    #[serde(default)]
    pub thermal: ThermalOverrides,
    #[serde(default)]
    pub release: ReleaseOverrides,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorOverrides {
    pub r_baseline: Option<f64>,
    pub r_saturated: Option<f64>,
    pub nh3_linear_max: Option<f64>,
    pub transient_response_max: Option<f64>,
    pub sens_ch4: Option<f64>,
    pub sens_co2: Option<f64>,
    pub passivation_factor: Option<f64>,
    pub bend_cycles: Option<u32>,
    pub bend_loss_at_5000: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfOverrides {
    pub carrier_freq: Option<f64>,
    pub f_res_nominal: Option<f64>,
    pub bandwidth: Option<f64>,
    pub load_pull_mhz: Option<f64>,
    pub gain_unloaded: Option<f64>,
    pub gain_fullscale: Option<f64>,
    pub v_peak: Option<f64>,
    pub knee_mid_ohm: Option<f64>,
    pub knee_width_ohm: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalOverrides {
    pub heater_resistance: Option<f64>,
    pub power_exponent: Option<f64>,
    pub power_coefficient: Option<f64>,
    pub time_constant: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseOverrides {
    pub lcst_c: Option<f64>,
    pub ca_rate_constant: Option<f64>,
    pub ca_headspace_yield: Option<f64>,
    pub ca_headspace_loss: Option<f64>,
    pub eg_rate_constant: Option<f64>,
    pub eg_headspace_yield: Option<f64>,
    pub eg_headspace_loss: Option<f64>,
}

/// Fully resolved description of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub duration_h: f64,
    pub dt_s: f64,
    pub smart_packaging_enabled: bool,
    pub comparator_mode: bool,
    pub trigger_threshold_ppm: f64,
    pub tvbn_limit: f64,
    pub ambient_c: f64,
    pub humidity_rh: f64,
    pub position: String,
    pub strain_pct: f64,
    pub bend_cycles: f64,
    pub ch4_ppm: f64,
    pub co2_ppm: f64,
    pub food_present: bool,
    pub params: CalibratedParams,
}

macro_rules! apply {
    ($target:expr, $src:expr, [$($field:ident),* $(,)?]) => {
        $(if let Some(v) = $src.$field { $target.$field = v; })*
    };
}

impl ScenarioConfig {
    /// Parses a TOML scenario and resolves it against `defaults`.
    pub fn from_toml_str(text: &str, defaults: &CalibratedParams) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::config("scenario file", e.to_string()))?;
        Ok(Self::resolve(file, defaults))
    }

    pub fn from_toml_file(path: &std::path::Path, defaults: &CalibratedParams) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, defaults)
    }

    pub fn resolve(file: ScenarioFile, defaults: &CalibratedParams) -> Self {
        let mut params = defaults.clone();
        let s = file.scenario;
        let e = file.environment;
        let f = file.food;
        let d = file.device;

        apply!(params.spoilage, f, [
            tvbn_initial, growth_rate_rt, q10, tvbn_cap, nh3_per_tvbn, inhibition_halfdose,
            marker_yield_butanone, marker_decay_butanone,
            marker_yield_methylbutanol, marker_decay_methylbutanol,
        ]);
        apply!(params.sensor, d.sensor, [
            r_baseline, r_saturated, nh3_linear_max, transient_response_max,
            sens_ch4, sens_co2, passivation_factor, bend_cycles, bend_loss_at_5000,
        ]);
        apply!(params.rf, d.rf, [
            carrier_freq, f_res_nominal, bandwidth, load_pull_mhz,
            gain_unloaded, gain_fullscale, v_peak, knee_mid_ohm, knee_width_ohm,
        ]);
        apply!(params.thermal, d.thermal, [
            heater_resistance, power_exponent, power_coefficient, time_constant,
        ]);
        if let Some(v) = d.release.lcst_c {
            params.release.lcst_c = v;
        }
        if let Some(v) = d.release.ca_rate_constant {
            params.release.ca.rate_constant = v;
        }
        if let Some(v) = d.release.ca_headspace_yield {
            params.release.ca.headspace_yield = v;
        }
        if let Some(v) = d.release.ca_headspace_loss {
            params.release.ca.headspace_loss = v;
        }
        if let Some(v) = d.release.eg_rate_constant {
            params.release.eg.rate_constant = v;
        }
        if let Some(v) = d.release.eg_headspace_yield {
            params.release.eg.headspace_yield = v;
        }
        if let Some(v) = d.release.eg_headspace_loss {
            params.release.eg.headspace_loss = v;
        }

        let ambient_c = e.ambient_c.unwrap_or(20.0);
        params.thermal.ambient_c = ambient_c;
        let strain_pct = e.strain_pct.unwrap_or(0.0);
        params.thermal.series_electrode_resistance =
            params.rf.env_shift_tables.electrode_ohm.eval(strain_pct);
        // scenario-level bending wear reaches the sensor too, unless the
        // device section pinned its own cycle count
        let bend_cycles = e.bend_cycles.unwrap_or(0.0);
        if d.sensor.bend_cycles.is_none() {
            params.sensor.bend_cycles = bend_cycles.round().clamp(0.0, u32::MAX as f64) as u32;
        }

        ScenarioConfig {
            name: s.name,
            duration_h: s.duration_h,
            dt_s: s.dt_s.unwrap_or(10.0),
            smart_packaging_enabled: s.smart_packaging_enabled.unwrap_or(true),
            comparator_mode: s.comparator_mode.unwrap_or(false),
            trigger_threshold_ppm: s.trigger_threshold_ppm.unwrap_or(40.0),
            tvbn_limit: s.tvbn_limit_mg.unwrap_or(25.0),
            ambient_c,
            humidity_rh: e.humidity_rh.unwrap_or(20.0),
            position: e.position.unwrap_or_else(|| "inner_edge_5cm".to_string()),
            strain_pct,
            bend_cycles,
            ch4_ppm: e.ch4_ppm.unwrap_or(0.0),
            co2_ppm: e.co2_ppm.unwrap_or(0.0),
            food_present: f.present.unwrap_or(true),
            params,
        }
    }

    /// Antenna operating condition derived from the scenario environment.
    pub fn env_condition(&self) -> EnvCondition {
        EnvCondition {
            strain_pct: self.strain_pct,
            bend_cycles: self.bend_cycles,
            temp_c: self.ambient_c,
            humidity_rh: self.humidity_rh,
            position: self.position.clone(),
        }
    }

    /// Rejects invalid configurations; returns extrapolation warnings for
    /// conditions outside the characterized ranges.
    pub fn validate(&self) -> Result<Vec<Event>> {
        if self.duration_h.is_nan() || self.duration_h <= 0.0 {
            return Err(Error::config("scenario.duration_h", "must be > 0"));
        }
        if self.dt_s.is_nan() || self.dt_s <= 0.0 {
            return Err(Error::config("scenario.dt_s", "must be > 0"));
        }
        if self.dt_s > self.params.thermal.time_constant {
            return Err(Error::config(
                "scenario.dt_s",
                format!(
                    "dt_s {} exceeds the thermal time constant {} (explicit-Euler stability bound)",
                    self.dt_s, self.params.thermal.time_constant
                ),
            ));
        }
        if self.trigger_threshold_ppm.is_nan() || self.trigger_threshold_ppm <= 0.0 {
            return Err(Error::config("scenario.trigger_threshold_ppm", "must be > 0"));
        }
        if !(-5.0..=40.0).contains(&self.ambient_c) {
            return Err(Error::config(
                "environment.ambient_c",
                format!("{} outside the modeled range [-5, 40]", self.ambient_c),
            ));
        }
        for (path, v) in [
            ("environment.ch4_ppm", self.ch4_ppm),
            ("environment.co2_ppm", self.co2_ppm),
            ("environment.strain_pct", self.strain_pct),
            ("environment.bend_cycles", self.bend_cycles),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(path, format!("must be >= 0, got {v}")));
            }
        }
        if (self.params.thermal.ambient_c - self.ambient_c).abs() > 1e-9 {
            return Err(Error::config(
                "environment.ambient_c",
                format!(
                    "scenario ambient {} disagrees with the thermal model ambient {}",
                    self.ambient_c, self.params.thermal.ambient_c
                ),
            ));
        }
        self.params
            .validate()
            .map_err(|e| Error::config("device", e.to_string()))?;

        let env = self.env_condition();
        let warnings = self
            .params
            .rf
            .extrapolation_flags(&env)
            .into_iter()
            .map(|detail| Event {
                kind: EventKind::ExtrapolationWarning,
                t_h: 0.0,
                detail,
            })
            .collect();
        Ok(warnings)
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialization cannot fail");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}
