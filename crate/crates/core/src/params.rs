//! Calibrated model parameters: the frozen defaults every scenario starts
//! from, their JSON (de)serialization, and the environment-variable override
//! used by the CLI.
//!
//! The defaults below are the output of the bundled calibration pipeline
//! (`calibrate::calibrate_all` on `anchors/paper_anchors.csv`), frozen so the
//! library works without data files. A test asserts pipeline output and
//! frozen values agree.

use crate::error::{Error, Result};
use crate::release::{CompoundParams, ReleaseParams};
use crate::rf_link::{EnvShiftTables, PiecewiseTable, RfLinkModel};
use crate::sensor::SensorModel;
use crate::spoilage::SpoilageParams;
use crate::thermal::ThermalParams;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Environment variable that overrides the calibrated-parameter file path.
pub const PARAMS_ENV_VAR: &str = "SMARTPACK_PARAMS";

/// Assumed coil inductance, H (reporting only; capacitance is back-solved).
pub const ASSUMED_INDUCTANCE_H: f64 = 2.5e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibratedParams {
    pub sensor: SensorModel,
    pub rf: RfLinkModel,
    pub thermal: ThermalParams,
    pub release: ReleaseParams,
    pub spoilage: SpoilageParams,
}

impl Default for CalibratedParams {
    fn default() -> Self {
        let f_nominal_hz = 14.0e6;
        let capacitance = 1.0
            / ((2.0 * std::f64::consts::PI * f_nominal_hz).powi(2) * ASSUMED_INDUCTANCE_H);
        CalibratedParams {
            sensor: SensorModel {
                r_baseline: 900.0,
                r_saturated: 1800.0,
                nh3_linear_max: 90.0,
                transient_response_max: 0.13,
                sens_ch4: 0.05 / 500.0,
                sens_co2: 0.035 / 7500.0,
                passivation_factor: 1.0,
                bend_cycles: 0,
                bend_loss_at_5000: 0.05,
            },
            rf: RfLinkModel {
                inductance: ASSUMED_INDUCTANCE_H,
                capacitance,
                trace_resistance: 0.3,
                carrier_freq: 13.56,
                f_res_nominal: 14.0,
                bandwidth: 3.0,
                load_pull_mhz: 0.4,
                gain_unloaded: 0.4,
                gain_fullscale: -5.654302222222214,
                v_peak: 5.8,
                knee_mid_ohm: 1299.778554215609,
                knee_width_ohm: 3.209690792953575,
                coupling_table: vec![
                    ("inner_edge_5cm".to_string(), 1.0),
                    ("center".to_string(), 0.85),
                    ("outer_edge_10cm".to_string(), 0.60),
                    ("outside_field".to_string(), 0.0),
                ],
                env_shift_tables: EnvShiftTables {
                    strain_freq: PiecewiseTable::new(vec![(0.0, 0.0), (40.0, -2.0)]),
                    strain_trace_ohm: PiecewiseTable::new(vec![(0.0, 0.3), (40.0, 2.2)]),
                    bend_freq: PiecewiseTable::new(vec![(0.0, 0.0), (5000.0, 1.5)]),
                    temp_freq: PiecewiseTable::new(vec![(5.0, 0.9), (25.0, 0.0)]),
                    humidity_freq: PiecewiseTable::new(vec![(20.0, 0.0), (80.0, 1.5)]),
                    electrode_ohm: PiecewiseTable::new(vec![(0.0, 3.0), (40.0, 8.0)]),
                },
            },
            thermal: ThermalParams {
                heater_resistance: 50.0,
                series_electrode_resistance: 3.0,
                power_exponent: 1.3459371683701769,
                power_coefficient: 1.5955955244433169,
                time_constant: 60.0,
                ambient_c: 20.0,
            },
            release: ReleaseParams {
                lcst_c: 32.0,
                ca: CompoundParams {
                    total_load: 1.0,
                    rate_constant: 0.046194276021733795,
                    headspace_yield: 2905.0674192748547,
                    headspace_loss: 0.3226126673061654,
                },
                eg: CompoundParams {
                    total_load: 1.0,
                    rate_constant: 0.25,
                    headspace_yield: 130.57077459863126,
                    headspace_loss: 0.07220325353308087,
                },
            },
            spoilage: SpoilageParams {
                tvbn_initial: 1.3,
                growth_rate_rt: 0.4812879857922479,
                q10: 2.9432461136546966,
                tvbn_cap: 25.208070118363473,
                nh3_per_tvbn: 60.0 / 23.7,
                inhibition_halfdose: 25.0,
                marker_yield_butanone: 620.73813578709,
                marker_decay_butanone: 2.0,
                marker_yield_methylbutanol: 16.615372762084007,
                marker_decay_methylbutanol: 0.1,
            },
        }
    }
}

impl CalibratedParams {
    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.rf.validate()?;
        self.thermal.validate()?;
        self.release.validate()?;
        self.spoilage.validate()?;
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let params: CalibratedParams = serde_json::from_str(json)
            .map_err(|e| Error::config("params", e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_pretty() + "\n")?;
        Ok(())
    }

    /// Default parameters, overridden by the `SMARTPACK_PARAMS` file when the
    /// variable is set, then by `explicit` when given.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(path) = explicit {
            return Self::load(path);
        }
        if let Ok(path) = std::env::var(PARAMS_ENV_VAR) {
            if !path.is_empty() {
                return Self::load(Path::new(&path));
            }
        }
        Ok(Self::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        CalibratedParams::default().validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let p = CalibratedParams::default();
        let back = CalibratedParams::from_json(&p.to_json_pretty()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn unknown_field_rejected() {
        let mut v: serde_json::Value =
            serde_json::from_str(&CalibratedParams::default().to_json_pretty()).unwrap();
        v["typo_field"] = serde_json::json!(1.0);
        assert!(CalibratedParams::from_json(&v.to_string()).is_err());
    }
}
