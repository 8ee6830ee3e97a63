//! SWCNT chemiresistor model: cumulative resistance response to NH3 with
//! CH4/CO2 cross-sensitivity, PDMS passivation attenuation, and
//! bending-cycle degradation.
//!
//! Two response modes exist in the characterization data: a transient
//! (recovering) percent response used for selectivity, and a cumulative,
//! non-recovering resistance rise that loads the antenna in the integrated
//! system. `sensor_resistance` models the cumulative curve; `response_percent`
//! the transient one.

use crate::error::{ensure_finite, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gas {
    Nh3,
    Ch4,
    Co2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Fresh-sensor resistance, Ohm.
    pub r_baseline: f64,
    /// Resistance at NH3 saturation (cumulative mode), Ohm.
    pub r_saturated: f64,
    /// Upper end of the linear NH3 range, ppm; response clamps beyond it.
    pub nh3_linear_max: f64,
    /// Transient fractional response at `nh3_linear_max` (0.13 = 13 %).
    pub transient_response_max: f64,
    /// Transient fractional response per ppm CH4.
    pub sens_ch4: f64,
    /// Transient fractional response per ppm CO2.
    pub sens_co2: f64,
    /// Multiplicative NH3-sensitivity retention of the PDMS-passivated film,
    /// relative to the calibrated curve; in (0, 1].
    pub passivation_factor: f64,
    /// Accumulated bending cycles.
    pub bend_cycles: u32,
    /// Fractional NH3-sensitivity loss after 5000 bending cycles.
    pub bend_loss_at_5000: f64,
}

impl SensorModel {
    pub fn validate(&self) -> Result<()> {
        let ordered = self.r_baseline > 0.0 && self.r_saturated > self.r_baseline;
        if self.r_baseline.is_nan() || self.r_saturated.is_nan() || !ordered {
            return Err(Error::invalid(format!(
                "require r_saturated > r_baseline > 0, got {} / {}",
                self.r_saturated, self.r_baseline
            )));
        }
        if !(self.passivation_factor > 0.0 && self.passivation_factor <= 1.0) {
            return Err(Error::invalid(format!(
                "passivation_factor must be in (0, 1], got {}",
                self.passivation_factor
            )));
        }
        if !(0.0..1.0).contains(&self.bend_loss_at_5000) {
            return Err(Error::invalid(format!(
                "bend_loss_at_5000 must be in [0, 1), got {}",
                self.bend_loss_at_5000
            )));
        }
        crate::error::ensure_positive(self.nh3_linear_max, "nh3_linear_max")?;
        Ok(())
    }

    /// NH3-sensitivity retention from accumulated bending, linear in cycles
    /// up to 5000 and flat beyond.
    pub fn bend_retention(&self) -> f64 {
        1.0 - self.bend_loss_at_5000 * (f64::from(self.bend_cycles) / 5000.0).min(1.0)
    }

    /// Cumulative-mode fractional response per ppm NH3 at full sensitivity.
    fn cumulative_slope(&self) -> f64 {
        (self.r_saturated / self.r_baseline - 1.0) / self.nh3_linear_max
    }
}

fn check_conc(value: f64, name: &str) -> Result<f64> {
    ensure_finite(value, name)?;
    if value < 0.0 {
        return Err(Error::invalid(format!("{name} must be >= 0, got {value}")));
    }
    Ok(value)
}

/// Cumulative sensor resistance (Ohm) under a gas mixture. NH3 is clamped to
/// the linear range; its slope is scaled by passivation and bending retention.
pub fn sensor_resistance(nh3: f64, ch4: f64, co2: f64, model: &SensorModel) -> Result<f64> {
    check_conc(nh3, "nh3")?;
    check_conc(ch4, "ch4")?;
    check_conc(co2, "co2")?;
    let s_eff = model.cumulative_slope() * model.passivation_factor * model.bend_retention();
    let response =
        s_eff * nh3.min(model.nh3_linear_max) + model.sens_ch4 * ch4 + model.sens_co2 * co2;
    Ok(model.r_baseline * (1.0 + response))
}

/// Transient single-gas percent response 100 * (R(c) - R(0)) / R(0).
pub fn response_percent(gas: Gas, conc: f64, model: &SensorModel) -> Result<f64> {
    check_conc(conc, "conc")?;
    let frac = match gas {
        Gas::Nh3 => {
            let slope = model.transient_response_max / model.nh3_linear_max;
            slope * conc.min(model.nh3_linear_max)
                * model.passivation_factor
                * model.bend_retention()
        }
        Gas::Ch4 => model.sens_ch4 * conc,
        Gas::Co2 => model.sens_co2 * conc,
    };
    Ok(100.0 * frac)
}

/// Returns the model after `cycles` additional bending cycles. Baseline
/// resistance is unaffected; only NH3 sensitivity degrades.
pub fn degrade_by_bending(model: &SensorModel, cycles: u32) -> SensorModel {
    let mut out = model.clone();
    out.bend_cycles = model.bend_cycles.saturating_add(cycles);
    out
}
