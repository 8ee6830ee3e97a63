//! Joule heating of the PEDOT:PSS mat: a calibrated power law maps harvested
//! voltage to steady-state temperature, with first-order relaxation toward it.
//!
//! The steady state is `ambient + a * v^b`; the exponent is calibrated from
//! the two characterized voltage/temperature pairs rather than fixed at the
//! Ohmic value of 2, which those pairs contradict. Series electrode
//! resistance under strain derates delivered power relative to the
//! calibration condition (3 Ohm electrodes at rest).

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use serde::{Deserialize, Serialize};

/// Electrode resistance at the calibration condition, Ohm.
pub const ELECTRODE_REST_OHM: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    /// Heater resistance, Ohm (documented constant; not characterized).
    pub heater_resistance: f64,
    /// Series electrode resistance in the supply path, Ohm.
    pub series_electrode_resistance: f64,
    /// Exponent of the voltage-to-temperature power law.
    pub power_exponent: f64,
    /// Coefficient of the power law, deg C per V^exponent.
    pub power_coefficient: f64,
    /// First-order thermal time constant, s.
    pub time_constant: f64,
    /// Ambient temperature, deg C.
    pub ambient_c: f64,
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive(self.heater_resistance, "heater_resistance")?;
        ensure_positive(self.time_constant, "time_constant")?;
        ensure_positive(self.power_coefficient, "power_coefficient")?;
        if self.series_electrode_resistance < 0.0 {
            return Err(Error::invalid("series_electrode_resistance must be >= 0".to_string()));
        }
        Ok(())
    }

    /// Power-coefficient derating from electrode resistance relative to the
    /// calibration condition; 1.0 at rest.
    fn electrode_derating(&self) -> f64 {
        let ratio = (self.heater_resistance + ELECTRODE_REST_OHM)
            / (self.heater_resistance + self.series_electrode_resistance);
        ratio.powf(self.power_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub mat_temp_c: f64,
}

/// Steady-state mat temperature (deg C) for a sustained harvested voltage.
pub fn steady_state_temp(v: f64, params: &ThermalParams) -> Result<f64> {
    ensure_finite(v, "v")?;
    if v < 0.0 {
        return Err(Error::invalid(format!("v must be >= 0, got {v}")));
    }
    let coeff = params.power_coefficient * params.electrode_derating();
    Ok(params.ambient_c + coeff * v.powf(params.power_exponent))
}

/// First-order relaxation toward the steady state:
/// `T += dt/tau * (T_ss(v) - T)`. Never overshoots for dt <= tau.
pub fn step_thermal(
    state: &ThermalState,
    v: f64,
    dt_s: f64,
    params: &ThermalParams,
) -> Result<ThermalState> {
    ensure_finite(dt_s, "dt")?;
    if dt_s <= 0.0 {
        return Err(Error::invalid(format!("dt must be > 0, got {dt_s}")));
    }
    let t_ss = steady_state_temp(v, params)?;
    Ok(ThermalState {
        mat_temp_c: state.mat_temp_c + dt_s / params.time_constant * (t_ss - state.mat_temp_c),
    })
}
