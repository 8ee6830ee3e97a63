//! LCST-gated release of cinnamaldehyde (CA) and eugenol (EG) from the
//! thermoresponsive mat, with headspace bookkeeping.
//!
//! The gate is a sharp threshold at the LCST: below it the polymer stays
//! swelled and the closed-gate branch must not touch the release state at
//! all (zero leakage is bitwise, not epsilon). Above it, each compound
//! releases with first-order kinetics toward its total load.

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use serde::{Deserialize, Serialize};

/// Per-compound release parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundParams {
    /// Normalized total load; released_fraction approaches 1.
    pub total_load: f64,
    /// First-order release rate, 1/h.
    pub rate_constant: f64,
    /// Headspace concentration per unit released fraction, ppm.
    pub headspace_yield: f64,
    /// Headspace clearance, 1/h.
    pub headspace_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseParams {
    /// Gate threshold, deg C.
    pub lcst_c: f64,
    pub ca: CompoundParams,
    pub eg: CompoundParams,
}

impl ReleaseParams {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("ca", &self.ca), ("eg", &self.eg)] {
            ensure_positive(c.rate_constant, &format!("{name}.rate_constant"))?;
            ensure_positive(c.total_load, &format!("{name}.total_load"))?;
            if c.headspace_yield < 0.0 || c.headspace_loss < 0.0 {
                return Err(Error::invalid(format!("{name} headspace constants must be >= 0")));
            }
        }
        if !self.lcst_c.is_finite() {
            return Err(Error::invalid("lcst_c must be finite".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseState {
    pub ca_released_fraction: f64,
    pub eg_released_fraction: f64,
    pub ca_headspace_ppm: f64,
    pub eg_headspace_ppm: f64,
    pub gate_open: bool,
}

impl ReleaseState {
    pub fn sealed() -> Self {
        ReleaseState {
            ca_released_fraction: 0.0,
            eg_released_fraction: 0.0,
            ca_headspace_ppm: 0.0,
            eg_headspace_ppm: 0.0,
            gate_open: false,
        }
    }

    pub fn ca_remaining_fraction(&self) -> f64 {
        1.0 - self.ca_released_fraction
    }

    pub fn eg_remaining_fraction(&self) -> f64 {
        1.0 - self.eg_released_fraction
    }
}

/// True iff the mat temperature is at or above the LCST. Pure threshold,
/// boundary inclusive, no hysteresis.
pub fn gate_open(mat_temp_c: f64, params: &ReleaseParams) -> Result<bool> {
    ensure_finite(mat_temp_c, "mat_temp_c")?;
    Ok(mat_temp_c >= params.lcst_c)
}

/// Advances the release state by `dt` hours. With the gate closed the
/// released fractions are returned untouched (same bits); headspace still
/// clears at its loss rate. With the gate open, each fraction moves by
/// first-order kinetics and the headspace gains yield * delta.
pub fn step_release(
    state: &ReleaseState,
    gate: bool,
    dt: f64,
    params: &ReleaseParams,
) -> Result<ReleaseState> {
    ensure_finite(dt, "dt")?;
    if dt <= 0.0 {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    let mut next = state.clone();
    next.gate_open = gate;
    if gate {
        let d_ca = params.ca.rate_constant * (1.0 - state.ca_released_fraction) * dt;
        let d_eg = params.eg.rate_constant * (1.0 - state.eg_released_fraction) * dt;
        next.ca_released_fraction = state.ca_released_fraction + d_ca;
        next.eg_released_fraction = state.eg_released_fraction + d_eg;
        next.ca_headspace_ppm += params.ca.headspace_yield * d_ca;
        next.eg_headspace_ppm += params.eg.headspace_yield * d_eg;
    }
    next.ca_headspace_ppm -= params.ca.headspace_loss * next.ca_headspace_ppm * dt;
    next.eg_headspace_ppm -= params.eg.headspace_loss * next.eg_headspace_ppm * dt;
    Ok(next)
}

/// Current headspace concentrations (ca_ppm, eg_ppm).
pub fn headspace_concentrations(state: &ReleaseState) -> (f64, f64) {
    (state.ca_headspace_ppm, state.eg_headspace_ppm)
}
