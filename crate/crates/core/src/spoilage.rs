//! Spoilage kinetics: TVB-N growth, headspace ammonia, and diagnostic VOC
//! markers, with saturating inhibition by released antimicrobials.
//!
//! TVB-N follows logistic growth with a Q10 temperature law. Headspace NH3 is
//! a linear map of TVB-N above its fresh baseline. Inhibition divides the
//! growth rate by `1 + dose/halfdose`, where dose is the accumulated
//! inhibitor exposure (ppm·h); the current concentration counts as one hour
//! of exposure so the rate is strictly decreasing in the inhibitor argument.

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use serde::{Deserialize, Serialize};

/// Exposure horizon (h) credited to the instantaneous inhibitor concentration.
const INSTANT_EXPOSURE_H: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpoilageParams {
    /// Fresh-food TVB-N baseline, mg per 100 g.
    pub tvbn_initial: f64,
    /// Logistic growth rate at the 20 °C reference, 1/h.
    pub growth_rate_rt: f64,
    /// Temperature factor per 10 °C.
    pub q10: f64,
    /// Logistic ceiling, mg per 100 g.
    pub tvbn_cap: f64,
    /// Headspace NH3 per unit TVB-N above baseline, ppm per (mg/100 g).
    pub nh3_per_tvbn: f64,
    /// Combined CA+EG exposure halving the growth rate, ppm·h.
    pub inhibition_halfdose: f64,
    /// 2-butanone yield per unit spoilage activity, ppm per (mg/100 g).
    pub marker_yield_butanone: f64,
    /// 2-butanone clearance, 1/h.
    pub marker_decay_butanone: f64,
    /// 3-methylbutanol yield per unit spoilage activity, ppm per (mg/100 g).
    pub marker_yield_methylbutanol: f64,
    /// 3-methylbutanol clearance, 1/h.
    pub marker_decay_methylbutanol: f64,
}

impl SpoilageParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("growth_rate_rt", self.growth_rate_rt),
            ("nh3_per_tvbn", self.nh3_per_tvbn),
            ("marker_yield_butanone", self.marker_yield_butanone),
            ("marker_decay_butanone", self.marker_decay_butanone),
            ("marker_yield_methylbutanol", self.marker_yield_methylbutanol),
            ("marker_decay_methylbutanol", self.marker_decay_methylbutanol),
            ("tvbn_initial", self.tvbn_initial),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.tvbn_cap.is_nan() || self.tvbn_cap <= self.tvbn_initial {
            return Err(Error::invalid(format!(
                "tvbn_cap ({}) must exceed tvbn_initial ({})",
                self.tvbn_cap, self.tvbn_initial
            )));
        }
        if self.q10.is_nan() || self.q10 < 1.0 {
            return Err(Error::invalid(format!("q10 must be >= 1, got {}", self.q10)));
        }
        ensure_positive(self.inhibition_halfdose, "inhibition_halfdose")?;
        Ok(())
    }
}

/// Instantaneous spoilage state of the packaged food.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpoilageState {
    /// TVB-N, mg per 100 g. Non-decreasing, bounded by `tvbn_cap`.
    pub tvbn: f64,
    /// Headspace ammonia, ppm.
    pub nh3: f64,
    /// 2-butanone marker, ppm.
    pub butanone: f64,
    /// 3-methylbutanol marker, ppm.
    pub methylbutanol: f64,
    /// Accumulated inhibitor exposure, ppm·h.
    pub cumulative_inhibitor_dose: f64,
}

impl SpoilageState {
    /// Fresh food at the TVB-N baseline, empty headspace.
    pub fn fresh(params: &SpoilageParams) -> Self {
        SpoilageState {
            tvbn: params.tvbn_initial,
            nh3: 0.0,
            butanone: 0.0,
            methylbutanol: 0.0,
            cumulative_inhibitor_dose: 0.0,
        }
    }
}

/// Logistic TVB-N growth rate (mg per 100 g per hour), Q10-scaled and divided
/// by the saturating inhibition term. Zero exactly at the logistic ceiling.
pub fn spoilage_rate(
    state: &SpoilageState,
    temp_c: f64,
    inhibitor_ppm: f64,
    params: &SpoilageParams,
) -> Result<f64> {
    ensure_finite(temp_c, "temp_c")?;
    ensure_finite(inhibitor_ppm, "inhibitor_ppm")?;
    ensure_finite(state.tvbn, "tvbn")?;
    if !(-5.0..=40.0).contains(&temp_c) {
        return Err(Error::invalid(format!(
            "temp_c {temp_c} outside supported range [-5, 40]"
        )));
    }
    if inhibitor_ppm < 0.0 {
        return Err(Error::invalid(format!(
            "inhibitor_ppm must be >= 0, got {inhibitor_ppm}"
        )));
    }
    let logistic = params.growth_rate_rt * state.tvbn * (1.0 - state.tvbn / params.tvbn_cap);
    let thermal = params.q10.powf((temp_c - 20.0) / 10.0);
    let dose = state.cumulative_inhibitor_dose + inhibitor_ppm * INSTANT_EXPOSURE_H;
    let inhibition = 1.0 + dose / params.inhibition_halfdose;
    Ok((logistic * thermal / inhibition).max(0.0))
}

/// Headspace NH3 (ppm) for a TVB-N level: linear above the fresh baseline,
/// clamped to zero below it.
pub fn nh3_from_tvbn(tvbn: f64, params: &SpoilageParams) -> Result<f64> {
    ensure_finite(tvbn, "tvbn")?;
    Ok(params.nh3_per_tvbn * (tvbn - params.tvbn_initial).max(0.0))
}

/// Advances the spoilage state by `dt` hours with explicit Euler: TVB-N via
/// `spoilage_rate`, NH3 via `nh3_from_tvbn`, markers by production-minus-decay
/// (production proportional to the inhibitor-suppressed rate), and the
/// cumulative inhibitor dose by `inhibitor_ppm * dt`.
pub fn step_spoilage(
    state: &SpoilageState,
    temp_c: f64,
    inhibitor_ppm: f64,
    dt: f64,
    params: &SpoilageParams,
) -> Result<SpoilageState> {
    ensure_finite(dt, "dt")?;
    if dt <= 0.0 {
        return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
    }
    let rate = spoilage_rate(state, temp_c, inhibitor_ppm, params)?;
    let tvbn = (state.tvbn + rate * dt).min(params.tvbn_cap);
    let butanone = (state.butanone
        + (params.marker_yield_butanone * rate - params.marker_decay_butanone * state.butanone)
            * dt)
        .max(0.0);
    let methylbutanol = (state.methylbutanol
        + (params.marker_yield_methylbutanol * rate
            - params.marker_decay_methylbutanol * state.methylbutanol)
            * dt)
        .max(0.0);
    Ok(SpoilageState {
        tvbn,
        nh3: nh3_from_tvbn(tvbn, params)?,
        butanone,
        methylbutanol,
        cumulative_inhibitor_dose: state.cumulative_inhibitor_dose + inhibitor_ppm * dt,
    })
}

/// Analytic logistic solution X(t) from the fresh baseline, no inhibition.
/// Reference curve for tests and calibration.
pub fn logistic_tvbn(t_h: f64, rate: f64, params: &SpoilageParams) -> f64 {
    let c = (params.tvbn_cap - params.tvbn_initial) / params.tvbn_initial;
    params.tvbn_cap / (1.0 + c * (-rate * t_h).exp())
}

/// Analytic time (h) at which the uninhibited logistic crosses `level`.
pub fn logistic_crossing_time(level: f64, rate: f64, params: &SpoilageParams) -> Option<f64> {
    if level <= params.tvbn_initial || level >= params.tvbn_cap {
        return None;
    }
    let c = (params.tvbn_cap - params.tvbn_initial) / params.tvbn_initial;
    Some((c * level / (params.tvbn_cap - level)).ln() / rate)
}
