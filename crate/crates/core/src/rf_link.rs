//! NFC power link: a 13.56 MHz resonant antenna loaded by the sensor
//! resistance, with environmental detuning, reflection-style gain, and
//! wirelessly harvested voltage.
//!
//! The sensor load pulls the resonance linearly from 14 MHz (fresh, 900 Ohm)
//! toward 13.6 MHz (saturated, 1800 Ohm). Environmental shifts (strain,
//! bending, temperature, humidity) add to the nominal resonance via
//! piecewise-linear tables whose knots are the characterized endpoints.
//! Harvested voltage factors into coupling x band match x load response:
//! the band match is a Lorentzian of the reported 3 MHz bandwidth applied to
//! environmental detuning, and the load response is a calibrated logistic
//! knee in the sensor resistance, reproducing the sub-threshold-flat /
//! steep-rise behavior of the integrated device.

use crate::error::{ensure_finite, Error, Result};
use serde::{Deserialize, Serialize};

/// Linear interpolation over sorted (x, y) knots; clamps outside the range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTable {
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Self {
        PiecewiseTable { knots }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if k.is_empty() {
            return 0.0;
        }
        if x <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        k[k.len() - 1].1
    }

    /// True when `x` falls outside the characterized knot range.
    pub fn extrapolates(&self, x: f64) -> bool {
        match (self.knots.first(), self.knots.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => x < lo || x > hi,
            _ => true,
        }
    }
}

/// Environmental operating condition of the antenna.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvCondition {
    /// Tensile strain, percent; characterized over [0, 40].
    pub strain_pct: f64,
    /// Accumulated bending cycles; characterized over [0, 5000].
    pub bend_cycles: f64,
    /// Antenna temperature, deg C; characterized over [5, 25].
    pub temp_c: f64,
    /// Relative humidity, percent; characterized over [20, 80].
    pub humidity_rh: f64,
    /// Position descriptor inside the powering coil fixture.
    pub position: String,
}

impl EnvCondition {
    /// Characterization-baseline condition: at rest, 25 deg C, 20 %RH,
    /// optimal position.
    pub fn neutral() -> Self {
        EnvCondition {
            strain_pct: 0.0,
            bend_cycles: 0.0,
            temp_c: 25.0,
            humidity_rh: 20.0,
            position: "inner_edge_5cm".to_string(),
        }
    }
}

/// Resonance-shift and series-resistance tables, knotted at the
/// characterized endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvShiftTables {
    /// strain % -> resonance shift, MHz.
    pub strain_freq: PiecewiseTable,
    /// strain % -> antenna trace resistance, Ohm.
    pub strain_trace_ohm: PiecewiseTable,
    /// bending cycles -> resonance shift, MHz.
    pub bend_freq: PiecewiseTable,
    /// temperature deg C -> resonance shift, MHz.
    pub temp_freq: PiecewiseTable,
    /// relative humidity % -> resonance shift, MHz.
    pub humidity_freq: PiecewiseTable,
    /// strain % -> harvest electrode resistance, Ohm.
    pub electrode_ohm: PiecewiseTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfLinkModel {
    /// Coil inductance, H (assumed constant; reporting only).
    pub inductance: f64,
    /// Tank capacitance, F; back-solved from the nominal resonance.
    pub capacitance: f64,
    /// Antenna trace resistance at rest, Ohm.
    pub trace_resistance: f64,
    /// Reader carrier, MHz.
    pub carrier_freq: f64,
    /// Unloaded resonance at the neutral condition, MHz.
    pub f_res_nominal: f64,
    /// Resonance bandwidth, MHz.
    pub bandwidth: f64,
    /// Load pull from fresh to saturated sensor, MHz.
    pub load_pull_mhz: f64,
    /// Gain at the fresh operating point, dB.
    pub gain_unloaded: f64,
    /// Gain depth at perfect match, dB.
    pub gain_fullscale: f64,
    /// Peak harvestable voltage at optimal coupling, V.
    pub v_peak: f64,
    /// Center of the load-response knee, Ohm.
    pub knee_mid_ohm: f64,
    /// Width of the load-response knee, Ohm.
    pub knee_width_ohm: f64,
    /// (position descriptor, coupling factor in [0, 1]).
    pub coupling_table: Vec<(String, f64)>,
    pub env_shift_tables: EnvShiftTables,
}

impl RfLinkModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.inductance > 0.0 && self.capacitance > 0.0) {
            return Err(Error::invalid("inductance and capacitance must be > 0".to_string()));
        }
        let f_lc = 1.0 / (2.0 * std::f64::consts::PI * (self.inductance * self.capacitance).sqrt())
            / 1e6;
        if (f_lc - self.f_res_nominal).abs() > 0.01 * self.f_res_nominal {
            return Err(Error::invalid(format!(
                "f_res_nominal {} MHz inconsistent with 1/(2*pi*sqrt(LC)) = {f_lc} MHz",
                self.f_res_nominal
            )));
        }
        for (name, c) in &self.coupling_table {
            if !(0.0..=1.0).contains(c) {
                return Err(Error::invalid(format!(
                    "coupling factor for `{name}` must be in [0, 1], got {c}"
                )));
            }
        }
        if !(self.knee_width_ohm > 0.0 && self.bandwidth > 0.0 && self.v_peak >= 0.0) {
            return Err(Error::invalid("knee width, bandwidth, v_peak must be positive".to_string()));
        }
        Ok(())
    }

    /// Additive environmental resonance shift, MHz.
    pub fn env_shift_mhz(&self, env: &EnvCondition) -> f64 {
        let t = &self.env_shift_tables;
        t.strain_freq.eval(env.strain_pct)
            + t.bend_freq.eval(env.bend_cycles)
            + t.temp_freq.eval(env.temp_c)
            + t.humidity_freq.eval(env.humidity_rh)
    }

    /// Descriptors for which the condition falls outside the characterized
    /// ranges (extrapolation is clamped, not rejected).
    pub fn extrapolation_flags(&self, env: &EnvCondition) -> Vec<String> {
        let t = &self.env_shift_tables;
        let mut flags = Vec::new();
        if t.strain_freq.extrapolates(env.strain_pct) {
            flags.push(format!("strain {} % outside [0, 40]", env.strain_pct));
        }
        if t.bend_freq.extrapolates(env.bend_cycles) {
            flags.push(format!("bend_cycles {} outside [0, 5000]", env.bend_cycles));
        }
        if t.temp_freq.extrapolates(env.temp_c) {
            flags.push(format!("temperature {} C outside [5, 25]", env.temp_c));
        }
        if t.humidity_freq.extrapolates(env.humidity_rh) {
            flags.push(format!("humidity {} %RH outside [20, 80]", env.humidity_rh));
        }
        if self.lookup_coupling(&env.position).1 {
            flags.push(format!("position `{}` not in coupling table", env.position));
        }
        flags
    }

    /// Coupling factor for a position descriptor. Unknown descriptors fall
    /// back to the nearest table entry by edit distance (ties: table order);
    /// the bool reports that fallback so callers can flag it.
    pub fn lookup_coupling(&self, position: &str) -> (f64, bool) {
        if let Some((_, c)) = self
            .coupling_table
            .iter()
            .find(|(name, _)| name.eq_ignore_ascii_case(position))
        {
            return (*c, false);
        }
        let nearest = self
            .coupling_table
            .iter()
            .min_by_key(|(name, _)| levenshtein(name, position))
            .map(|(_, c)| *c)
            .unwrap_or(0.0);
        (nearest, true)
    }

    fn band_match(&self, f_env: f64) -> f64 {
        let half_bw = self.bandwidth / 2.0;
        let d = (f_env - self.f_res_nominal) / half_bw;
        1.0 / (1.0 + d * d)
    }

    fn load_response(&self, r_load: f64) -> f64 {
        let x = (r_load - self.knee_mid_ohm) / self.knee_width_ohm;
        1.0 / (1.0 + (-x).exp())
    }
}

fn check_load(r_load: f64) -> Result<f64> {
    ensure_finite(r_load, "r_load")?;
    if r_load <= 0.0 {
        return Err(Error::invalid(format!("r_load must be > 0, got {r_load}")));
    }
    Ok(r_load)
}

/// Loaded resonance frequency (MHz): nominal, plus additive environmental
/// shifts, minus the linear load pull.
pub fn resonance_frequency(model: &RfLinkModel, r_load: f64, env: &EnvCondition) -> Result<f64> {
    check_load(r_load)?;
    let f_env = model.f_res_nominal + model.env_shift_mhz(env);
    Ok(f_env - model.load_pull_mhz * (r_load - 900.0) / 900.0)
}

/// Reflection-style gain (dB) at the carrier: an affine map of a Lorentzian
/// of |f_res - carrier|, calibrated to the fresh and saturated endpoints.
/// Lower (more negative) gain means better matching.
pub fn gain_db(model: &RfLinkModel, r_load: f64, env: &EnvCondition) -> Result<f64> {
    let f_res = resonance_frequency(model, r_load, env)?;
    let half_bw = model.bandwidth / 2.0;
    let lor = |d: f64| 1.0 / (1.0 + (d / half_bw) * (d / half_bw));
    // The two calibrated gains sit at the fresh (900 Ohm) and fully loaded
    // (900 + pull) neutral points.
    let d_fresh = (model.f_res_nominal - model.carrier_freq).abs();
    let l_fresh = lor(d_fresh);
    let b = (model.gain_unloaded - model.gain_fullscale) / (l_fresh - 1.0);
    let a = model.gain_fullscale - b;
    Ok(a + b * lor((f_res - model.carrier_freq).abs()))
}

/// Wirelessly harvested voltage (V):
/// `v_peak * coupling(position) * band_match(f_env) * load_response(r_load)`.
pub fn harvested_voltage(model: &RfLinkModel, r_load: f64, env: &EnvCondition) -> Result<f64> {
    check_load(r_load)?;
    let (coupling, _fallback) = model.lookup_coupling(&env.position);
    let f_env = model.f_res_nominal + model.env_shift_mhz(env);
    Ok(model.v_peak * coupling * model.band_match(f_env) * model.load_response(r_load))
}

/// Harvest-electrode series resistance (Ohm) under strain; piecewise linear
/// between the characterized endpoints, clamped outside [0, 40] %.
pub fn electrode_resistance(model: &RfLinkModel, strain_pct: f64) -> f64 {
    model.env_shift_tables.electrode_ohm.eval(strain_pct)
}

/// Antenna trace resistance (Ohm) under strain.
pub fn antenna_trace_resistance(model: &RfLinkModel, strain_pct: f64) -> f64 {
    model.env_shift_tables.strain_trace_ohm.eval(strain_pct)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CalibratedParams;

    fn model() -> RfLinkModel {
        CalibratedParams::default().rf
    }

    #[test]
    fn resonance_endpoints() {
        let m = model();
        let env = EnvCondition::neutral();
        assert!((resonance_frequency(&m, 900.0, &env).unwrap() - 14.0).abs() < 1e-12);
        assert!((resonance_frequency(&m, 1800.0, &env).unwrap() - 13.6).abs() < 1e-12);
    }

    #[test]
    fn environmental_shift_knots() {
        let m = model();
        let mut env = EnvCondition::neutral();
        env.strain_pct = 40.0;
        assert!((resonance_frequency(&m, 900.0, &env).unwrap() - 12.0).abs() < 1e-12);
        let mut env = EnvCondition::neutral();
        env.bend_cycles = 5000.0;
        assert!((resonance_frequency(&m, 900.0, &env).unwrap() - 15.5).abs() < 1e-12);
        let mut env = EnvCondition::neutral();
        env.temp_c = 5.0;
        assert!((resonance_frequency(&m, 900.0, &env).unwrap() - 14.9).abs() < 1e-12);
        let mut env = EnvCondition::neutral();
        env.humidity_rh = 80.0;
        assert!((resonance_frequency(&m, 900.0, &env).unwrap() - 15.5).abs() < 1e-12);
    }

    #[test]
    fn resonance_monotone_in_load() {
        let m = model();
        let env = EnvCondition::neutral();
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let r = 900.0 + 900.0 * f64::from(i) / 1000.0;
            let f = resonance_frequency(&m, r, &env).unwrap();
            assert!(f <= prev);
            prev = f;
        }
    }

    #[test]
    fn gain_endpoints_and_monotone_covariation() {
        let m = model();
        let env = EnvCondition::neutral();
        assert!((gain_db(&m, 900.0, &env).unwrap() - 0.4).abs() < 0.2);
        assert!((gain_db(&m, 1800.0, &env).unwrap() - (-5.6)).abs() < 0.2);
        // dense sweep: gain strictly decreases, voltage non-decreasing
        let mut prev_g = f64::INFINITY;
        let mut prev_v = -1.0;
        for i in 0..=2000 {
            let r = 900.0 + 900.0 * f64::from(i) / 2000.0;
            let g = gain_db(&m, r, &env).unwrap();
            let v = harvested_voltage(&m, r, &env).unwrap();
            assert!(g < prev_g, "gain not decreasing at r={r}");
            assert!(v >= prev_v, "voltage not non-decreasing at r={r}");
            prev_g = g;
            prev_v = v;
        }
        let mid = gain_db(&m, 1350.0, &env).unwrap();
        assert!(mid < 0.4 && mid > -5.6);
    }

    #[test]
    fn voltage_anchors() {
        let m = model();
        let env = EnvCondition::neutral();
        // fresh sensor: heater effectively unpowered
        assert!(harvested_voltage(&m, 900.0, &env).unwrap() < 0.05);
        // intermediate operating point (40 ppm equivalent)
        assert!((harvested_voltage(&m, 1300.0, &env).unwrap() - 3.0).abs() < 0.15);
        // saturated sensor: peak harvest
        assert!((harvested_voltage(&m, 1800.0, &env).unwrap() - 5.8).abs() < 0.12);
    }

    #[test]
    fn voltage_peaks_where_resonance_hits_13_6() {
        // dense load sweep: the maximum is attained at f_res = 13.6 MHz and
        // nowhere does the curve exceed that value (the steep load response
        // saturates to a flat top at double precision, so the argmax is the
        // plateau ending at 13.6)
        let m = model();
        let env = EnvCondition::neutral();
        let v_at_13_6 = harvested_voltage(&m, 1800.0, &env).unwrap();
        assert!((resonance_frequency(&m, 1800.0, &env).unwrap() - 13.6).abs() < 1e-12);
        for i in 0..=4000 {
            let r = 900.0 + 900.0 * f64::from(i) / 4000.0;
            let v = harvested_voltage(&m, r, &env).unwrap();
            assert!(v <= v_at_13_6, "V({r}) = {v} exceeds V at 13.6 MHz");
        }
    }

    #[test]
    fn coupling_lookup_and_fallback() {
        let m = model();
        let mut env = EnvCondition::neutral();
        env.position = "outside_field".to_string();
        assert_eq!(harvested_voltage(&m, 1800.0, &env).unwrap(), 0.0);
        // unknown descriptor: nearest neighbor, flagged
        let (c, fellback) = m.lookup_coupling("inner_edge_5c");
        assert!(fellback);
        assert_eq!(c, 1.0);
        env.position = "inner_edge_5c".to_string();
        assert!(!m.extrapolation_flags(&env).is_empty());
    }

    #[test]
    fn optimal_position_has_maximum_coupling() {
        let m = model();
        let (optimal, _) = m.lookup_coupling("inner_edge_5cm");
        assert!(m.coupling_table.iter().all(|(_, c)| *c <= optimal));
        // voltage at the optimal position dominates every other table entry
        let mut env = EnvCondition::neutral();
        let v_best = harvested_voltage(&m, 1800.0, &env).unwrap();
        for (pos, _) in &m.coupling_table {
            env.position = pos.clone();
            assert!(harvested_voltage(&m, 1800.0, &env).unwrap() <= v_best);
        }
    }

    #[test]
    fn electrode_and_trace_resistance_knots() {
        let m = model();
        assert!((electrode_resistance(&m, 0.0) - 3.0).abs() < 1e-12);
        assert!((electrode_resistance(&m, 40.0) - 8.0).abs() < 1e-12);
        assert!((electrode_resistance(&m, 20.0) - 5.5).abs() < 1e-12);
        assert!((antenna_trace_resistance(&m, 0.0) - 0.3).abs() < 1e-12);
        assert!((antenna_trace_resistance(&m, 40.0) - 2.2).abs() < 1e-12);
        // clamped extrapolation
        assert!((electrode_resistance(&m, 50.0) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn lc_consistency() {
        let m = model();
        m.validate().unwrap();
    }

    #[test]
    fn rejects_nonpositive_load() {
        let m = model();
        let env = EnvCondition::neutral();
        assert!(resonance_frequency(&m, 0.0, &env).is_err());
        assert!(gain_db(&m, -10.0, &env).is_err());
        assert!(harvested_voltage(&m, f64::NAN, &env).is_err());
    }
}
