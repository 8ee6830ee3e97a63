//! Calibration toolkit: the measured-anchor dataset, the normalized
//! least-squares objective, derivative-free fitting, and a brute-force grid
//! oracle for verification.
//!
//! Every anchor carries its own tolerance; residuals are normalized by it so
//! ppm-, Ohm-, deg C-, and fraction-scale anchors are commensurable. Anchors
//! may be one-sided (`"hinge": "upper"|"lower"` in the input JSON) or
//! verification-only (`"verify_only": true`; reported but excluded from fit
//! objectives).

mod problems;
mod simplex;

pub use problems::{
    apply_params, calibrate_all, current_params, fit, fit_grid_oracle, predict, problem_specs,
    rf_tables_from_anchors, AnchorResidual, CalibrationOutcome, FitReport, ProblemSpec,
};
pub use simplex::{fit_simplex, grid_oracle, FitResult, DIAMETER_TOLERANCE, MAX_ITERATIONS};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub model_id: String,
    pub input: serde_json::Value,
    pub observed: f64,
    pub tolerance: f64,
    pub provenance: String,
}

impl Anchor {
    pub fn hinge(&self) -> Option<&str> {
        self.input.get("hinge").and_then(|v| v.as_str())
    }

    pub fn verify_only(&self) -> bool {
        self.input
            .get("verify_only")
            .and_then(|v| v.as_bool())
            .unwrap_or(false)
    }

    /// Tolerance-normalized residual of a predicted value against this
    /// anchor. Hinged anchors penalize only the violating side.
    pub fn residual(&self, predicted: f64) -> f64 {
        let raw = match self.hinge() {
            Some("upper") => (predicted - self.observed).max(0.0),
            Some("lower") => (self.observed - predicted).max(0.0),
            _ => predicted - self.observed,
        };
        raw / self.tolerance
    }

    /// Numeric field from the input JSON.
    pub fn num(&self, key: &str) -> Result<f64> {
        self.input
            .get(key)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| {
                Error::AnchorFormat(format!("anchor `{}` missing numeric `{key}`", self.model_id))
            })
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        self.input.get(key).and_then(|v| v.as_str()).ok_or_else(|| {
            Error::AnchorFormat(format!("anchor `{}` missing string `{key}`", self.model_id))
        })
    }
}

/// The bundled measured-anchor dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    pub anchors: Vec<Anchor>,
}

impl AnchorSet {
    pub fn for_model(&self, model_id: &str) -> Vec<&Anchor> {
        self.anchors
            .iter()
            .filter(|a| a.model_id == model_id)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Reads the anchor CSV (columns: model_id, input_json, observed,
    /// tolerance, provenance).
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::AnchorFormat(e.to_string()))?
            .clone();
        let expected = ["model_id", "input_json", "observed", "tolerance", "provenance"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::AnchorFormat(format!(
                "expected columns {expected:?}, got {headers:?}"
            )));
        }
        let mut anchors = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::AnchorFormat(e.to_string()))?;
            let field = |j: usize| record.get(j).unwrap_or("").trim().to_string();
            let input: serde_json::Value = serde_json::from_str(&field(1))
                .map_err(|e| Error::AnchorFormat(format!("row {i}: bad input_json: {e}")))?;
            let observed: f64 = field(2)
                .parse()
                .map_err(|_| Error::AnchorFormat(format!("row {i}: bad observed")))?;
            let tolerance: f64 = field(3)
                .parse()
                .map_err(|_| Error::AnchorFormat(format!("row {i}: bad tolerance")))?;
            let provenance = field(4);
            if tolerance.is_nan() || tolerance <= 0.0 {
                return Err(Error::AnchorFormat(format!("row {i}: tolerance must be > 0")));
            }
            if provenance.is_empty() {
                return Err(Error::AnchorFormat(format!("row {i}: provenance must be non-empty")));
            }
            anchors.push(Anchor {
                model_id: field(0),
                input,
                observed,
                tolerance,
                provenance,
            });
        }
        Ok(AnchorSet { anchors })
    }
}

/// Penalty magnitude returned for out-of-bounds parameter vectors; finite and
/// large so simplex search remains total.
const OUT_OF_BOUNDS_PENALTY: f64 = 1e12;

/// Sum of squared tolerance-normalized residuals over the fit anchors
/// (verification-only anchors excluded). Out-of-bounds parameters yield a
/// finite penalty growing with the violation, never an exception.
pub fn objective<F>(params: &[f64], anchors: &[&Anchor], bounds: &[(f64, f64)], predict: F) -> f64
where
    F: Fn(&[f64], &Anchor) -> Result<f64>,
{
    let mut violation = 0.0;
    for (x, (lo, hi)) in params.iter().zip(bounds) {
        if x < lo {
            violation += (lo - x) * (lo - x);
        }
        if x > hi {
            violation += (x - hi) * (x - hi);
        }
    }
    if violation > 0.0 {
        return OUT_OF_BOUNDS_PENALTY * (1.0 + violation);
    }
    let mut sum = 0.0;
    for anchor in anchors {
        if anchor.verify_only() {
            continue;
        }
        match predict(params, anchor) {
            Ok(pred) => {
                let r = anchor.residual(pred);
                sum += r * r;
            }
            Err(_) => return OUT_OF_BOUNDS_PENALTY,
        }
    }
    sum
}
