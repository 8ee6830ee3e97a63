//! Calibration pipeline integration: the bundled anchor dataset must
//! reproduce the frozen default parameters, each fit must converge inside
//! its bounds, and the residual report must be internally consistent.

use smartpack::calibrate::{calibrate_all, current_params, problem_specs, AnchorSet};
use smartpack::CalibratedParams;
use std::path::PathBuf;

fn anchors_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../anchors/paper_anchors.csv")
}

#[test]
fn pipeline_reproduces_frozen_defaults() {
    let anchors = AnchorSet::from_csv_path(&anchors_path()).unwrap();
    let outcome = calibrate_all(&anchors).unwrap();
    let frozen = CalibratedParams::default();

    for spec in problem_specs() {
        let fitted = current_params(spec.id, &outcome.params);
        let expected = current_params(spec.id, &frozen);
        for ((got, want), name) in fitted.iter().zip(&expected).zip(&spec.param_names) {
            let scale = want.abs().max(1e-9);
            assert!(
                ((got - want) / scale).abs() < 1e-4,
                "{}::{name}: fitted {got} vs frozen {want}",
                spec.id
            );
        }
    }
}

#[test]
fn every_fit_converges_in_bounds() {
    let anchors = AnchorSet::from_csv_path(&anchors_path()).unwrap();
    let outcome = calibrate_all(&anchors).unwrap();
    for report in &outcome.reports {
        assert!(report.result.converged, "{} did not converge", report.problem_id);
        assert!(report.in_bounds, "{} landed on a bound", report.problem_id);
        // per-anchor residuals (fit anchors) sum in squares to the residual
        let sum: f64 = report
            .anchors
            .iter()
            .filter(|a| !a.verify_only)
            .map(|a| a.residual * a.residual)
            .sum();
        assert!(
            (sum - report.result.residual).abs() <= 1e-9 * sum.max(1.0),
            "{}: residual decomposition {sum} vs {}",
            report.problem_id,
            report.result.residual
        );
    }
}

#[test]
fn report_covers_every_anchor_row() {
    let anchors = AnchorSet::from_csv_path(&anchors_path()).unwrap();
    let outcome = calibrate_all(&anchors).unwrap();
    let reported: usize = outcome.reports.iter().map(|r| r.anchors.len()).sum();
    assert_eq!(reported, anchors.len());
    let csv = outcome.residual_report_csv();
    assert_eq!(csv.lines().count(), anchors.len() + 1);
}
