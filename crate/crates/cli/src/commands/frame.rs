//! `frame-analyze`: bounds, canonical dual and dilation of a frame.

use std::path::Path;

use dilationkit::frames::{dilate_dual_pair_to_riesz, dilate_parseval_to_onb, pairing_residual, DUAL_PAIR_TOL, PARSEVAL_TOL};
use dilationkit::linalg::DEFAULT_RANK_TOL;
use serde_json::json;

use crate::io::{frame_json, matrix_json, parse_frame, read_input};
use crate::report::{Check, Failure, Report};

const DILATION_TOL: f64 = 1e-10;

pub fn run(path: &Path, dual: bool, dilate: bool) -> Result<Report, Failure> {
    let bytes = read_input(path)?;
    let frame = parse_frame(&bytes)?;
    let mut report = Report::new("frame-analyze", &bytes);

    let bounds = frame.bounds();
    report.check(Check::above(
        "frame_lower_bound",
        bounds.lower,
        DEFAULT_RANK_TOL * bounds.upper,
    ));
    let parseval = bounds.is_parseval(PARSEVAL_TOL);
    report.artifact("bounds", json!({"lower": bounds.lower, "upper": bounds.upper}));
    report.artifact("tight", json!(bounds.is_tight(PARSEVAL_TOL)));
    report.artifact("parseval", json!(parseval));
    report.artifact("frame_operator", matrix_json(&frame.frame_operator()));

    let canonical = if dual || dilate {
        Some(frame.canonical_dual()?)
    } else {
        None
    };
    if let (true, Some(d)) = (dual, &canonical) {
        report.check(Check::at_most(
            "dual_pairing_residual",
            pairing_residual(&frame, d)?,
            DUAL_PAIR_TOL,
        ));
        report.artifact("dual", frame_json(d));
    }
    if let (true, Some(d)) = (dilate, &canonical) {
        let (dilation, partner) = if parseval {
            (dilate_parseval_to_onb(&frame)?, &frame)
        } else {
            (dilate_dual_pair_to_riesz(&frame, d)?, d)
        };
        if parseval {
            report.check(Check::at_most(
                "onb_orthonormality_residual",
                dilation.orthonormality_residual(),
                DILATION_TOL,
            ));
        }
        report.check(Check::at_most(
            "riesz_biorthogonality_residual",
            dilation.biorthogonality_residual(),
            DILATION_TOL,
        ));
        let (x_res, y_res) = dilation.compression_residuals(&frame, partner);
        report.check(Check::at_most("compression_residual", x_res.max(y_res), DILATION_TOL));
        report.artifact(
            "dilation",
            json!({
                "kind": if parseval { "orthonormal" } else { "riesz" },
                "basis": frame_json(&dilation.riesz),
                "dual_basis": frame_json(&dilation.riesz_dual),
                "condition_number": dilation.condition_number,
            }),
        );
    }
    Ok(report)
}
