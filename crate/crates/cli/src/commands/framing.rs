//! `framing-rescale`: the square-root rescaling of a framing.

use std::path::Path;

use dilationkit::framings::{check_reconstruction, is_dual_frame_pair, rescale_sqrt};
use dilationkit::frames::PARSEVAL_TOL;
use serde_json::json;

use crate::io::{parse_framing, read_input, scalars_json};
use crate::report::{Check, Failure, Report};

pub fn run(path: &Path) -> Result<Report, Failure> {
    let bytes = read_input(path)?;
    let framing = parse_framing(&bytes)?;
    let mut report = Report::new("framing-rescale", &bytes);
    report.check(Check::at_most(
        "reconstruction_residual",
        check_reconstruction(&framing),
        framing.tolerance(),
    ));
    let rescaled = rescale_sqrt(&framing)?;
    report.check(Check::at_most(
        "pairing_defect",
        rescaled.plan.pairing_defect(),
        2.0 * f64::EPSILON,
    ));
    report.check(Check::flag(
        "dual_frame_pair",
        is_dual_frame_pair(&rescaled.x_frame, &rescaled.y_frame),
    ));
    let xb = rescaled.x_frame.bounds();
    let yb = rescaled.y_frame.bounds();
    let one = dilationkit::Scalar::from(1.0);
    report.artifact("alphas", scalars_json(rescaled.plan.alphas.iter()));
    report.artifact("betas", scalars_json(rescaled.plan.betas.iter()));
    report.artifact(
        "identity_plan",
        json!(rescaled.plan.alphas.iter().all(|&a| a == one)),
    );
    report.artifact(
        "parseval",
        json!(xb.is_parseval(PARSEVAL_TOL) && yb.is_parseval(PARSEVAL_TOL)),
    );
    report.artifact("x_bounds", json!({"lower": xb.lower, "upper": xb.upper}));
    report.artifact("y_bounds", json!({"lower": yb.lower, "upper": yb.upper}));
    Ok(report)
}
