//! `ovm-dilate`: Naimark or block dilation of a measure.

use std::path::Path;

use anyhow::anyhow;
use dilationkit::dilation::{build_block_dilation, naimark_dilate, verify_dilation_with_limit, DilationTriple};
use dilationkit::linalg::DEFAULT_RANK_TOL;
use dilationkit::ovm::{classify_sampled, classify_with_limit, EXHAUSTIVE_ATOM_LIMIT};
use dilationkit::rng::seeded;
use serde_json::{json, Value};

use crate::io::{matrix_json, parse_ovm, read_input};
use crate::report::{write_atomic, Check, Failure, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Naimark,
    Block,
}

pub struct Options<'a> {
    pub method: Method,
    pub tol: f64,
    pub out: Option<&'a Path>,
    pub max_atoms: usize,
}

fn triple_json(method: &str, t: &DilationTriple, ranks: &[usize]) -> Value {
    json!({
        "method": method,
        "total_dim": t.total_dim(),
        "block_ranks": ranks,
        "s": matrix_json(&t.s),
        "t": matrix_json(&t.t),
        "f_atoms": t.f_atoms.iter().map(matrix_json).collect::<Vec<_>>(),
    })
}

pub fn run(path: &Path, opts: &Options) -> Result<Report, Failure> {
    let bytes = read_input(path)?;
    let m = parse_ovm(&bytes)?;
    let n = m.atom_count();
    if n > opts.max_atoms {
        return Err(Failure::Usage(anyhow!(
            "{n} atoms exceed --max-atoms {}; raising it costs 2^{n} subset evaluations per check",
            opts.max_atoms
        )));
    }
    if opts.max_atoms > EXHAUSTIVE_ATOM_LIMIT && n > EXHAUSTIVE_ATOM_LIMIT {
        eprintln!(
            "note: exhaustive checks over 2^{n} = {} subsets",
            1u128 << n
        );
    }
    let mut report = Report::new("ovm-dilate", &bytes);
    let class = if n <= opts.max_atoms.min(40) {
        classify_with_limit(&m, opts.tol, opts.max_atoms)?
    } else {
        classify_sampled(&m, opts.tol, &mut seeded(0))
    };
    report.artifact(
        "classification",
        json!({
            "probability": class.is_probability,
            "positive": class.is_positive,
            "projection_valued": class.is_projection_valued,
            "spectral": class.is_spectral,
            "self_adjoint": class.is_self_adjoint,
            "norm": class.ovm_norm,
            "norm_witness": class.norm_witness.iter().collect::<Vec<_>>(),
            "sampled": class.sampled,
        }),
    );

    let (label, triple, ranks) = match opts.method {
        Method::Naimark => {
            let d = naimark_dilate(&m, DEFAULT_RANK_TOL)?;
            if class.is_probability {
                report.check(Check::at_most("isometry_residual", d.isometry_residual(), opts.tol));
            }
            ("naimark", d.as_triple(), d.block_ranks())
        }
        Method::Block => {
            let d = build_block_dilation(&m);
            let expected = m.atom_ranks(DEFAULT_RANK_TOL);
            let mismatches = expected
                .iter()
                .zip(&d.space.block_ranks)
                .filter(|(a, b)| a != b)
                .count();
            report.check(Check::at_most("rank_mismatches", mismatches as f64, 0.0));
            ("block", d.triple, d.space.block_ranks)
        }
    };
    let v = verify_dilation_with_limit(&m, &triple, opts.max_atoms)?;
    report.check(Check::at_most("dilation_residual", v.dilation_residual, opts.tol));
    report.check(Check::at_most("spectrality_residual", v.spectrality_residual, opts.tol));
    report.check(Check::at_most("identity_residual", v.identity_residual, opts.tol));
    if let Some((a, b)) = v.idempotent_residuals {
        report.check(Check::at_most("idempotent_residual", a.max(b), opts.tol));
    }
    report.artifact(
        "dilation",
        json!({
            "method": label,
            "total_dim": triple.total_dim(),
            "block_ranks": ranks,
            "rank_s": v.rank_s,
            "min_singular_t": v.min_singular_t,
            "f_self_adjoint": v.f_self_adjoint(opts.tol),
            "exhaustive": v.exhaustive,
        }),
    );
    if let Some(out) = opts.out {
        let text = serde_json::to_string_pretty(&triple_json(label, &triple, &ranks))
            .expect("triples serialize")
            + "\n";
        write_atomic(out, &text).map_err(Failure::Usage)?;
    }
    Ok(report)
}
