//! `chl5`: the Rademacher framing sweep.

use dilationkit::frames::PARSEVAL_TOL;
use dilationkit::framings::{check_reconstruction, is_dual_frame_pair, rescale_sqrt, RescalePlan};
use dilationkit::rademacher::{
    assemble_framing, build_block, dual_side_check, khintchine_report, parseval_check,
    projection_norm_evidence, KhintchineReport,
};
use dilationkit::rng::seeded;
use dilationkit::Scalar;
use rayon::prelude::*;
use serde_json::json;

use crate::report::{Check, Failure, Report};

pub struct Options {
    pub p: f64,
    pub nmax: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Per-block stream seeds: `seed + n * 0x9E3779B97F4A7C15`.
fn block_seed(seed: u64, n: usize) -> u64 {
    seed.wrapping_add((n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct BlockOutcome {
    n: usize,
    alpha: f64,
    orthogonal: bool,
    idempotence: f64,
    fixed_point: f64,
    r_norm: f64,
    parseval: f64,
    dual_side: f64,
    projection_ratio: f64,
    khintchine: KhintchineReport,
}

fn run_block(n: usize, opts: &Options) -> Result<BlockOutcome, Failure> {
    let block = build_block(n, opts.p)?;
    let mut rng = seeded(block_seed(opts.seed, n));
    Ok(BlockOutcome {
        n,
        alpha: block.alpha(),
        orthogonal: block.eps.is_orthogonal(),
        idempotence: block.idempotence_residual(),
        fixed_point: block.fixed_point_residual(),
        r_norm: block.r_norm_defect(),
        parseval: parseval_check(&block, opts.trials, &mut rng),
        dual_side: dual_side_check(&block),
        projection_ratio: projection_norm_evidence(&block, opts.trials, &mut rng)?.max_ratio,
        khintchine: khintchine_report(&block, opts.trials, &mut rng)?,
    })
}

pub fn run(opts: &Options) -> Result<Report, Failure> {
    let canonical = format!(
        "chl5 p={:?} nmax={} trials={} seed={}",
        opts.p, opts.nmax, opts.trials, opts.seed
    );
    let mut report = Report::new("chl5", canonical.as_bytes());
    let blocks = (1..=opts.nmax)
        .into_par_iter()
        .map(|n| run_block(n, opts))
        .collect::<Result<Vec<_>, _>>()?;

    for b in &blocks {
        let name = |what: &str| format!("block_{:02}.{what}", b.n);
        report.check(Check::flag(name("sign_orthogonality"), b.orthogonal));
        report.check(Check::at_most(name("idempotence_residual"), b.idempotence, 1e-10));
        report.check(Check::at_most(name("fixed_point_residual"), b.fixed_point, 1e-12));
        report.check(Check::at_most(name("r_norm_defect"), b.r_norm, 1e-12));
        report.check(Check::at_most(name("parseval_residual"), b.parseval, 1e-9));
        report.check(Check::at_most(name("dual_side_discrepancy"), b.dual_side, 1e-12));
        report.check(Check::flag(
            name("khintchine_ordered"),
            0.0 < b.khintchine.a_p_emp && b.khintchine.a_p_emp <= b.khintchine.b_p_emp,
        ));
    }

    // Cross-block evidence only involves n >= 2; block 1 has a single
    // Rademacher vector.
    let multi: Vec<&BlockOutcome> = blocks.iter().filter(|b| b.n >= 2).collect();
    if multi.len() >= 2 {
        let ratios: Vec<f64> = multi.iter().map(|b| b.projection_ratio).collect();
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        report.check(Check::at_most("projection_ratio_spread", hi / lo, 2.0));
        if ratios.len() >= 3 {
            let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
            report.check(Check::flag("projection_ratio_not_monotone", !increasing));
        }
        let a_max = multi.iter().map(|b| b.khintchine.a_p_emp).fold(f64::NEG_INFINITY, f64::max);
        let b_min = multi.iter().map(|b| b.khintchine.b_p_emp).fold(f64::INFINITY, f64::min);
        report.check(Check::at_most("khintchine_common_overlap", a_max - b_min, 0.0));
    }

    let assembled = assemble_framing(opts.p, opts.nmax)?;
    report.check(Check::at_most(
        "assembled_reconstruction_residual",
        check_reconstruction(&assembled.framing),
        1e-9,
    ));
    let plan = RescalePlan::from_alphas(assembled.alphas.iter().map(|&a| Scalar::from(a)).collect());
    let rescaled = plan.apply(&assembled.framing)?;
    let x = rescaled.x_family()?;
    let y = rescaled.y_family()?;
    report.check(Check::at_most("rescaled_parseval_residual", x.parseval_residual(), PARSEVAL_TOL));
    let copies = x
        .vectors()
        .iter()
        .zip(y.vectors())
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max);
    report.check(Check::at_most("rescaled_copy_discrepancy", copies, 1e-12));
    report.check(Check::flag("rescaled_dual_frame_pair", is_dual_frame_pair(&x, &y)));
    let sqrt_plan = rescale_sqrt(&assembled.framing)?.plan;
    let alpha_gap = sqrt_plan
        .alphas
        .iter()
        .zip(&assembled.alphas)
        .map(|(got, want)| (got.norm() - want).abs() / want)
        .fold(0.0, f64::max);
    report.check(Check::at_most("sqrt_rescale_alpha_gap", alpha_gap, 1e-12));

    report.artifact("p", json!(opts.p));
    report.artifact("q", json!(opts.p / (opts.p - 1.0)));
    report.artifact("nmax", json!(opts.nmax));
    report.artifact("trials", json!(opts.trials));
    report.artifact("seed", json!(opts.seed));
    report.artifact("prng", json!("xoshiro256++ seeded through SplitMix64, one stream per block"));
    report.artifact(
        "assembled",
        json!({"dim": assembled.framing.dim(), "pairs": assembled.framing.len()}),
    );
    report.artifact(
        "blocks",
        json!(blocks
            .iter()
            .map(|b| json!({
                "n": b.n,
                "alpha": b.alpha,
                "projection_max_ratio": b.projection_ratio,
                "khintchine": [b.khintchine.a_p_emp, b.khintchine.b_p_emp],
            }))
            .collect::<Vec<_>>()),
    );
    Ok(report)
}
