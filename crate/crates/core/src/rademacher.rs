//! Rademacher vectors in `l_p^{2^n}`, the projections onto their span and
//! the framing of `⊕_2 W_n` they assemble into.
//!
//! Within block `n` the sign matrix `ε` (`n x 2^n`) has orthogonal rows, so
//! `r_i = 2^{-n/p} ε_i` and `r_i^* = 2^{-n/q} ε_i` are biorthogonal and
//! `P = sum_i r_i (x) r_i^* = 2^{-n} ε^T ε` for every `p`. In the coordinates
//! of `H_n`, where the `r_i` are orthonormal, `P e_k` has coordinates
//! `2^{-n/q} ε_{.k}` and `P^* e_k^*` has `2^{-n/p} ε_{.k}`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::framings::Framing;
use crate::linalg::{lp_norm, LpExponent, Scalar, Vector};
use crate::rng::{gaussian, real_gaussian_vector, sign};

pub const MAX_SIGN_ORDER: usize = 14;
/// Largest block materialized as a dense `2^n x 2^n` projection.
pub const MAX_BLOCK_ORDER: usize = 11;
pub const MIN_KHINTCHINE_TRIALS: usize = 100;

/// `ε_{ij} = (-1)^{floor((j-1) 2^i / 2^n)}` for `i = 1..n`, `j = 1..2^n`,
/// the sign of `sin(2^i π t)` on the `j`-th dyadic interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=MAX_SIGN_ORDER).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "sign matrix order {n} outside 1..={MAX_SIGN_ORDER}"
            )));
        }
        let width = 1usize << n;
        let mut entries = Vec::with_capacity(n * width);
        for i in 1..=n {
            for j in 0..width {
                // floor(j 2^i / 2^n) = j >> (n - i)
                entries.push(if (j >> (n - i)) & 1 == 0 { 1 } else { -1 });
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        1 << self.n
    }

    /// `ε_{ij}` with zero-based indices.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.width() + j]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.width()..(i + 1) * self.width()]
    }

    /// `sum_j ε_{ij} ε_{kj}` in integer arithmetic.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|k| {
                        self.row(i)
                            .iter()
                            .zip(self.row(k))
                            .map(|(&a, &b)| i64::from(a) * i64::from(b))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Whether the Gram matrix is exactly `2^n I`.
    pub fn is_orthogonal(&self) -> bool {
        let w = self.width() as i64;
        self.gram()
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(k, &g)| g == if i == k { w } else { 0 }))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.width(), |i, j| f64::from(self.get(i, j)))
    }

    /// `ε a` for `a` of length `2^n`.
    fn apply(&self, a: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| {
            self.row(i).iter().zip(a).map(|(&s, &x)| f64::from(s) * x).sum()
        })
    }

    /// `ε^T c` for `c` of length `n`.
    fn apply_transpose(&self, c: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.width());
        for (i, &ci) in c.iter().enumerate() {
            for (o, &s) in out.iter_mut().zip(self.row(i)) {
                *o += f64::from(s) * ci;
            }
        }
        out
    }
}

pub fn sign_matrix(n: usize) -> Result<SignMatrix> {
    SignMatrix::new(n)
}

/// `1 / p + 1 / q = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

#[derive(Debug, Clone)]
pub struct RademacherBlock {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub eps: SignMatrix,
    /// `r_i = 2^{-n/p} ε_i`.
    pub r: Vec<DVector<f64>>,
    /// `r_i^* = 2^{-n/q} ε_i`, as vectors of `l_q^{2^n}`.
    pub r_star: Vec<DVector<f64>>,
    /// `sum_i r_i (x) r_i^*`.
    pub projection: DMatrix<f64>,
    /// `α_i = 2^{n(1/q - 1/2)}` for each of the `2^n` frame indices.
    pub alphas: Vec<f64>,
}

impl RademacherBlock {
    pub fn width(&self) -> usize {
        1 << self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alphas[0]
    }

    /// Largest entry of `|P P - P|`.
    pub fn idempotence_residual(&self) -> f64 {
        let pp = &self.projection * &self.projection;
        (pp - &self.projection).amax()
    }

    /// `max_i |P r_i - r_i|_2`.
    pub fn fixed_point_residual(&self) -> f64 {
        self.r
            .iter()
            .map(|r| (&self.projection * r - r).norm())
            .fold(0.0, f64::max)
    }

    /// `max_i | |r_i|_p - 1 |`.
    pub fn r_norm_defect(&self) -> f64 {
        let p = LpExponent::Finite(self.p);
        self.r
            .iter()
            .map(|r| (lp_norm(r.as_slice(), p) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `P x = 2^{-n/p} ε^T (2^{-n/q} ε x)` without the dense matrix.
    pub fn apply_projection(&self, x: &[f64]) -> DVector<f64> {
        let nf = self.n as f64;
        let c = self.eps.apply(x) * 2f64.powf(-nf / self.q);
        self.eps.apply_transpose(c.as_slice()) * 2f64.powf(-nf / self.p)
    }

    /// `H_n` coordinates of `P e_k`: `2^{-n/q} ε_{.k}`.
    pub fn x_coordinates(&self, k: usize) -> DVector<f64> {
        let scale = 2f64.powf(-(self.n as f64) / self.q);
        DVector::from_fn(self.n, |i, _| f64::from(self.eps.get(i, k)) * scale)
    }

    /// `H_n` coordinates of `P^* e_k^*`: `2^{-n/p} ε_{.k}`.
    pub fn y_coordinates(&self, k: usize) -> DVector<f64> {
        let scale = 2f64.powf(-(self.n as f64) / self.p);
        DVector::from_fn(self.n, |i, _| f64::from(self.eps.get(i, k)) * scale)
    }

    /// Rescaled frame vector `α_k` times the coordinates of `P e_k`.
    pub fn frame_vector(&self, k: usize) -> DVector<f64> {
        self.x_coordinates(k) * self.alphas[k]
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !p.is_finite() || p <= 1.0 || p == 2.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

pub fn build_block(n: usize, p: f64) -> Result<RademacherBlock> {
    check_exponent(p)?;
    if !(1..=MAX_BLOCK_ORDER).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "block order {n} outside 1..={MAX_BLOCK_ORDER}"
        )));
    }
    let q = conjugate_exponent(p);
    let eps = SignMatrix::new(n)?;
    let nf = n as f64;
    let e = eps.to_matrix();
    let r_mat = &e * 2f64.powf(-nf / p);
    let r_star_mat = &e * 2f64.powf(-nf / q);
    let projection = r_mat.transpose() * &r_star_mat;
    let alpha = 2f64.powf(nf * (1.0 / q - 0.5));
    Ok(RademacherBlock {
        n,
        p,
        q,
        r: r_mat.row_iter().map(|row| row.transpose()).collect(),
        r_star: r_star_mat.row_iter().map(|row| row.transpose()).collect(),
        eps,
        projection,
        alphas: vec![alpha; 1 << n],
    })
}

/// `| sum_k |<h, f_k>|^2 - |h|^2 | / |h|^2` for the rescaled frame vectors.
pub fn parseval_residual(block: &RademacherBlock, h: &DVector<f64>) -> f64 {
    let norm_sq = h.norm_squared();
    if norm_sq == 0.0 {
        return 0.0;
    }
    let sum: f64 = (0..block.width())
        .map(|k| block.frame_vector(k).dot(h).powi(2))
        .sum();
    (sum - norm_sq).abs() / norm_sq
}

/// Largest relative Parseval residual over the coordinate vectors of `H_n`
/// and `trials` Gaussian vectors.
pub fn parseval_check(block: &RademacherBlock, trials: usize, rng: &mut impl Rng) -> f64 {
    let n = block.n;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut h = DVector::zeros(n);
        h[k] = 1.0;
        worst = worst.max(parseval_residual(block, &h));
    }
    for _ in 0..trials {
        worst = worst.max(parseval_residual(block, &real_gaussian_vector(rng, n)));
    }
    worst
}

/// `max_k |α_k 2^{-n/q} ε_{.k} - 2^{n(1/2 - 1/q)} 2^{-n/p} ε_{.k}|`.
pub fn dual_side_check(block: &RademacherBlock) -> f64 {
    let nf = block.n as f64;
    let right_scale = 2f64.powf(nf * (0.5 - 1.0 / block.q));
    (0..block.width())
        .map(|k| {
            let left = block.x_coordinates(k) * block.alphas[k];
            let right = block.y_coordinates(k) * right_scale;
            (left - right).norm()
        })
        .fold(0.0, f64::max)
}

/// `|P x|_p / |x|_p`.
pub fn projection_ratio(block: &RademacherBlock, x: &[f64]) -> f64 {
    let p = LpExponent::Finite(block.p);
    let denom = lp_norm(x, p);
    if denom == 0.0 {
        return 0.0;
    }
    lp_norm(block.apply_projection(x).as_slice(), p) / denom
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionEvidence {
    /// Largest sampled `|P x|_p / |x|_p`, a lower estimate of `|P|_{p->p}`.
    pub max_ratio: f64,
    pub candidates: usize,
}

/// Sample `|P x|_p / |x|_p` over coordinate vectors, the Rademacher vectors,
/// and `trials` each of Gaussian, sparse, random-sign, random `W_n` and
/// duality-mapped random `W_n` vectors.
///
/// A duality-mapped `w` is `sign(w) |w|^{s - 1}` for `s` in `{p, q}`; it
/// norms `w` in the dual space and often sits near extremals of `P^*`.
pub fn projection_norm_evidence(
    block: &RademacherBlock,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<ProjectionEvidence> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let width = block.width();
    let mut best: f64 = 0.0;
    let mut count = 0;
    let mut offer = |x: &[f64]| {
        best = best.max(projection_ratio(block, x));
        count += 1;
    };
    for k in 0..width {
        let mut e = vec![0.0; width];
        e[k] = 1.0;
        offer(&e);
    }
    for r in &block.r {
        offer(r.as_slice());
    }
    let nf = block.n as f64;
    for _ in 0..trials {
        offer(real_gaussian_vector(rng, width).as_slice());

        let support = rng.random_range(1..=width.min(4));
        let mut sparse = vec![0.0; width];
        for _ in 0..support {
            sparse[rng.random_range(0..width)] = gaussian(rng);
        }
        offer(&sparse);

        let signs: Vec<f64> = (0..width).map(|_| if sign(rng) { 1.0 } else { -1.0 }).collect();
        offer(&signs);

        let a: Vec<f64> = (0..block.n).map(|_| gaussian(rng)).collect();
        let w = block.eps.apply_transpose(&a) * 2f64.powf(-nf / block.p);
        offer(w.as_slice());
        for s in [block.p, block.q] {
            let dual: Vec<f64> = w.iter().map(|&v| v.signum() * v.abs().powf(s - 1.0)).collect();
            offer(&dual);
        }
    }
    Ok(ProjectionEvidence {
        max_ratio: best,
        candidates: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KhintchineReport {
    /// Smallest observed `|sum a_i r_i|_p / |a|_2`.
    pub a_p_emp: f64,
    /// Largest observed ratio.
    pub b_p_emp: f64,
    pub samples: usize,
}

impl KhintchineReport {
    pub fn overlaps(&self, other: &Self) -> bool {
        self.a_p_emp <= other.b_p_emp && other.a_p_emp <= self.b_p_emp
    }
}

/// `|sum_i a_i r_i|_p / |a|_2`.
pub fn khintchine_ratio(block: &RademacherBlock, a: &[f64]) -> Result<f64> {
    if a.len() != block.n {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} Rademacher vectors",
            a.len(),
            block.n
        )));
    }
    let denom = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::InvalidArgument("coefficients must not all vanish".into()));
    }
    let v = block.eps.apply_transpose(a) * 2f64.powf(-(block.n as f64) / block.p);
    Ok(lp_norm(v.as_slice(), LpExponent::Finite(block.p)) / denom)
}

/// Extremes of [`khintchine_ratio`] over `trials` Gaussian coefficient
/// vectors.
pub fn khintchine_report(
    block: &RademacherBlock,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<KhintchineReport> {
    if trials < MIN_KHINTCHINE_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_KHINTCHINE_TRIALS} trials, got {trials}"
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..block.n).map(|_| gaussian(rng)).collect();
        let r = khintchine_ratio(block, &a)?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(KhintchineReport {
        a_p_emp: lo,
        b_p_emp: hi,
        samples: trials,
    })
}

/// The direct-sum framing over blocks `1..=n_max`.
#[derive(Debug, Clone)]
pub struct AssembledFraming {
    pub framing: Framing,
    /// `α` for every pair.
    pub alphas: Vec<f64>,
    /// Pair indices of each block.
    pub pair_blocks: Vec<Range<usize>>,
    /// Coordinates of each `H_n` inside `H`.
    pub coordinate_blocks: Vec<Range<usize>>,
}

/// Pairs `(P_n e_k, P_n^* e_k^*)` of every block in `H = ⊕_2 H_n`
/// coordinates.
pub fn assemble_framing(p: f64, n_max: usize) -> Result<AssembledFraming> {
    check_exponent(p)?;
    if !(1..=MAX_BLOCK_ORDER).contains(&n_max) {
        return Err(Error::InvalidArgument(format!(
            "n_max {n_max} outside 1..={MAX_BLOCK_ORDER}"
        )));
    }
    let dim = n_max * (n_max + 1) / 2;
    let mut pairs = Vec::with_capacity((1 << (n_max + 1)) - 2);
    let mut alphas = Vec::with_capacity(pairs.capacity());
    let mut pair_blocks = Vec::with_capacity(n_max);
    let mut coordinate_blocks = Vec::with_capacity(n_max);
    let mut offset = 0;
    for n in 1..=n_max {
        let block = build_block(n, p)?;
        let start = pairs.len();
        for k in 0..block.width() {
            let mut x = Vector::zeros(dim);
            let mut y = Vector::zeros(dim);
            let (xc, yc) = (block.x_coordinates(k), block.y_coordinates(k));
            for i in 0..n {
                x[offset + i] = Scalar::from(xc[i]);
                y[offset + i] = Scalar::from(yc[i]);
            }
            pairs.push((x, y));
            alphas.push(block.alphas[k]);
        }
        pair_blocks.push(start..pairs.len());
        coordinate_blocks.push(offset..offset + n);
        offset += n;
    }
    Ok(AssembledFraming {
        framing: Framing::with_tolerance(dim, pairs, 1e-9)?,
        alphas,
        pair_blocks,
        coordinate_blocks,
    })
}
