//! Framings `(x_i, y_i)` with `x = sum <x, y_i> x_i`, their unconditionality
//! constants, and rescalings to dual frame pairs.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::{pairing_residual, Frame, FrameBounds, DUAL_PAIR_TOL};
use crate::linalg::{identity, outer, spectral_norm, Matrix, Scalar, Vector};
use crate::rng::sign;
use crate::subset::SubsetMask;

/// Reconstruction tolerance stored by [`Framing::new`].
pub const DEFAULT_FRAMING_TOL: f64 = 1e-8;
/// Pair counts up to this are searched over every sign pattern.
pub const EXHAUSTIVE_SIGN_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Framing {
    dim: usize,
    pairs: Vec<(Vector, Vector)>,
    tolerance: f64,
}

impl Framing {
    /// Build a framing whose pairs reconstruct the identity within
    /// [`DEFAULT_FRAMING_TOL`].
    pub fn new(dim: usize, pairs: Vec<(Vector, Vector)>) -> Result<Self> {
        Self::with_tolerance(dim, pairs, DEFAULT_FRAMING_TOL)
    }

    pub fn with_tolerance(dim: usize, pairs: Vec<(Vector, Vector)>, tolerance: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("framing dimension must be positive".into()));
        }
        for (i, (x, y)) in pairs.iter().enumerate() {
            if x.len() != dim || y.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "pair {i} has lengths ({}, {}), expected {dim}",
                    x.len(),
                    y.len()
                )));
            }
            if x.iter().chain(y.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("framing pair"));
            }
        }
        let framing = Self {
            dim,
            pairs,
            tolerance,
        };
        let residual = check_reconstruction(&framing);
        if residual.is_nan() || residual > tolerance {
            return Err(Error::NotAFraming {
                residual,
                tolerance,
            });
        }
        Ok(framing)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Vector, Vector)] {
        &self.pairs
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `x_i (x) y_i`.
    pub fn atom(&self, i: usize) -> Matrix {
        let (x, y) = &self.pairs[i];
        outer(x, y)
    }

    /// `sum_i x_i (x) y_i`.
    pub fn reconstruction_operator(&self) -> Matrix {
        (0..self.len()).fold(Matrix::zeros(self.dim, self.dim), |acc, i| acc + self.atom(i))
    }

    pub fn x_family(&self) -> Result<Frame> {
        Frame::new(self.dim, self.pairs.iter().map(|(x, _)| x.clone()).collect())
    }

    pub fn y_family(&self) -> Result<Frame> {
        Frame::new(self.dim, self.pairs.iter().map(|(_, y)| y.clone()).collect())
    }
}

/// `|sum x_i (x) y_i - I|`.
pub fn check_reconstruction(f: &Framing) -> f64 {
    spectral_norm(&(f.reconstruction_operator() - identity(f.dim)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnconditionalityReport {
    /// `max_σ |sum σ_i x_i (x) y_i|` over the examined sign patterns.
    pub k_u: f64,
    /// Whether every sign pattern was examined.
    pub exact: bool,
    /// `max_B |sum_{i in B} x_i (x) y_i|` over the examined subsets.
    pub subset_sup: f64,
    /// Maximizing sign pattern, `true` for +1.
    pub k_u_pattern: Vec<bool>,
    pub subset_witness: SubsetMask,
    pub patterns_examined: u64,
}

impl UnconditionalityReport {
    /// `subset_sup <= K_u <= 2 subset_sup`, with slack `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        self.subset_sup <= self.k_u + tol && self.k_u <= 2.0 * self.subset_sup + tol
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    key: u64,
}

impl Best {
    const NONE: Best = Best {
        value: f64::NEG_INFINITY,
        key: u64::MAX,
    };

    fn offer(self, value: f64, key: u64) -> Self {
        if value > self.value || (value == self.value && key < self.key) {
            Best { value, key }
        } else {
            self
        }
    }

    fn merge(self, other: Self) -> Self {
        self.offer(other.value, other.key)
    }
}

/// Unconditionality constants of the reconstruction series.
///
/// For each sign pattern the supremum over unit `x` is the spectral norm of
/// `M_σ = sum σ_i x_i (x) y_i`, computed exactly. Subset sums come from the
/// same pass as `(M_+ + M_σ) / 2` and `(M_+ - M_σ) / 2`, where `M_+` is the
/// all-plus sum. Up to [`EXHAUSTIVE_SIGN_LIMIT`] pairs every pattern is
/// examined (`σ` and `-σ` have the same norm, so only patterns with
/// `σ_0 = +1` are visited); beyond that `sample_count` random patterns are
/// drawn from `rng`. Ties go to the pattern with the smallest bit value.
pub fn unconditionality_diagnostics(
    f: &Framing,
    sample_count: usize,
    rng: &mut impl Rng,
) -> UnconditionalityReport {
    let n = f.len();
    let atoms: Vec<Matrix> = (0..n).map(|i| f.atom(i)).collect();
    let total = f.reconstruction_operator();

    if n <= EXHAUSTIVE_SIGN_LIMIT {
        let half = if n == 0 { 1 } else { 1u64 << (n - 1) };
        const CHUNK: u64 = 1 << 10;
        let chunks = half.div_ceil(CHUNK);
        let (k_best, s_best) = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut k_best = Best::NONE;
                let mut s_best = Best::NONE;
                for half_bits in c * CHUNK..((c + 1) * CHUNK).min(half) {
                    // bit 0 fixed to +1
                    let bits = if n == 0 { 0 } else { (half_bits << 1) | 1 };
                    let m = signed_sum(&atoms, bits, f.dim);
                    k_best = k_best.offer(spectral_norm(&m), bits);
                    let plus = spectral_norm(&((&total + &m) * Scalar::from(0.5)));
                    let minus = spectral_norm(&((&total - &m) * Scalar::from(0.5)));
                    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                    s_best = s_best.offer(plus, bits).offer(minus, !bits & full);
                }
                (k_best, s_best)
            })
            .reduce(|| (Best::NONE, Best::NONE), |a, b| (a.0.merge(b.0), a.1.merge(b.1)));
        return UnconditionalityReport {
            k_u: k_best.value,
            exact: true,
            subset_sup: s_best.value,
            k_u_pattern: (0..n).map(|i| k_best.key >> i & 1 == 1).collect(),
            subset_witness: SubsetMask::from_bits(n, s_best.key),
            patterns_examined: half,
        };
    }

    let mut k_u = f64::NEG_INFINITY;
    let mut subset_sup = f64::NEG_INFINITY;
    let mut k_u_pattern = vec![true; n];
    let mut subset_witness = SubsetMask::full(n);
    for _ in 0..sample_count.max(1) {
        let pattern: Vec<bool> = (0..n).map(|_| sign(rng)).collect();
        let mut m = Matrix::zeros(f.dim, f.dim);
        for (a, &s) in atoms.iter().zip(&pattern) {
            if s {
                m += a;
            } else {
                m -= a;
            }
        }
        let norm = spectral_norm(&m);
        if norm > k_u {
            k_u = norm;
            k_u_pattern = pattern.clone();
        }
        let plus = spectral_norm(&((&total + &m) * Scalar::from(0.5)));
        let minus = spectral_norm(&((&total - &m) * Scalar::from(0.5)));
        let positive = SubsetMask::from_bools(&pattern);
        if plus > subset_sup {
            subset_sup = plus;
            subset_witness = positive.clone();
        }
        if minus > subset_sup {
            subset_sup = minus;
            subset_witness = positive.complement();
        }
    }
    UnconditionalityReport {
        k_u,
        exact: false,
        subset_sup,
        k_u_pattern,
        subset_witness,
        patterns_examined: sample_count.max(1) as u64,
    }
}

fn signed_sum(atoms: &[Matrix], bits: u64, dim: usize) -> Matrix {
    let mut m = Matrix::zeros(dim, dim);
    for (i, a) in atoms.iter().enumerate() {
        if bits >> i & 1 == 1 {
            m += a;
        } else {
            m -= a;
        }
    }
    m
}

/// Per-pair factors `(α_i, β_i)` with `β_i = 1 / conj(α_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescalePlan {
    pub alphas: Vec<Scalar>,
    pub betas: Vec<Scalar>,
}

impl RescalePlan {
    pub fn from_alphas(alphas: Vec<Scalar>) -> Self {
        let betas = alphas.iter().map(|a| Scalar::from(1.0) / a.conj()).collect();
        Self { alphas, betas }
    }

    pub fn identity(len: usize) -> Self {
        Self::from_alphas(vec![Scalar::from(1.0); len])
    }

    /// `max_i |α_i conj(β_i) - 1|`.
    pub fn pairing_defect(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.betas)
            .map(|(a, b)| (a * b.conj() - Scalar::from(1.0)).norm())
            .fold(0.0, f64::max)
    }

    /// `(α_i x_i, β_i y_i)`.
    pub fn apply(&self, f: &Framing) -> Result<Framing> {
        if self.alphas.len() != f.len() {
            return Err(Error::DimensionMismatch(format!(
                "plan for {} pairs applied to {}",
                self.alphas.len(),
                f.len()
            )));
        }
        let pairs = f
            .pairs()
            .iter()
            .zip(self.alphas.iter().zip(&self.betas))
            .map(|((x, y), (a, b))| (x * *a, y * *b))
            .collect();
        Framing::with_tolerance(f.dim(), pairs, f.tolerance())
    }
}

#[derive(Debug, Clone)]
pub struct Rescaled {
    pub plan: RescalePlan,
    pub x_frame: Frame,
    pub y_frame: Frame,
}

/// Rescale by `α_i = (|y_i| / |x_i|)^{1/2}`, `β_i = 1 / α_i`.
pub fn rescale_sqrt(f: &Framing) -> Result<Rescaled> {
    let zero: Vec<usize> = f
        .pairs()
        .iter()
        .enumerate()
        .filter(|(_, (x, y))| x.norm() * y.norm() == 0.0)
        .map(|(i, _)| i)
        .collect();
    if !zero.is_empty() {
        return Err(Error::ZeroPair(zero));
    }
    let alphas = f
        .pairs()
        .iter()
        .map(|(x, y)| Scalar::from((y.norm() / x.norm()).sqrt()))
        .collect();
    let plan = RescalePlan::from_alphas(alphas);
    let rescaled = plan.apply(f)?;
    Ok(Rescaled {
        plan,
        x_frame: rescaled.x_family()?,
        y_frame: rescaled.y_family()?,
    })
}

/// Both families span and `sum x_i (x) y_i = I` within [`DUAL_PAIR_TOL`].
pub fn is_dual_frame_pair(x: &Frame, y: &Frame) -> bool {
    if x.len() != y.len() || x.dim() != y.dim() {
        return false;
    }
    x.bounds().spans()
        && y.bounds().spans()
        && pairing_residual(x, y).is_ok_and(|r| r <= DUAL_PAIR_TOL)
}

/// `sum_i a_i x_i (x) y_i`, summed in index order.
pub fn multiplier_apply(f: &Framing, a: &[Scalar]) -> Result<Matrix> {
    if a.len() != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} multipliers for {} pairs",
            a.len(),
            f.len()
        )));
    }
    Ok(a
        .iter()
        .enumerate()
        .fold(Matrix::zeros(f.dim(), f.dim()), |acc, (i, &c)| acc + f.atom(i) * c))
}

/// `{e_1, e_2, e_2, e_3, e_3, e_3, ..}` paired with
/// `{e_1, e_2/2, e_2/2, e_3/3, ..}`, truncated to `m` groups in `R^m`.
pub fn example_e11(groups: usize) -> Result<Framing> {
    if groups == 0 {
        return Err(Error::InvalidArgument("need at least one group".into()));
    }
    let mut pairs = Vec::with_capacity(groups * (groups + 1) / 2);
    for k in 1..=groups {
        let mut x = Vector::zeros(groups);
        x[k - 1] = Scalar::from(1.0);
        let y = &x * Scalar::from(1.0 / k as f64);
        for _ in 0..k {
            pairs.push((x.clone(), y.clone()));
        }
    }
    Framing::new(groups, pairs)
}

/// Frame bounds of both sides of the truncated `e11` example at `m` and `2m`.
#[derive(Debug, Clone, Copy)]
pub struct TruncationTrend {
    pub m: usize,
    pub x_at_m: FrameBounds,
    pub x_at_2m: FrameBounds,
    pub y_at_m: FrameBounds,
    pub y_at_2m: FrameBounds,
}

impl TruncationTrend {
    /// Growth of the x-side bound ratio from `m` to `2m`.
    pub fn x_ratio_growth(&self) -> f64 {
        self.x_at_2m.ratio() / self.x_at_m.ratio()
    }
}

pub fn example_e11_trend(m: usize) -> Result<TruncationTrend> {
    let small = example_e11(m)?;
    let large = example_e11(2 * m)?;
    Ok(TruncationTrend {
        m,
        x_at_m: small.x_family()?.bounds(),
        x_at_2m: large.x_family()?.bounds(),
        y_at_m: small.y_family()?.bounds(),
        y_at_2m: large.y_family()?.bounds(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_inverse;
    use crate::rng::{gaussian_matrix, seeded};
    use approx::assert_abs_diff_eq;

    fn e(dim: usize, k: usize) -> Vector {
        let mut v = Vector::zeros(dim);
        v[k] = Scalar::from(1.0);
        v
    }

    fn standard(dim: usize) -> Framing {
        Framing::new(dim, (0..dim).map(|k| (e(dim, k), e(dim, k))).collect()).unwrap()
    }

    fn scalar_pairs(pairs: &[(f64, f64)]) -> Framing {
        Framing::new(
            1,
            pairs
                .iter()
                .map(|&(x, y)| {
                    (
                        Vector::from_element(1, Scalar::from(x)),
                        Vector::from_element(1, Scalar::from(y)),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn reconstruction_examples() {
        assert_eq!(check_reconstruction(&standard(3)), 0.0);
        // k copies of fl(1/k) need not sum to exactly 1.
        assert!(check_reconstruction(&example_e11(6).unwrap()) <= 4.0 * f64::EPSILON);

        let mut rng = seeded(17);
        let t = gaussian_matrix(&mut rng, 4, 4, true);
        let t_inv_adj = t.clone().try_inverse().unwrap().adjoint();
        let pairs = (0..4)
            .map(|k| (&t * e(4, k), &t_inv_adj * e(4, k)))
            .collect();
        let f = Framing::new(4, pairs).unwrap();
        assert!(check_reconstruction(&f) <= 1e-12);
    }

    #[test]
    fn framing_rejects_bad_pairs() {
        let err = Framing::new(1, vec![(e(1, 0), e(1, 0) * Scalar::from(2.0))]);
        assert!(matches!(err, Err(Error::NotAFraming { .. })));
        assert!(matches!(
            Framing::new(2, vec![(e(1, 0), e(2, 0))]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn unconditionality_standard_basis() {
        let r = unconditionality_diagnostics(&standard(3), 0, &mut seeded(0));
        assert!(r.exact);
        assert_abs_diff_eq!(r.k_u, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.subset_sup, 1.0, epsilon = 1e-14);
        assert_eq!(r.patterns_examined, 4);
    }

    #[test]
    fn unconditionality_e11_groups() {
        let f = example_e11(3).unwrap();
        let r = unconditionality_diagnostics(&f, 0, &mut seeded(0));
        // Oracle: brute force over all 64 subsets.
        let mut brute = 0.0_f64;
        for bits in 0..64u64 {
            let mut s = Matrix::zeros(3, 3);
            for i in 0..6 {
                if bits >> i & 1 == 1 {
                    s += f.atom(i);
                }
            }
            brute = brute.max(spectral_norm(&s));
        }
        assert_abs_diff_eq!(brute, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.subset_sup, brute, epsilon = 1e-14);
        assert!(r.chain_holds(1e-12));
    }

    #[test]
    fn unconditionality_scalar_signs() {
        let f = scalar_pairs(&[(1.0, 2.0), (1.0, -1.0)]);
        let r = unconditionality_diagnostics(&f, 0, &mut seeded(0));
        assert_abs_diff_eq!(r.k_u, 3.0, epsilon = 1e-14);
        assert_eq!(r.k_u_pattern, vec![true, false]);
        assert_abs_diff_eq!(r.subset_sup, 2.0, epsilon = 1e-14);
        assert_eq!(r.subset_witness, SubsetMask::from_indices(2, [0]));
        assert!(r.chain_holds(0.0));
    }

    #[test]
    fn unconditionality_sampled_mode() {
        let f = example_e11(7).unwrap(); // 28 pairs
        let r = unconditionality_diagnostics(&f, 200, &mut seeded(5));
        assert!(!r.exact);
        assert_eq!(r.patterns_examined, 200);
        assert!(r.k_u <= 1.0 + 1e-12);
        assert!(r.chain_holds(1e-12));
    }

    #[test]
    fn rescale_e11_gives_parseval_copies() {
        let f = example_e11(4).unwrap();
        let r = rescale_sqrt(&f).unwrap();
        let mut i = 0;
        for k in 1..=4 {
            for _ in 0..k {
                assert_abs_diff_eq!(r.plan.alphas[i].re, 1.0 / (k as f64).sqrt(), epsilon = 1e-15);
                assert!((&r.x_frame.vectors()[i] - &r.y_frame.vectors()[i]).norm() < 1e-15);
                i += 1;
            }
        }
        assert!(r.x_frame.parseval_residual() < 1e-12);
        assert!(is_dual_frame_pair(&r.x_frame, &r.y_frame));
    }

    #[test]
    fn rescale_identity_when_norms_match() {
        let r = rescale_sqrt(&standard(2)).unwrap();
        assert_eq!(r.plan, RescalePlan::identity(2));
    }

    #[test]
    fn rescale_scalar_pair() {
        let f = scalar_pairs(&[(2.0, 0.5)]);
        let r = rescale_sqrt(&f).unwrap();
        assert_eq!(r.plan.alphas[0], Scalar::from(0.5));
        assert_eq!(r.x_frame.vectors()[0][0], Scalar::from(1.0));
        assert_eq!(r.y_frame.vectors()[0][0], Scalar::from(1.0));
    }

    #[test]
    fn rescale_reports_zero_pairs() {
        let f = Framing::new(
            1,
            vec![
                (e(1, 0), e(1, 0)),
                (Vector::zeros(1), e(1, 0)),
                (e(1, 0), Vector::zeros(1)),
            ],
        )
        .unwrap();
        assert_eq!(rescale_sqrt(&f).unwrap_err(), Error::ZeroPair(vec![1, 2]));
    }

    #[test]
    fn rescale_plan_pairing_defect_within_one_ulp() {
        let mut rng = seeded(33);
        let alphas: Vec<Scalar> = (0..1000)
            .map(|_| Scalar::new(rng.random_range(0.01..100.0), rng.random_range(-5.0..5.0)))
            .collect();
        let plan = RescalePlan::from_alphas(alphas);
        assert!(plan.pairing_defect() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn dual_pair_examples() {
        let mut rng = seeded(2);
        let vs: Vec<Vector> = (0..5)
            .map(|_| crate::rng::gaussian_vector(&mut rng, 3, true))
            .collect();
        let x = Frame::new(3, vs).unwrap();
        let y = x.canonical_dual().unwrap();
        assert!(is_dual_frame_pair(&x, &y));
        assert!(!is_dual_frame_pair(&x, &x));
        let short = Frame::new(3, vec![x.vectors()[0].clone()]).unwrap();
        assert!(!is_dual_frame_pair(&x, &short));
    }

    #[test]
    fn e11_truncation_is_a_dual_pair_with_growing_bounds() {
        // At any finite truncation both sides span; the failure of the
        // infinite example shows up as bound ratios growing with m.
        let f = example_e11(5).unwrap();
        assert!(is_dual_frame_pair(&f.x_family().unwrap(), &f.y_family().unwrap()));
        let t = example_e11_trend(5).unwrap();
        assert_abs_diff_eq!(t.x_at_m.ratio(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.x_at_2m.ratio(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.y_at_2m.lower, 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(t.x_ratio_growth(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn multiplier_examples() {
        let f = example_e11(3).unwrap();
        let ones = vec![Scalar::from(1.0); f.len()];
        assert_eq!(multiplier_apply(&f, &ones).unwrap(), identity(3));
        let zeros = vec![Scalar::from(0.0); f.len()];
        assert_eq!(multiplier_apply(&f, &zeros).unwrap(), Matrix::zeros(3, 3));
        assert!(multiplier_apply(&f, &ones[1..]).is_err());
    }

    #[test]
    fn e11_generator_sums() {
        assert_eq!(example_e11(1).unwrap().len(), 1);
        let f = example_e11(3).unwrap();
        assert_eq!(f.len(), 6);
        let x3: f64 = f.pairs().iter().map(|(x, _)| x[2].norm_sqr()).sum();
        let y3: f64 = f.pairs().iter().map(|(_, y)| y[2].norm_sqr()).sum();
        assert_eq!(x3, 3.0);
        assert_eq!(y3, 1.0 / 3.0);
        assert!(example_e11(0).is_err());
    }

    #[test]
    fn rescaling_leaves_atoms_unchanged() {
        let mut rng = seeded(12);
        let t = gaussian_matrix(&mut rng, 3, 3, true);
        let s_inv = hermitian_inverse(&(&t * t.adjoint())).unwrap();
        let x = Frame::new(3, t.column_iter().map(|c| c.into_owned()).collect()).unwrap();
        let pairs = x
            .vectors()
            .iter()
            .map(|v| (v.clone(), &s_inv * v))
            .collect();
        let f = Framing::new(3, pairs).unwrap();
        let r = rescale_sqrt(&f).unwrap();
        let g = r.plan.apply(&f).unwrap();
        for i in 0..f.len() {
            let scale = spectral_norm(&f.atom(i));
            assert!(spectral_norm(&(f.atom(i) - g.atom(i))) <= 1e-14 * scale);
        }
    }
}
