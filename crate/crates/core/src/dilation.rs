//! Dilations of operator-valued measures to projection-valued ones.
//!
//! The elementary dilation space of a measure with atoms `E_j` is realized
//! as the direct sum of the ranges of the `E_j`. An element
//! `sum_i C_i E_{B_i, x_i}` has block coordinates
//! `v_j = sum_{i : j in B_i} C_i E_j x_i`, and its minimal dilation norm is
//! `max_B |sum_{j in B} v_j|`.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, identity, range_basis, spectral_norm, Matrix, Scalar, SortedSvd, Vector,
    DEFAULT_RANK_TOL,
};
use crate::ovm::{Ovm, EXHAUSTIVE_ATOM_LIMIT};
use crate::subset::SubsetMask;

/// Largest number of nonzero block vectors searched exhaustively.
pub const ALPHA_EXACT_LIMIT: usize = 24;

/// One term `C E_{B, x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Scalar,
    pub subset: SubsetMask,
    pub vector: Vector,
}

/// A finite combination `sum_i C_i E_{B_i, x_i}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Representation {
    pub terms: Vec<Term>,
}

impl Representation {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    /// `E_{B, x}`.
    pub fn elementary(subset: SubsetMask, vector: Vector) -> Self {
        Self::new(vec![Term {
            coeff: Scalar::from(1.0),
            subset,
            vector,
        }])
    }

    pub fn push(&mut self, coeff: Scalar, subset: SubsetMask, vector: Vector) {
        self.terms.push(Term {
            coeff,
            subset,
            vector,
        });
    }

    pub fn scaled(&self, c: Scalar) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    ..t.clone()
                })
                .collect(),
        )
    }

    /// The representation of the sum of both elements.
    pub fn concat(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn check(&self, m: &Ovm) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            if t.subset.len() != m.atom_count() || t.vector.len() != m.dim_in() {
                return Err(Error::DimensionMismatch(format!(
                    "term {i} has mask length {} and vector length {}, expected {} and {}",
                    t.subset.len(),
                    t.vector.len(),
                    m.atom_count(),
                    m.dim_in()
                )));
            }
        }
        Ok(())
    }

    /// `v_j = sum_{i : j in B_i} C_i E_j x_i` for every atom `j`.
    pub fn block_vectors(&self, m: &Ovm) -> Result<Vec<Vector>> {
        self.check(m)?;
        Ok(m.atoms()
            .iter()
            .enumerate()
            .map(|(j, a)| {
                self.terms
                    .iter()
                    .filter(|t| t.subset.contains(j))
                    .fold(Vector::zeros(m.dim_out()), |acc, t| acc + a * &t.vector * t.coeff)
            })
            .collect())
    }

    /// `sum_i C_i E(B_i) x_i`.
    pub fn evaluate(&self, m: &Ovm) -> Result<Vector> {
        self.check(m)?;
        Ok(self
            .terms
            .iter()
            .fold(Vector::zeros(m.dim_out()), |acc, t| acc + m.evaluate(&t.subset) * &t.vector * t.coeff))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaNorm {
    pub value: f64,
    /// Maximizing subset, smallest in [`SubsetMask`] order among ties.
    pub witness: SubsetMask,
}

/// Minimal dilation norm `sup_B |sum_i C_i E(B ∩ B_i) x_i|`, searched over
/// every subset of atoms with a nonzero block vector.
pub fn alpha_norm(m: &Ovm, rep: &Representation) -> Result<AlphaNorm> {
    alpha_norm_with_limit(m, rep, ALPHA_EXACT_LIMIT)
}

pub fn alpha_norm_with_limit(m: &Ovm, rep: &Representation, limit: usize) -> Result<AlphaNorm> {
    let vs = rep.block_vectors(m)?;
    let support: Vec<usize> = (0..vs.len()).filter(|&j| vs[j].iter().any(|z| *z != Scalar::from(0.0))).collect();
    if support.len() > limit.min(62) {
        return Err(Error::ExactModeTooLarge {
            atoms: support.len(),
            limit,
        });
    }
    let live: Vec<&Vector> = support.iter().map(|&j| &vs[j]).collect();
    let (value, key) = max_subset_sum(&live, m.dim_out());
    Ok(AlphaNorm {
        value,
        witness: SubsetMask::from_indices(
            m.atom_count(),
            support.iter().enumerate().filter(|(b, _)| key >> b & 1 == 1).map(|(_, &j)| j),
        ),
    })
}

/// Flat table of all subset sums of `vs`, `2^k` rows of `dim` entries.
fn subset_sum_table(vs: &[&Vector], dim: usize) -> Vec<Scalar> {
    let count = 1usize << vs.len();
    let mut table = vec![Scalar::from(0.0); count * dim];
    for mask in 1..count {
        let low = mask.trailing_zeros() as usize;
        let prev = (mask & (mask - 1)) * dim;
        for d in 0..dim {
            table[mask * dim + d] = table[prev + d] + vs[low][d];
        }
    }
    table
}

/// `max_B |sum_{j in B} vs[j]|` and the smallest maximizing bit pattern.
///
/// Sums over the low and high halves are tabulated separately; each high
/// pattern is scanned against every low pattern in parallel.
fn max_subset_sum(vs: &[&Vector], dim: usize) -> (f64, u64) {
    let k = vs.len();
    if k == 0 {
        return (0.0, 0);
    }
    let lo = k / 2;
    let low = subset_sum_table(&vs[..lo], dim);
    let high = subset_sum_table(&vs[lo..], dim);
    let low_count = 1u64 << lo;
    let (best, key) = (0..1u64 << (k - lo))
        .into_par_iter()
        .map(|h| {
            let hv = &high[h as usize * dim..(h as usize + 1) * dim];
            let mut best = (f64::NEG_INFINITY, u64::MAX);
            for l in 0..low_count {
                let lv = &low[l as usize * dim..(l as usize + 1) * dim];
                let s: f64 = hv.iter().zip(lv).map(|(a, b)| (a + b).norm_sqr()).sum();
                if s > best.0 {
                    best = (s, (h << lo) | l);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    (best.sqrt(), key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBounds {
    /// `|sum_{j in witness} v_j|`, attained.
    pub lower: f64,
    pub witness: SubsetMask,
    /// `sum_j |v_j|`.
    pub upper: f64,
}

/// Bounds on the minimal dilation norm without enumeration.
///
/// For a direction `u` the subset `{j : Re <v_j, u> > 0}` is taken and `u`
/// replaced by its sum until the subset repeats; every block vector and the
/// total serve as starting directions.
pub fn alpha_bounds(m: &Ovm, rep: &Representation) -> Result<AlphaBounds> {
    let vs = rep.block_vectors(m)?;
    let n = vs.len();
    let upper = vs.iter().map(|v| v.norm()).sum();
    let total = vs.iter().fold(Vector::zeros(m.dim_out()), |acc, v| acc + v);
    let mut lower = 0.0;
    let mut witness = SubsetMask::empty(n);
    for start in vs.iter().chain(std::iter::once(&total)) {
        let mut u = start.clone();
        let mut prev: Option<SubsetMask> = None;
        for _ in 0..50 {
            let b = SubsetMask::from_indices(n, (0..n).filter(|&j| u.dotc(&vs[j]).re > 0.0));
            if prev.as_ref() == Some(&b) {
                break;
            }
            u = b.iter().fold(Vector::zeros(m.dim_out()), |acc, j| acc + &vs[j]);
            let value = u.norm();
            if value > lower || (value == lower && b < witness) {
                lower = value;
                witness = b.clone();
            }
            prev = Some(b);
        }
    }
    Ok(AlphaBounds {
        lower,
        witness,
        upper,
    })
}

/// `sum_i sup_B |C_i E(B ∩ B_i) x_i|` for the given representation.
pub fn omega_upper_bound(m: &Ovm, rep: &Representation) -> Result<f64> {
    rep.check(m)?;
    let mut total = 0.0;
    for t in &rep.terms {
        total += alpha_norm(m, &Representation::new(vec![t.clone()]))?.value;
    }
    Ok(total)
}

/// `(S, T, F)` with `E(B) = S F(B) T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationTriple {
    pub s: Matrix,
    pub t: Matrix,
    pub f_atoms: Vec<Matrix>,
}

impl DilationTriple {
    pub fn total_dim(&self) -> usize {
        self.t.nrows()
    }

    /// `F(B)`, summed in index order.
    pub fn f_of(&self, b: &SubsetMask) -> Matrix {
        let n = self.total_dim();
        b.iter().fold(Matrix::zeros(n, n), |acc, j| acc + &self.f_atoms[j])
    }

    fn f_of_bits(&self, bits: u64) -> Matrix {
        let n = self.total_dim();
        let mut acc = Matrix::zeros(n, n);
        for (j, f) in self.f_atoms.iter().enumerate() {
            if bits >> j & 1 == 1 {
                acc += f;
            }
        }
        acc
    }

    pub fn dilate(&self, b: &SubsetMask) -> Matrix {
        &self.s * self.f_of(b) * &self.t
    }
}

/// `⊕_j range E_j` with an orthonormal basis of each block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDilationSpace {
    pub block_ranks: Vec<usize>,
    pub block_bases: Vec<Matrix>,
    pub total_dim: usize,
}

impl BlockDilationSpace {
    pub fn block_range(&self, j: usize) -> Range<usize> {
        let start: usize = self.block_ranks[..j].iter().sum();
        start..start + self.block_ranks[j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDilation {
    pub space: BlockDilationSpace,
    pub triple: DilationTriple,
}

/// Diagonal projection onto `range` inside `total` coordinates.
fn coordinate_projection(total: usize, range: Range<usize>) -> Matrix {
    let mut f = Matrix::zeros(total, total);
    for k in range {
        f[(k, k)] = Scalar::from(1.0);
    }
    f
}

pub fn build_block_dilation(m: &Ovm) -> BlockDilation {
    build_block_dilation_with_tol(m, DEFAULT_RANK_TOL)
}

/// Dilate on `⊕_j range E_j`.
///
/// Block `j` has the leading left singular vectors `Q_j` of `E_j` above
/// `rel_tol` times the largest atom norm. `T` stacks `Q_j^* E_j`, `S`
/// places `Q_j` side by side and `F_j` is the coordinate projection onto
/// block `j`, so `S F(B) T = sum_{j in B} Q_j Q_j^* E_j = E(B)`.
pub fn build_block_dilation_with_tol(m: &Ovm, rel_tol: f64) -> BlockDilation {
    let cutoff = rel_tol * m.scale();
    let bases: Vec<Matrix> = m
        .atoms()
        .iter()
        .map(|a| {
            let svd = SortedSvd::new(a);
            let r = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
            svd.u.columns(0, r).into_owned()
        })
        .collect();
    let ranks: Vec<usize> = bases.iter().map(|q| q.ncols()).collect();
    let total: usize = ranks.iter().sum();
    let mut s = Matrix::zeros(m.dim_out(), total);
    let mut t = Matrix::zeros(total, m.dim_in());
    let mut f_atoms = Vec::with_capacity(ranks.len());
    let mut offset = 0;
    for (q, a) in bases.iter().zip(m.atoms()) {
        let r = q.ncols();
        s.columns_mut(offset, r).copy_from(q);
        t.rows_mut(offset, r).copy_from(&(q.adjoint() * a));
        f_atoms.push(coordinate_projection(total, offset..offset + r));
        offset += r;
    }
    BlockDilation {
        space: BlockDilationSpace {
            block_ranks: ranks,
            block_bases: bases,
            total_dim: total,
        },
        triple: DilationTriple { s, t, f_atoms },
    }
}

/// `E(B) = V^* F(B) V` for a positive measure.
#[derive(Debug, Clone, PartialEq)]
pub struct NaimarkDilation {
    pub v: Matrix,
    pub blocks: Vec<Range<usize>>,
    pub f_atoms: Vec<Matrix>,
}

impl NaimarkDilation {
    pub fn block_ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// The triple `(V^*, V, F)`.
    pub fn as_triple(&self) -> DilationTriple {
        DilationTriple {
            s: self.v.adjoint(),
            t: self.v.clone(),
            f_atoms: self.f_atoms.clone(),
        }
    }

    /// `|V^* V - I|`.
    pub fn isometry_residual(&self) -> f64 {
        spectral_norm(&(self.v.adjoint() * &self.v - identity(self.v.ncols())))
    }
}

/// Stack factors `E_j = V_j^* V_j` from eigendecompositions.
///
/// Eigenvalues at or below `rel_tol` times the largest atom norm are
/// dropped. An atom that is not Hermitian, or has an eigenvalue below minus
/// that cutoff, is reported as [`Error::NotPositive`].
pub fn naimark_dilate(m: &Ovm, rel_tol: f64) -> Result<NaimarkDilation> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.dim_out(),
            cols: m.dim_in(),
        });
    }
    let cutoff = rel_tol * m.scale();
    let mut factors = Vec::with_capacity(m.atom_count());
    for (index, a) in m.atoms().iter().enumerate() {
        if spectral_norm(&(a - a.adjoint())) > cutoff {
            return Err(Error::NotPositive { index });
        }
        let eig = eig_hermitian(a)?;
        if eig.eigenvalues.last().is_some_and(|&l| l < -cutoff) {
            return Err(Error::NotPositive { index });
        }
        let r = eig.eigenvalues.iter().filter(|&&l| l > cutoff).count();
        let mut vj = Matrix::zeros(r, m.dim_in());
        for k in 0..r {
            let root = Scalar::from(eig.eigenvalues[k].sqrt());
            vj.set_row(k, &(eig.eigenvectors.column(k).adjoint() * root));
        }
        factors.push(vj);
    }
    let total: usize = factors.iter().map(|v| v.nrows()).sum();
    let mut v = Matrix::zeros(total, m.dim_in());
    let mut blocks = Vec::with_capacity(factors.len());
    let mut offset = 0;
    for vj in &factors {
        v.rows_mut(offset, vj.nrows()).copy_from(vj);
        blocks.push(offset..offset + vj.nrows());
        offset += vj.nrows();
    }
    let f_atoms = blocks
        .iter()
        .map(|b| coordinate_projection(total, b.clone()))
        .collect();
    Ok(NaimarkDilation { v, blocks, f_atoms })
}

/// Restrict a triple to the range of `F(Ω)`.
///
/// With `R` an orthonormal basis of that range and `L = R^* F(Ω)`, the new
/// triple is `(S R, L T, L F(B) R)`. A diagonal 0/1 `F(Ω)` is handled by
/// selecting coordinates, which keeps coordinate projections exact.
pub fn compress_to_probability(t: &DilationTriple) -> DilationTriple {
    let n = t.total_dim();
    let f_total = t.f_of(&SubsetMask::full(t.f_atoms.len()));
    let one = Scalar::from(1.0);
    let zero = Scalar::from(0.0);
    let coordinate = (0..n).all(|i| {
        (0..n).all(|j| {
            let z = f_total[(i, j)];
            if i == j {
                z == zero || z == one
            } else {
                z == zero
            }
        })
    });
    if coordinate {
        let keep: Vec<usize> = (0..n).filter(|&i| f_total[(i, i)] == one).collect();
        return DilationTriple {
            s: t.s.select_columns(&keep),
            t: t.t.select_rows(&keep),
            f_atoms: t
                .f_atoms
                .iter()
                .map(|f| f.select_rows(&keep).select_columns(&keep))
                .collect(),
        };
    }
    let r = range_basis(&f_total, DEFAULT_RANK_TOL);
    let l = r.adjoint() * &f_total;
    DilationTriple {
        s: &t.s * &r,
        t: &l * &t.t,
        f_atoms: t.f_atoms.iter().map(|f| &l * f * &r).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilationReport {
    /// `max_B |E(B) - S F(B) T|`.
    pub dilation_residual: f64,
    /// `max_{i,j} |F_i F_j - δ_ij F_i|`, which bounds
    /// `|F(A ∩ B) - F(A) F(B)|` up to a factor of `n^2`.
    pub spectrality_residual: f64,
    /// `|F(Ω) - I|`.
    pub identity_residual: f64,
    /// `max_j |F_j - F_j^*|`.
    pub self_adjoint_residual: f64,
    pub rank_s: usize,
    pub min_singular_t: f64,
    /// `(T S F(Ω), F(Ω) T S)` idempotence residuals when `E(Ω) = I`.
    pub idempotent_residuals: Option<(f64, f64)>,
    /// Whether the dilation residual covered every subset.
    pub exhaustive: bool,
}

impl DilationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.dilation_residual <= tol
            && self.spectrality_residual <= tol
            && self.identity_residual <= tol
            && self
                .idempotent_residuals
                .is_none_or(|(a, b)| a <= tol && b <= tol)
    }

    pub fn f_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_residual <= tol
    }
}

/// Check a triple against a measure. Every subset is examined up to
/// [`EXHAUSTIVE_ATOM_LIMIT`] atoms, beyond that singletons, pairs and `Ω`.
pub fn verify_dilation(m: &Ovm, t: &DilationTriple) -> Result<DilationReport> {
    verify_dilation_with_limit(m, t, EXHAUSTIVE_ATOM_LIMIT)
}

pub fn verify_dilation_with_limit(m: &Ovm, t: &DilationTriple, limit: usize) -> Result<DilationReport> {
    let n = m.atom_count();
    let k = t.total_dim();
    if t.f_atoms.len() != n
        || t.s.shape() != (m.dim_out(), k)
        || t.t.ncols() != m.dim_in()
        || t.f_atoms.iter().any(|f| f.shape() != (k, k))
    {
        return Err(Error::DimensionMismatch("triple does not fit the measure".into()));
    }
    let exhaustive = n <= limit.min(40);
    let masks: Vec<u64> = if exhaustive {
        (0..1u64 << n).collect()
    } else {
        Vec::new()
    };
    let dilation_residual = if exhaustive {
        masks
            .par_iter()
            .map(|&bits| spectral_norm(&(m.evaluate_bits(bits) - &t.s * t.f_of_bits(bits) * &t.t)))
            .reduce(|| 0.0, f64::max)
    } else {
        let mut sample: Vec<SubsetMask> = vec![SubsetMask::full(n)];
        for i in 0..n {
            sample.push(SubsetMask::from_indices(n, [i]));
            for j in i + 1..n {
                sample.push(SubsetMask::from_indices(n, [i, j]));
            }
        }
        sample
            .par_iter()
            .map(|b| spectral_norm(&(m.evaluate(b) - t.dilate(b))))
            .reduce(|| 0.0, f64::max)
    };
    let spectrality_residual = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut p = &t.f_atoms[i] * &t.f_atoms[j];
                    if i == j {
                        p -= &t.f_atoms[i];
                    }
                    spectral_norm(&p)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let f_total = t.f_of(&SubsetMask::full(n));
    let identity_residual = spectral_norm(&(&f_total - identity(k)));
    let self_adjoint_residual = t
        .f_atoms
        .iter()
        .map(|f| spectral_norm(&(f - f.adjoint())))
        .fold(0.0, f64::max);
    let rank_s = SortedSvd::new(&t.s).rank(DEFAULT_RANK_TOL);
    let min_singular_t = SortedSvd::new(&t.t)
        .singular_values
        .last()
        .copied()
        .unwrap_or(0.0);
    let idempotent_residuals = if m.is_square()
        && spectral_norm(&(m.total() - identity(m.dim_in()))) <= 1e-10
    {
        let ts = &t.t * &t.s;
        let a = &ts * &f_total;
        let b = &f_total * &ts;
        Some((spectral_norm(&(&a * &a - &a)), spectral_norm(&(&b * &b - &b))))
    } else {
        None
    };
    Ok(DilationReport {
        dilation_residual,
        spectrality_residual,
        identity_residual,
        self_adjoint_residual,
        rank_s,
        min_singular_t,
        idempotent_residuals,
        exhaustive,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalityGap {
    pub alpha: f64,
    /// `|sum_i C_i F(B_i) T x_i|` in the triple's space.
    pub triple_norm: f64,
    /// `max_B |S F(B)|`.
    pub c: f64,
}

impl MinimalityGap {
    pub fn holds(&self, slack: f64) -> bool {
        self.alpha <= self.c * self.triple_norm + slack
    }
}

/// Compare the minimal norm with the norm induced by a given triple.
pub fn minimality_gap(m: &Ovm, rep: &Representation, t: &DilationTriple) -> Result<MinimalityGap> {
    let n = m.atom_count();
    if n > EXHAUSTIVE_ATOM_LIMIT {
        return Err(Error::ExactModeTooLarge {
            atoms: n,
            limit: EXHAUSTIVE_ATOM_LIMIT,
        });
    }
    let alpha = alpha_norm(m, rep)?.value;
    let z = rep.terms.iter().fold(Vector::zeros(t.total_dim()), |acc, term| {
        acc + t.f_of(&term.subset) * (&t.t * &term.vector) * term.coeff
    });
    let c = (0..1u64 << n)
        .into_par_iter()
        .map(|bits| spectral_norm(&(&t.s * t.f_of_bits(bits))))
        .reduce(|| 0.0, f64::max);
    Ok(MinimalityGap {
        alpha,
        triple_norm: z.norm(),
        c,
    })
}

/// Residuals of `S_D = S U`, `U T_D = T` and `U F_D(j) = F(j) U` for a map
/// `U` from the space of `d` into the space of `t`.
pub fn intertwiner_residuals(t: &DilationTriple, d: &DilationTriple, u: &Matrix) -> Result<(f64, f64, f64)> {
    if u.shape() != (t.total_dim(), d.total_dim()) || t.f_atoms.len() != d.f_atoms.len() {
        return Err(Error::DimensionMismatch("intertwiner shape".into()));
    }
    let s = spectral_norm(&(&d.s - &t.s * u));
    let tt = spectral_norm(&(u * &d.t - &t.t));
    let f = t
        .f_atoms
        .iter()
        .zip(&d.f_atoms)
        .map(|(ft, fd)| spectral_norm(&(u * fd - ft * u)))
        .fold(0.0, f64::max);
    Ok((s, tt, f))
}
