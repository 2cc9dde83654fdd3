//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Vectors and matrices are plain `nalgebra` containers over [`Scalar`].
//! Real data is carried with zero imaginary parts; real-only arithmetic
//! keeps those parts exactly zero, so a real input never picks up spurious
//! complex noise. Every decomposition here is deterministic given the input
//! bits: singular values and eigenvalues are sorted descending with ties
//! broken by the solver's original index, and every returned singular or
//! eigen vector has its largest-modulus entry rotated onto the positive
//! real axis.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Scalar = Complex64;
pub type Vector = DVector<Scalar>;
pub type Matrix = DMatrix<Scalar>;

/// Default relative cutoff for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }
}

/// `(sum |v_j|^p)^(1/p)`, or `max |v_j|` for the infinite exponent.
///
/// The sum is taken over `|v_j| / max|v|` so large exponents neither
/// overflow nor underflow.
pub fn lp_norm<T>(v: &[T], p: LpExponent) -> f64
where
    T: ComplexField<RealField = f64> + Copy,
{
    let max = v.iter().map(|x| x.modulus()).fold(0.0_f64, f64::max);
    match p {
        LpExponent::Infinity => max,
        _ if max == 0.0 => 0.0,
        LpExponent::Finite(1.0) => v.iter().map(|x| x.modulus()).sum(),
        LpExponent::Finite(2.0) => {
            v.iter().map(|x| (x.modulus() / max).powi(2)).sum::<f64>().sqrt() * max
        }
        LpExponent::Finite(p) => {
            v.iter().map(|x| (x.modulus() / max).powf(p)).sum::<f64>().powf(1.0 / p) * max
        }
    }
}

/// Checked variant of [`lp_norm`] taking a raw exponent.
pub fn lp_norm_checked<T>(v: &[T], p: f64) -> Result<f64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    Ok(lp_norm(v, LpExponent::new(p)?))
}

/// Singular value decomposition with descending singular values.
#[derive(Debug, Clone)]
pub struct SortedSvd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v_t: Matrix,
}

impl SortedSvd {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = a.shape();
        let k = m.min(n);
        if k == 0 {
            return Self {
                u: Matrix::zeros(m, 0),
                singular_values: Vec::new(),
                v_t: Matrix::zeros(0, n),
            };
        }
        let svd = a.clone().svd(true, true);
        let u_raw = svd.u.expect("left singular vectors requested");
        let vt_raw = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| {
            svd.singular_values[j]
                .partial_cmp(&svd.singular_values[i])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        let mut u = Matrix::zeros(m, k);
        let mut v_t = Matrix::zeros(k, n);
        let mut singular_values = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            let col = u_raw.column(src).into_owned();
            let phase = dominant_phase(col.as_slice());
            u.set_column(dst, &(col * phase.conj()));
            // u s v^* is invariant under u -> u c, v^* -> c^* v^* for |c| = 1
            v_t.set_row(dst, &(vt_raw.row(src).into_owned() * phase));
            singular_values.push(svd.singular_values[src]);
        }
        Self {
            u,
            singular_values,
            v_t,
        }
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .filter(|&&s| s > rel_tol * top)
            .count()
    }
}

/// Unit-modulus factor of the largest-modulus entry (first one on ties).
pub(crate) fn dominant_phase(v: &[Scalar]) -> Scalar {
    let mut best = Scalar::new(0.0, 0.0);
    let mut best_mod = 0.0;
    for &z in v {
        let m = z.norm();
        if m > best_mod {
            best_mod = m;
            best = z;
        }
    }
    if best_mod == 0.0 {
        Scalar::new(1.0, 0.0)
    } else {
        best / best_mod
    }
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
}

pub fn spectral_norm_real(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
}

#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, `eigenvectors[:, k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: Matrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> Matrix {
        let n = self.eigenvectors.nrows();
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(k);
            out += v * v.adjoint() * Scalar::from(lambda);
        }
        out
    }
}

pub fn hermitian_part(a: &Matrix) -> Matrix {
    (a + a.adjoint()) * Scalar::from(0.5)
}

/// Eigendecomposition of the Hermitian part of `a`.
pub fn eig_hermitian(a: &Matrix) -> Result<HermitianEig> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(HermitianEig {
            eigenvalues: Vec::new(),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut vectors = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src).into_owned();
        let phase = dominant_phase(col.as_slice());
        vectors.set_column(dst, &(col * phase.conj()));
        values.push(eig.eigenvalues[src]);
    }
    Ok(HermitianEig {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    /// Partial isometry, `m x n`, isometric on `range(p)`.
    pub u: Matrix,
    /// Hermitian positive semidefinite `|A|`, `n x n`.
    pub p: Matrix,
}

/// `A = U |A|` through the singular value decomposition.
pub fn polar_decompose(a: &Matrix) -> PolarDecomposition {
    let (m, n) = a.shape();
    let svd = SortedSvd::new(a);
    let rank = svd.rank(DEFAULT_RANK_TOL);
    let mut u = Matrix::zeros(m, n);
    let mut p = Matrix::zeros(n, n);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let w = svd.u.column(k);
        let v_adj = svd.v_t.row(k);
        p += v_adj.adjoint() * v_adj * Scalar::from(s);
        if k < rank {
            u += w * v_adj;
        }
    }
    PolarDecomposition { u, p }
}

#[derive(Debug, Clone)]
pub struct PsdFactor {
    /// `rank x n`, with `v^* v = A`.
    pub v: Matrix,
    pub rank: usize,
    /// `n x rank` orthonormal basis of the range, `v = diag(sqrt(lambda)) basis^*`.
    pub basis: Matrix,
}

/// Factor a positive semidefinite matrix as `A = V^* V`.
///
/// Eigenvalues at or below `rel_tol * |A|` are dropped; any eigenvalue below
/// `-rel_tol * |A|` makes the input indefinite.
pub fn psd_factor(a: &Matrix, rel_tol: f64) -> Result<PsdFactor> {
    let eig = eig_hermitian(a)?;
    let n = a.nrows();
    let scale = eig
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0_f64, f64::max);
    let threshold = rel_tol * scale;
    if let Some(&lowest) = eig.eigenvalues.last() {
        if lowest < -threshold {
            return Err(Error::IndefiniteInput {
                eigenvalue: lowest,
                threshold,
            });
        }
    }
    let rank = if scale == 0.0 {
        0
    } else {
        eig.eigenvalues.iter().filter(|&&l| l > threshold).count()
    };
    let basis = eig.eigenvectors.columns(0, rank).into_owned();
    let mut v = Matrix::zeros(rank, n);
    for k in 0..rank {
        let root = Scalar::from(eig.eigenvalues[k].sqrt());
        v.set_row(k, &(basis.column(k).adjoint() * root));
    }
    Ok(PsdFactor { v, rank, basis })
}

/// Rank-one operator `x (x) y : z -> <z, y> x`, i.e. the matrix `x y^*`.
pub fn outer(x: &Vector, y: &Vector) -> Matrix {
    x * y.adjoint()
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn to_complex(a: &DMatrix<f64>) -> Matrix {
    a.map(Scalar::from)
}

pub fn vector_to_complex(v: &DVector<f64>) -> Vector {
    v.map(Scalar::from)
}

pub fn all_finite(a: &Matrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_real(a: &Matrix) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

/// Orthonormal basis of `range(a)` (columns), from the leading left
/// singular vectors above `rel_tol * sigma_max`.
pub fn range_basis(a: &Matrix, rel_tol: f64) -> Matrix {
    let svd = SortedSvd::new(a);
    let rank = svd.rank(rel_tol);
    svd.u.columns(0, rank).into_owned()
}

/// Extend orthonormal columns `q` (`n x k`) by `n - k` further orthonormal
/// columns.
///
/// Candidates are the standard basis vectors; at each step the candidate
/// with the largest component orthogonal to the current span is taken
/// (lowest index on ties) and orthonormalized with two Gram-Schmidt passes.
pub fn orthonormal_completion(q: &Matrix) -> Matrix {
    let (n, k) = q.shape();
    let mut basis: Vec<Vector> = q.column_iter().map(|c| c.into_owned()).collect();
    let mut added: Vec<Vector> = Vec::with_capacity(n.saturating_sub(k));
    let mut used = vec![false; n];
    while basis.len() < n {
        let mut best: Option<(usize, Vector, f64)> = None;
        for (idx, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut e = Vector::zeros(n);
            e[idx] = Scalar::from(1.0);
            let r = project_out(&e, &basis);
            let norm = r.norm();
            if best.as_ref().is_none_or(|(_, _, b)| norm > *b) {
                best = Some((idx, r, norm));
            }
        }
        let (idx, r, norm) = best.expect("a candidate remains while the basis is incomplete");
        used[idx] = true;
        let v = project_out(&(r / Scalar::from(norm)), &basis);
        let v = &v / Scalar::from(v.norm());
        basis.push(v.clone());
        added.push(v);
    }
    if added.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&added)
    }
}

fn project_out(v: &Vector, basis: &[Vector]) -> Vector {
    let mut r = v.clone();
    for b in basis {
        let c = b.dotc(&r);
        r -= b * c;
    }
    r
}

/// Inverse of a Hermitian positive definite matrix through its eigenvalues.
pub fn hermitian_inverse(a: &Matrix) -> Result<Matrix> {
    let eig = eig_hermitian(a)?;
    let n = a.nrows();
    let mut out = Matrix::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * Scalar::from(1.0 / lambda);
    }
    Ok(out)
}
