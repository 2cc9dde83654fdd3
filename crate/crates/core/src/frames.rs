//! Finite frames in `C^dim`: analysis and frame operators, optimal bounds,
//! canonical duals, dilation of dual pairs to Riesz bases, and rank-one
//! decompositions whose partial sums stay norm-bounded.

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, hermitian_inverse, identity, orthonormal_completion, outer, polar_decompose,
    psd_factor, spectral_norm, Matrix, Scalar, SortedSvd, Vector, DEFAULT_RANK_TOL,
};
use crate::subset::SubsetMask;

/// Tolerance on `|sum x_i (x) y_i - I|` for accepting a dual pair.
pub const DUAL_PAIR_TOL: f64 = 1e-8;
/// Tolerance on `|S - I|` for accepting a Parseval frame.
pub const PARSEVAL_TOL: f64 = 1e-8;
/// Largest term count for exhaustive subset-sum checks.
pub const MAX_EXHAUSTIVE_TERMS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    dim: usize,
    vectors: Vec<Vector>,
}

impl Frame {
    pub fn new(dim: usize, vectors: Vec<Vector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("frame dimension must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("frame needs at least one vector".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "frame vector {i} has length {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite("frame vector"));
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        Self::new(
            dim,
            rows.iter()
                .map(|r| Vector::from_iterator(r.len(), r.iter().map(|&x| Scalar::from(x))))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            vectors: self.vectors.iter().map(|v| v * Scalar::from(c)).collect(),
        }
    }

    /// `N x dim` matrix whose `n`-th row is `x_n^*`, so `(Θx)_n = <x, x_n>`.
    pub fn analysis_operator(&self) -> Matrix {
        let mut theta = Matrix::zeros(self.len(), self.dim);
        for (n, v) in self.vectors.iter().enumerate() {
            theta.set_row(n, &v.adjoint());
        }
        theta
    }

    /// `dim x N`, the adjoint of the analysis operator.
    pub fn synthesis_operator(&self) -> Matrix {
        Matrix::from_columns(&self.vectors)
    }

    /// `S = sum_n x_n (x) x_n`.
    pub fn frame_operator(&self) -> Matrix {
        let x = self.synthesis_operator();
        &x * x.adjoint()
    }

    /// Optimal bounds: extreme eigenvalues of the frame operator.
    pub fn bounds(&self) -> FrameBounds {
        let eig = eig_hermitian(&self.frame_operator()).expect("frame operator is square");
        let upper = eig.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
        let lower = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
        FrameBounds { lower, upper }
    }

    /// `|S - I|`.
    pub fn parseval_residual(&self) -> f64 {
        spectral_norm(&(self.frame_operator() - identity(self.dim)))
    }

    /// `{S^-1 x_n}`.
    pub fn canonical_dual(&self) -> Result<Frame> {
        let bounds = self.bounds();
        if bounds.upper == 0.0 || bounds.lower <= DEFAULT_RANK_TOL * bounds.upper {
            return Err(Error::NotAFrame {
                lower: bounds.lower,
            });
        }
        let s_inv = hermitian_inverse(&self.frame_operator())?;
        Ok(Frame {
            dim: self.dim,
            vectors: self.vectors.iter().map(|v| &s_inv * v).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn spans(&self) -> bool {
        self.upper > 0.0 && self.lower > DEFAULT_RANK_TOL * self.upper
    }

    pub fn is_tight(&self, tol: f64) -> bool {
        self.spans() && (self.upper - self.lower).abs() <= tol * self.upper.max(1.0)
    }

    pub fn is_parseval(&self, tol: f64) -> bool {
        (self.lower - 1.0).abs() <= tol && (self.upper - 1.0).abs() <= tol
    }

    /// `upper / lower`, infinite when the family does not span.
    pub fn ratio(&self) -> f64 {
        if self.lower > 0.0 {
            self.upper / self.lower
        } else {
            f64::INFINITY
        }
    }
}

/// `|sum x_i (x) y_i - I|` for two families of equal size.
pub fn pairing_residual(x: &Frame, y: &Frame) -> Result<f64> {
    if x.len() != y.len() || x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "families of {}x{} and {}x{} vectors",
            x.len(),
            x.dim(),
            y.len(),
            y.dim()
        )));
    }
    let sum = x.synthesis_operator() * y.synthesis_operator().adjoint();
    Ok(spectral_norm(&(sum - identity(x.dim()))))
}

/// Riesz basis `{u_n}` of `C^N` with biorthogonal dual `{u_n^*}` whose
/// compressions to the first `dim` coordinates return the dilated pair.
#[derive(Debug, Clone)]
pub struct RieszDilation {
    pub riesz: Frame,
    pub riesz_dual: Frame,
    /// Orthogonal projection of `C^N` onto the first `dim` coordinates.
    pub projection: Matrix,
    /// `sigma_max / sigma_min` of the matrix with columns `u_n`.
    pub condition_number: f64,
    source_dim: usize,
}

impl RieszDilation {
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// `P v` read in the coordinates of the dilated space `H`.
    pub fn compress(&self, v: &Vector) -> Vector {
        (&self.projection * v).rows(0, self.source_dim).into_owned()
    }

    /// `max_{i,j} |<u_i, u_j^*> - δ_ij|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let u = self.riesz.synthesis_operator();
        let ud = self.riesz_dual.synthesis_operator();
        let gram = ud.adjoint() * u;
        (gram - identity(self.riesz.len()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max_n |P u_n - x_n|` and `max_n |P u_n^* - y_n|`.
    pub fn compression_residuals(&self, x: &Frame, y: &Frame) -> (f64, f64) {
        let side = |basis: &Frame, target: &Frame| {
            basis
                .vectors()
                .iter()
                .zip(target.vectors())
                .map(|(u, t)| (self.compress(u) - t).norm())
                .fold(0.0, f64::max)
        };
        (side(&self.riesz, x), side(&self.riesz_dual, y))
    }

    /// `|U^* U - I|` for the matrix with columns `u_n`.
    pub fn orthonormality_residual(&self) -> f64 {
        let u = self.riesz.synthesis_operator();
        spectral_norm(&(u.adjoint() * &u - identity(self.riesz.len())))
    }
}

/// Dilate a dual frame pair to a Riesz basis and its dual.
///
/// With `X`, `Y` the synthesis operators (`dim x N`, `X Y^* = I`) and `C`
/// an orthonormal completion of `range(Y^*)`, the vectors `u_n` are the
/// columns of `G = [X; C^*]` and `u_n^*` the columns of
/// `[Y; C^* (I - Y^* X)^*]`, which is `G^{-*}`.
pub fn dilate_dual_pair_to_riesz(x: &Frame, y: &Frame) -> Result<RieszDilation> {
    let residual = pairing_residual(x, y)?;
    if residual > DUAL_PAIR_TOL {
        return Err(Error::NotDualPair { residual });
    }
    let (dim, count) = (x.dim(), x.len());
    let xs = x.synthesis_operator();
    let ys = y.synthesis_operator();
    let theta_y = ys.adjoint();
    let q = orthonormalize_columns(&theta_y);
    let c = orthonormal_completion(&q);
    let m = identity(count) - &theta_y * &xs;
    let dual_tail = c.adjoint() * m.adjoint();

    let mut g = Matrix::zeros(count, count);
    g.rows_mut(0, dim).copy_from(&xs);
    g.rows_mut(dim, count - dim).copy_from(&c.adjoint());
    let mut gd = Matrix::zeros(count, count);
    gd.rows_mut(0, dim).copy_from(&ys);
    gd.rows_mut(dim, count - dim).copy_from(&dual_tail);

    let sv = SortedSvd::new(&g).singular_values;
    let condition_number = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };

    let mut projection = Matrix::zeros(count, count);
    projection
        .view_mut((0, 0), (dim, dim))
        .copy_from(&identity(dim));

    let columns = |a: &Matrix| a.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>();
    Ok(RieszDilation {
        riesz: Frame::new(count, columns(&g))?,
        riesz_dual: Frame::new(count, columns(&gd))?,
        projection,
        condition_number,
        source_dim: dim,
    })
}

/// Dilate a Parseval frame to an orthonormal basis of `C^N`.
///
/// This is the dual-pair dilation of `(f, f)`; for a Parseval frame the
/// Riesz basis it produces is orthonormal and equals its own dual.
pub fn dilate_parseval_to_onb(f: &Frame) -> Result<RieszDilation> {
    let residual = f.parseval_residual();
    if residual > PARSEVAL_TOL {
        return Err(Error::NotParseval { residual });
    }
    dilate_dual_pair_to_riesz(f, f)
}

/// Modified Gram-Schmidt with reorthogonalization; columns below
/// `DEFAULT_RANK_TOL` relative norm are dropped.
fn orthonormalize_columns(a: &Matrix) -> Matrix {
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out: Vec<Vector> = Vec::new();
    for col in a.column_iter() {
        let mut v = col.into_owned();
        for _ in 0..2 {
            for b in &out {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n > DEFAULT_RANK_TOL * scale {
            out.push(v / Scalar::from(n));
        }
    }
    if out.is_empty() {
        Matrix::zeros(a.nrows(), 0)
    } else {
        Matrix::from_columns(&out)
    }
}

/// `A = sum_i left_i (x) right_i` with every partial sum bounded by `|A|`.
#[derive(Debug, Clone)]
pub struct RankOneDecomposition {
    pub terms: Vec<(Vector, Vector)>,
    pub source_norm: f64,
    /// Index of the source block each term came from.
    pub groups: Vec<usize>,
}

impl RankOneDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, i: usize) -> Matrix {
        let (l, r) = &self.terms[i];
        outer(l, r)
    }

    pub fn subset_sum(&self, mask: &SubsetMask, dim: usize) -> Matrix {
        mask.iter()
            .fold(Matrix::zeros(dim, dim), |acc, i| acc + self.term(i))
    }

    pub fn sum(&self, dim: usize) -> Matrix {
        self.subset_sum(&SubsetMask::full(self.len()), dim)
    }

    /// `max_I |sum_{i in I} Q_i|` over every subset of terms.
    pub fn max_subset_norm(&self, dim: usize) -> Result<f64> {
        let k = self.len();
        if k > MAX_EXHAUSTIVE_TERMS {
            return Err(Error::TooManyAtoms {
                atoms: k,
                limit: MAX_EXHAUSTIVE_TERMS,
            });
        }
        let terms: Vec<Matrix> = (0..k).map(|i| self.term(i)).collect();
        let mut best = 0.0_f64;
        for bits in 0..(1u64 << k) {
            let mut acc = Matrix::zeros(dim, dim);
            for (i, t) in terms.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    acc += t;
                }
            }
            best = best.max(spectral_norm(&acc));
        }
        Ok(best)
    }
}

/// Rank-one decomposition `Q_i = U x_i (x) x_i` from the polar
/// decomposition `A = U|A|` and `|A| = sum x_i (x) x_i`.
pub fn rank_one_decompose(a: &Matrix) -> Result<RankOneDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let polar = polar_decompose(a);
    let factor = psd_factor(&polar.p, DEFAULT_RANK_TOL)?;
    let terms = (0..factor.rank)
        .map(|k| {
            let x = factor.v.row(k).adjoint();
            (&polar.u * &x, x)
        })
        .collect::<Vec<_>>();
    Ok(RankOneDecomposition {
        groups: vec![0; terms.len()],
        terms,
        source_norm: spectral_norm(a),
    })
}

/// Concatenate the rank-one decompositions of blocks living on mutually
/// orthogonal coordinate sets.
pub fn assemble_block_decomposition(blocks: &[Matrix]) -> Result<RankOneDecomposition> {
    let dim = match blocks.first() {
        Some(b) => b.nrows(),
        None => return Err(Error::InvalidArgument("no blocks given".into())),
    };
    for b in blocks {
        if !b.is_square() || b.nrows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "block of shape {:?}, expected {dim}x{dim}",
                b.shape()
            )));
        }
    }
    let supports: Vec<Vec<bool>> = blocks.iter().map(coordinate_support).collect();
    for (i, si) in supports.iter().enumerate() {
        for (j, sj) in supports.iter().enumerate().skip(i + 1) {
            if si.iter().zip(sj).any(|(a, b)| *a && *b) {
                return Err(Error::OverlappingSupports {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let mut terms = Vec::new();
    let mut groups = Vec::new();
    let mut total = Matrix::zeros(dim, dim);
    for (n, b) in blocks.iter().enumerate() {
        let d = rank_one_decompose(b)?;
        groups.extend(std::iter::repeat_n(n, d.len()));
        terms.extend(d.terms);
        total += b;
    }
    Ok(RankOneDecomposition {
        terms,
        source_norm: spectral_norm(&total),
        groups,
    })
}

/// Coordinates touched by a block: rows or columns with an entry above
/// `1e-10 |A|`.
fn coordinate_support(a: &Matrix) -> Vec<bool> {
    let cutoff = DEFAULT_RANK_TOL * spectral_norm(a);
    (0..a.nrows())
        .map(|i| {
            a.row(i).iter().any(|z| z.norm() > cutoff)
                || a.column(i).iter().any(|z| z.norm() > cutoff)
        })
        .collect()
}
