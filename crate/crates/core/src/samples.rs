//! Random test objects: measures, framings and low-rank matrices.

use rand::Rng;

use crate::dilation::Representation;
use crate::error::Result;
use crate::framings::Framing;
use crate::linalg::{eig_hermitian, identity, Matrix, Scalar};
use crate::ovm::Ovm;
use crate::rng::{gaussian, gaussian_matrix, gaussian_vector};
use crate::subset::SubsetMask;

/// Complex Gaussian atoms.
pub fn random_ovm(rng: &mut impl Rng, dim_in: usize, dim_out: usize, atoms: usize) -> Result<Ovm> {
    Ovm::new(
        dim_in,
        dim_out,
        (0..atoms).map(|_| gaussian_matrix(rng, dim_out, dim_in, true)).collect(),
    )
}

/// `S^{-1/2} G_j G_j^* S^{-1/2}` with `S = sum_j G_j G_j^*` and `G_j` of
/// random width in `1..=dim`. The widths are topped up so `S` is invertible.
pub fn random_positive_probability_ovm(rng: &mut impl Rng, dim: usize, atoms: usize) -> Result<Ovm> {
    let mut widths: Vec<usize> = (0..atoms).map(|_| rng.random_range(1..=dim)).collect();
    let mut short = dim.saturating_sub(widths.iter().sum());
    for w in widths.iter_mut() {
        let add = short.min(dim - *w);
        *w += add;
        short -= add;
    }
    let raw: Vec<Matrix> = widths
        .iter()
        .map(|&width| {
            let g = gaussian_matrix(rng, dim, width, true);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(Matrix::zeros(dim, dim), |acc, a| acc + a);
    let eig = eig_hermitian(&total)?;
    let mut inv_root = Matrix::zeros(dim, dim);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        inv_root += v * v.adjoint() * Scalar::from(1.0 / l.sqrt());
    }
    let atoms = raw
        .iter()
        .map(|a| {
            let e = &inv_root * a * &inv_root;
            (&e + e.adjoint()) * Scalar::from(0.5)
        })
        .collect();
    Ovm::new(dim, dim, atoms)
}

/// Random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> Matrix {
    gaussian_matrix(rng, dim, dim, true).qr().q()
}

/// Orthogonal projections onto the columns of a random unitary, each
/// column assigned to a random atom. Some atoms may be zero.
pub fn random_projection_valued_ovm(rng: &mut impl Rng, dim: usize, atoms: usize) -> Result<Ovm> {
    let u = random_unitary(rng, dim);
    let mut out = vec![Matrix::zeros(dim, dim); atoms];
    for k in 0..dim {
        let j = rng.random_range(0..atoms);
        let c = u.column(k);
        out[j] += c * c.adjoint();
    }
    Ovm::new(dim, dim, out)
}

/// A random frame `x` of `count >= dim` vectors with an alternate dual
/// `S^{-1} x + (I - X^* S^{-1} X) z`, rescaled pair by pair by random
/// positive factors.
pub fn random_framing(rng: &mut impl Rng, dim: usize, count: usize) -> Result<Framing> {
    assert!(count >= dim, "a framing of C^{dim} needs at least {dim} pairs");
    let x = gaussian_matrix(rng, dim, count, true);
    let s = &x * x.adjoint();
    let s_inv = crate::linalg::hermitian_inverse(&s)?;
    let kernel = identity(count) - x.adjoint() * &s_inv * &x;
    let z = gaussian_matrix(rng, dim, count, true);
    let y = &s_inv * &x + z * kernel;
    let pairs = (0..count)
        .map(|i| {
            let c = Scalar::from(rng.random_range(0.2..5.0));
            (x.column(i) * c, y.column(i) / c.conj())
        })
        .collect();
    Framing::new(dim, pairs)
}

/// `G_1 G_2^*` with both factors `dim x rank`.
pub fn random_low_rank(rng: &mut impl Rng, dim: usize, rank: usize) -> Matrix {
    gaussian_matrix(rng, dim, rank, true) * gaussian_matrix(rng, dim, rank, true).adjoint()
}

/// `terms` random terms with Gaussian coefficients and random subsets.
pub fn random_representation(rng: &mut impl Rng, m: &Ovm, terms: usize) -> Representation {
    let n = m.atom_count();
    let mut rep = Representation::default();
    for _ in 0..terms {
        let bools: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        rep.push(
            Scalar::new(gaussian(rng), gaussian(rng)),
            SubsetMask::from_bools(&bools),
            gaussian_vector(rng, m.dim_in(), true),
        );
    }
    rep
}
