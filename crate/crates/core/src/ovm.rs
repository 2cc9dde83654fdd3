//! Operator-valued measures on a finite atom set.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::framings::Framing;
use crate::linalg::{all_finite, eig_hermitian, identity, spectral_norm, Matrix, SortedSvd, Vector};
use crate::rng::sign;
use crate::subset::SubsetMask;

/// Largest atom count classified over every subset.
pub const EXHAUSTIVE_ATOM_LIMIT: usize = 16;
/// Random masks drawn by [`classify_sampled`].
pub const SAMPLED_MASKS: usize = 1000;

/// A measure `E(B) = sum_{i in B} atoms[i]` with values in
/// `dim_out x dim_in` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Ovm {
    dim_in: usize,
    dim_out: usize,
    atoms: Vec<Matrix>,
}

impl Ovm {
    pub fn new(dim_in: usize, dim_out: usize, atoms: Vec<Matrix>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("a measure needs at least one atom".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.shape() != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch(format!(
                    "atom {i} is {}x{}, expected {dim_out}x{dim_in}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if !all_finite(a) {
                return Err(Error::NonFinite("measure atom"));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            atoms,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[Matrix] {
        &self.atoms
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    /// Sum of the selected atoms, accumulated in index order from zero.
    pub fn evaluate(&self, b: &SubsetMask) -> Matrix {
        assert_eq!(b.len(), self.atom_count(), "mask length differs from atom count");
        b.iter().fold(Matrix::zeros(self.dim_out, self.dim_in), |acc, i| acc + &self.atoms[i])
    }

    /// [`Ovm::evaluate`] for a bit pattern over at most 64 atoms.
    pub fn evaluate_bits(&self, bits: u64) -> Matrix {
        let mut acc = Matrix::zeros(self.dim_out, self.dim_in);
        for (i, a) in self.atoms.iter().enumerate() {
            if bits >> i & 1 == 1 {
                acc += a;
            }
        }
        acc
    }

    pub fn total(&self) -> Matrix {
        self.evaluate(&SubsetMask::full(self.atom_count()))
    }

    /// Largest atom norm; the scale for relative rank cutoffs.
    pub fn scale(&self) -> f64 {
        self.atoms.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Numerical rank of each atom, counting singular values above
    /// `rel_tol * scale()`.
    pub fn atom_ranks(&self, rel_tol: f64) -> Vec<usize> {
        let cutoff = rel_tol * self.scale();
        self.atoms
            .iter()
            .map(|a| {
                SortedSvd::new(a)
                    .singular_values
                    .iter()
                    .filter(|&&s| s > cutoff)
                    .count()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OvmClassification {
    pub is_probability: bool,
    pub is_positive: bool,
    pub is_projection_valued: bool,
    pub is_spectral: bool,
    pub is_self_adjoint: bool,
    /// `max_B |E(B)|` over the examined subsets.
    pub ovm_norm: f64,
    pub norm_witness: SubsetMask,
    /// Whether subset-level checks ran on a sample rather than all subsets.
    pub sampled: bool,
}

/// Atom-level facts shared by both classification modes.
struct AtomFacts {
    is_probability: bool,
    is_positive: bool,
    is_self_adjoint: bool,
    is_spectral: bool,
}

/// `E(A)E(B) = E(A ∩ B)` for all `A, B` holds exactly when
/// `E_i E_j = δ_ij E_i` for all atom pairs, by bilinearity.
pub fn spectrality_residual(m: &Ovm) -> Option<f64> {
    if !m.is_square() {
        return None;
    }
    let n = m.atom_count();
    let residual = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst: f64 = 0.0;
            for j in 0..n {
                let mut prod = &m.atoms[i] * &m.atoms[j];
                if i == j {
                    prod -= &m.atoms[i];
                }
                worst = worst.max(spectral_norm(&prod));
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Some(residual)
}

fn atom_facts(m: &Ovm, tol: f64) -> AtomFacts {
    if !m.is_square() {
        return AtomFacts {
            is_probability: false,
            is_positive: false,
            is_self_adjoint: false,
            is_spectral: false,
        };
    }
    let is_probability = spectral_norm(&(m.total() - identity(m.dim_in))) <= tol;
    // Every E(B) is Hermitian (positive) iff every atom is.
    let is_self_adjoint = m
        .atoms
        .iter()
        .all(|a| spectral_norm(&(a - a.adjoint())) <= tol);
    let is_positive = is_self_adjoint
        && m.atoms.iter().all(|a| {
            eig_hermitian(a)
                .map(|e| e.eigenvalues.last().is_none_or(|&l| l >= -tol))
                .unwrap_or(false)
        });
    let is_spectral = spectrality_residual(m).is_some_and(|r| r <= tol);
    AtomFacts {
        is_probability,
        is_positive,
        is_self_adjoint,
        is_spectral,
    }
}

fn is_orthogonal_projection(e: &Matrix, tol: f64) -> bool {
    spectral_norm(&(e * e - e)) <= tol && spectral_norm(&(e - e.adjoint())) <= tol
}

/// Classify with every subset examined.
///
/// Positivity and self-adjointness reduce exactly to the atoms and
/// spectrality to atom pairs; projection values and the norm are checked
/// over all `2^n` subsets. Non-square measures get `false` for every
/// predicate. Residuals are compared with `tol` in absolute terms.
pub fn classify(m: &Ovm, tol: f64) -> Result<OvmClassification> {
    classify_with_limit(m, tol, EXHAUSTIVE_ATOM_LIMIT)
}

pub fn classify_with_limit(m: &Ovm, tol: f64, limit: usize) -> Result<OvmClassification> {
    let n = m.atom_count();
    if n > limit.min(40) {
        return Err(Error::TooManyAtoms {
            atoms: n,
            limit,
        });
    }
    let facts = atom_facts(m, tol);
    let square = m.is_square();
    let (norm, witness, projections) = (0..1u64 << n)
        .into_par_iter()
        .map(|bits| {
            let e = m.evaluate_bits(bits);
            let proj = !square || is_orthogonal_projection(&e, tol);
            (spectral_norm(&e), bits, proj)
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX, true),
            |a, b| {
                let keep_a = a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
                let (v, w) = if keep_a { (a.0, a.1) } else { (b.0, b.1) };
                (v, w, a.2 && b.2)
            },
        );
    Ok(OvmClassification {
        is_probability: facts.is_probability,
        is_positive: facts.is_positive,
        is_projection_valued: square && projections,
        is_spectral: facts.is_spectral,
        is_self_adjoint: facts.is_self_adjoint,
        ovm_norm: norm,
        norm_witness: SubsetMask::from_bits(n, witness),
        sampled: false,
    })
}

/// Classify on singletons, pairs and [`SAMPLED_MASKS`] random masks.
///
/// The atom-level predicates stay exact; projection values are also checked
/// on every atom pair, which already decides them. `ovm_norm` is a lower
/// bound.
pub fn classify_sampled(m: &Ovm, tol: f64, rng: &mut impl Rng) -> OvmClassification {
    let n = m.atom_count();
    let facts = atom_facts(m, tol);
    let square = m.is_square();
    let mut masks: Vec<SubsetMask> = Vec::new();
    masks.push(SubsetMask::full(n));
    for i in 0..n {
        masks.push(SubsetMask::from_indices(n, [i]));
        for j in i + 1..n {
            masks.push(SubsetMask::from_indices(n, [i, j]));
        }
    }
    for _ in 0..SAMPLED_MASKS {
        let bools: Vec<bool> = (0..n).map(|_| sign(rng)).collect();
        masks.push(SubsetMask::from_bools(&bools));
    }
    let mut norm = f64::NEG_INFINITY;
    let mut witness = SubsetMask::empty(n);
    let mut projections = square;
    for b in masks {
        let e = m.evaluate(&b);
        let v = spectral_norm(&e);
        if v > norm || (v == norm && b < witness) {
            norm = v;
            witness = b;
        }
        if projections && !is_orthogonal_projection(&e, tol) {
            projections = false;
        }
    }
    OvmClassification {
        is_probability: facts.is_probability,
        is_positive: facts.is_positive,
        is_projection_valued: projections,
        is_spectral: facts.is_spectral,
        is_self_adjoint: facts.is_self_adjoint,
        ovm_norm: norm,
        norm_witness: witness,
        sampled: true,
    }
}

/// Atoms `x_i (x) y_i`.
pub fn induced_from_framing(f: &Framing) -> Ovm {
    let atoms = (0..f.len()).map(|i| f.atom(i)).collect();
    Ovm::new(f.dim(), f.dim(), atoms).expect("a framing has pairs of matching length")
}

/// `a = x (x) y` from the leading singular pair, with `x` a unit vector whose
/// largest-modulus entry is real and positive. `None` when `a` has a second
/// singular value above `cutoff`; zero pairs when the first is at or below it.
pub fn factor_rank_one(a: &Matrix, cutoff: f64) -> Option<(Vector, Vector)> {
    let svd = SortedSvd::new(a);
    let above = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    match above {
        0 => Some((Vector::zeros(a.nrows()), Vector::zeros(a.ncols()))),
        1 => {
            let x = svd.u.column(0).into_owned();
            let y = svd.v_t.row(0).adjoint() * crate::linalg::Scalar::from(svd.singular_values[0]);
            Some((x, y))
        }
        _ => None,
    }
}

/// Recover a framing from a probability measure with atoms of rank at most
/// one. Ranks count singular values above `rel_tol` times the largest atom
/// norm.
pub fn framing_from_rank_one_ovm(m: &Ovm, rel_tol: f64) -> Result<Framing> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.dim_out,
            cols: m.dim_in,
        });
    }
    let residual = spectral_norm(&(m.total() - identity(m.dim_in)));
    if residual > crate::framings::DEFAULT_FRAMING_TOL {
        return Err(Error::NotProbability { residual });
    }
    let cutoff = rel_tol * m.scale();
    let mut pairs = Vec::with_capacity(m.atom_count());
    for (index, a) in m.atoms.iter().enumerate() {
        match factor_rank_one(a, cutoff) {
            Some(pair) => pairs.push(pair),
            None => {
                let rank = m.atom_ranks(rel_tol)[index];
                return Err(Error::AtomRankTooHigh { index, rank });
            }
        }
    }
    Framing::new(m.dim_in, pairs)
}

/// `E*(B) = E(B)^*`.
pub fn dual_ovm(m: &Ovm) -> Ovm {
    Ovm {
        dim_in: m.dim_out,
        dim_out: m.dim_in,
        atoms: m.atoms.iter().map(|a| a.adjoint()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framings::{example_e11, rescale_sqrt};
    use crate::linalg::{outer, Scalar};
    use crate::rng::{gaussian_matrix, seeded};

    fn e(dim: usize, k: usize) -> Vector {
        let mut v = Vector::zeros(dim);
        v[k] = Scalar::from(1.0);
        v
    }

    fn coordinate_ovm(dim: usize) -> Ovm {
        Ovm::new(dim, dim, (0..dim).map(|k| outer(&e(dim, k), &e(dim, k))).collect()).unwrap()
    }

    fn random_ovm(seed: u64, dim_in: usize, dim_out: usize, n: usize) -> Ovm {
        let mut rng = seeded(seed);
        Ovm::new(
            dim_in,
            dim_out,
            (0..n).map(|_| gaussian_matrix(&mut rng, dim_out, dim_in, true)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let m = random_ovm(1, 3, 2, 4);
        assert_eq!(m.evaluate(&SubsetMask::empty(4)), Matrix::zeros(2, 3));
        assert_eq!(coordinate_ovm(3).total(), identity(3));

        let f = example_e11(3).unwrap();
        let m = induced_from_framing(&f);
        let group2 = SubsetMask::from_indices(6, [1, 2]);
        assert_eq!(m.evaluate(&group2), outer(&e(3, 1), &e(3, 1)));
    }

    #[test]
    fn evaluate_bits_matches_mask() {
        let m = random_ovm(2, 2, 2, 5);
        for bits in 0..32u64 {
            assert_eq!(m.evaluate_bits(bits), m.evaluate(&SubsetMask::from_bits(5, bits)));
        }
    }

    #[test]
    fn classify_coordinate_projections() {
        let c = classify(&coordinate_ovm(2), 1e-12).unwrap();
        assert!(c.is_probability && c.is_positive && c.is_projection_valued);
        assert!(c.is_spectral && c.is_self_adjoint && !c.sampled);
        assert_eq!(c.ovm_norm, 1.0);
    }

    #[test]
    fn classify_halves_is_not_spectral() {
        let half = Matrix::from_element(1, 1, Scalar::from(0.5));
        let m = Ovm::new(1, 1, vec![half.clone(), half]).unwrap();
        let c = classify(&m, 1e-12).unwrap();
        assert!(c.is_probability && c.is_positive);
        assert!(!c.is_spectral && !c.is_projection_valued);
        assert_eq!(c.ovm_norm, 1.0);
        assert_eq!(c.norm_witness, SubsetMask::full(2));
    }

    #[test]
    fn classify_non_dual_framing() {
        // x_i = T e_i, y_i = T^{-*} e_i with T not unitary.
        let mut rng = seeded(4);
        let t = gaussian_matrix(&mut rng, 3, 3, true);
        let t_inv_adj = t.clone().try_inverse().unwrap().adjoint();
        let pairs = (0..3).map(|k| (&t * e(3, k), &t_inv_adj * e(3, k))).collect();
        let f = Framing::new(3, pairs).unwrap();
        let c = classify(&induced_from_framing(&f), 1e-9).unwrap();
        assert!(c.is_probability);
        assert!(!c.is_positive && !c.is_self_adjoint);
        // Idempotent atoms with E_i E_j = 0: spectral but not self-adjoint.
        assert!(c.is_spectral && !c.is_projection_valued);
    }

    #[test]
    fn classify_e11_is_positive() {
        let m = induced_from_framing(&example_e11(3).unwrap());
        let c = classify(&m, 1e-12).unwrap();
        assert!(c.is_probability && c.is_positive && c.is_self_adjoint);
        assert!(!c.is_spectral);
    }

    #[test]
    fn classify_non_square() {
        let c = classify(&random_ovm(3, 2, 3, 3), 1e-9).unwrap();
        assert!(!c.is_probability && !c.is_positive && !c.is_projection_valued);
        assert!(!c.is_spectral && !c.is_self_adjoint);
        assert!(c.ovm_norm > 0.0);
    }

    #[test]
    fn classify_limit() {
        let m = random_ovm(5, 1, 1, 17);
        assert_eq!(
            classify(&m, 1e-9).unwrap_err(),
            Error::TooManyAtoms {
                atoms: 17,
                limit: 16
            }
        );
        let c = classify_sampled(&coordinate_ovm(20), 1e-12, &mut seeded(0));
        assert!(c.sampled && c.is_projection_valued && c.is_spectral);
        assert_eq!(c.ovm_norm, 1.0);
    }

    #[test]
    fn sampled_agrees_on_small_measures() {
        let m = random_ovm(6, 2, 2, 6);
        let a = classify(&m, 1e-9).unwrap();
        let b = classify_sampled(&m, 1e-9, &mut seeded(1));
        assert!(b.ovm_norm <= a.ovm_norm);
        assert_eq!(a.is_spectral, b.is_spectral);
        assert_eq!(a.is_positive, b.is_positive);
    }

    #[test]
    fn framing_round_trip() {
        let f = example_e11(3).unwrap();
        let m = induced_from_framing(&f);
        let g = framing_from_rank_one_ovm(&m, 1e-10).unwrap();
        let m2 = induced_from_framing(&g);
        for (a, b) in m.atoms().iter().zip(m2.atoms()) {
            assert!(spectral_norm(&(a - b)) <= 1e-10);
        }
        let std = framing_from_rank_one_ovm(&coordinate_ovm(3), 1e-10).unwrap();
        for (k, (x, y)) in std.pairs().iter().enumerate() {
            assert!((x - e(3, k)).norm() < 1e-15 && (y - e(3, k)).norm() < 1e-15);
        }
    }

    #[test]
    fn rank_one_factor_example() {
        let a = outer(&e(2, 0), &(e(2, 0) + e(2, 1)));
        let (x, y) = factor_rank_one(&a, 1e-12).unwrap();
        assert!((x - e(2, 0)).norm() < 1e-15);
        assert!((y - (e(2, 0) + e(2, 1))).norm() < 1e-14);
    }

    #[test]
    fn rank_two_atom_rejected() {
        let m = Ovm::new(2, 2, vec![identity(2)]).unwrap();
        assert_eq!(
            framing_from_rank_one_ovm(&m, 1e-10).unwrap_err(),
            Error::AtomRankTooHigh { index: 0, rank: 2 }
        );
        let half = Ovm::new(2, 2, vec![identity(2) * Scalar::from(0.5)]).unwrap();
        assert!(matches!(
            framing_from_rank_one_ovm(&half, 1e-10),
            Err(Error::NotProbability { .. })
        ));
    }

    #[test]
    fn zero_atoms_give_zero_pairs() {
        let mut atoms = coordinate_ovm(2).atoms().to_vec();
        atoms.push(Matrix::zeros(2, 2));
        let f = framing_from_rank_one_ovm(&Ovm::new(2, 2, atoms).unwrap(), 1e-10).unwrap();
        assert_eq!(f.pairs()[2].0.norm(), 0.0);
    }

    #[test]
    fn rescaling_keeps_the_induced_measure() {
        let f = example_e11(4).unwrap();
        let r = rescale_sqrt(&f).unwrap();
        let g = r.plan.apply(&f).unwrap();
        let (m, m2) = (induced_from_framing(&f), induced_from_framing(&g));
        for (a, b) in m.atoms().iter().zip(m2.atoms()) {
            assert!(spectral_norm(&(a - b)) <= 1e-15);
        }
    }

    #[test]
    fn dual_examples() {
        let m = coordinate_ovm(2);
        assert_eq!(dual_ovm(&m), m);
        let off = Ovm::new(2, 2, vec![outer(&e(2, 0), &e(2, 1))]).unwrap();
        assert_eq!(dual_ovm(&off).atoms()[0], outer(&e(2, 1), &e(2, 0)));
        let r = random_ovm(8, 3, 2, 5);
        let d = dual_ovm(&r);
        assert_eq!((d.dim_in(), d.dim_out()), (2, 3));
        assert_eq!(dual_ovm(&d), r);
        for bits in 0..32u64 {
            let b = SubsetMask::from_bits(5, bits);
            assert_eq!(d.evaluate(&b), r.evaluate(&b).adjoint());
        }
    }
}
