//! Dense complex linear algebra: Hermitian operators, eigensystems, the
//! matrix exponential, column-stacking vectorization and superoperators.
//!
//! Vectorization stacks columns, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. Every
//! superoperator in the crate, its trace dual and its Choi matrix follow
//! from that single convention.

mod io;
pub mod random;

use std::ops::{Add, Sub};

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub use io::{read_matrix, read_matrix_list, write_matrix, write_matrix_list};

pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative tolerance for structural identities.
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Absolute slack for positivity tests.
pub const PSD_SLACK: f64 = 1e-9;

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.trace()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &s| a.max(s))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Square complex matrix that equals its adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    /// Accepts `m` when `max|M - M†| <= 1e-12 (1 + max|M|)`; the stored
    /// matrix is the exact Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_square(&m, "Hermitian operator")?;
        check_finite(&m)?;
        let asymmetry = max_abs_diff(&m, &m.adjoint());
        if asymmetry > 1e-12 * (1.0 + max_abs(&m)) {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self(hermitian_part(&m)))
    }

    /// Symmetrizes `m` without checking how far from Hermitian it was.
    pub fn from_hermitian_part(m: &ComplexMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "Hermitian part of a non-square matrix");
        Self(hermitian_part(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(ComplexMatrix::from_fn(d, d, |i, j| if i == j { re(diag[i]) } else { C64::default() }))
    }

    pub fn identity(d: usize) -> Self {
        Self(identity(d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(ComplexMatrix::zeros(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.scale(c))
    }
}

impl AsRef<ComplexMatrix> for HermitianOperator {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Spectral decomposition `M = U diag(ε) U†` with ascending `ε`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U† X U`.
    pub fn to_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.eigenvectors.adjoint() * x * &self.eigenvectors
    }

    /// `U X U†`.
    pub fn from_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.eigenvectors * x * self.eigenvectors.adjoint()
    }

    /// `U f(ε) U†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let d = self.dim();
        let diag = ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j {
                f(self.eigenvalues[i])
            } else {
                C64::default()
            }
        });
        self.from_eigenbasis(&diag)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(re)
    }
}

pub fn hermitian_eig(m: &HermitianOperator) -> EigenSystem {
    let d = m.dim();
    if d == 0 {
        return EigenSystem {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let eig = m.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant (nalgebra's implementation).
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = check_square(m, "matrix exponential argument")?;
    check_finite(m)?;
    if m.iter().all(|z| *z == C64::default()) {
        return Ok(identity(d));
    }
    Ok(m.clone().exp())
}

pub fn vectorize(x: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_column_slice(x.as_slice())
}

pub fn devectorize(v: &ComplexVector, d: usize) -> Result<ComplexMatrix> {
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not a vectorized {d}x{d} matrix",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_column_slice(d, d, v.as_slice()))
}

/// Superoperator of `X ↦ A X B`.
pub fn sandwich_superop(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Superoperator> {
    let d = check_square(a, "left factor")?;
    if b.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "sandwich factors {}x{} and {}x{}",
            d,
            d,
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(Superoperator {
        dim: d,
        matrix: kron(&b.transpose(), a),
    })
}

/// Linear map on `d×d` matrices stored as a `d²×d²` matrix acting on
/// column-stacked vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on {dim}x{dim} matrices needs a {n}x{n} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                n = dim * dim
            )));
        }
        check_finite(&matrix)?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// Tabulates a linear map column by column on the matrix units.
    pub fn from_map(dim: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = dim * dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        let mut unit = ComplexMatrix::zeros(dim, dim);
        for col in 0..n {
            let (i, j) = (col % dim, col / dim);
            unit[(i, j)] = re(1.0);
            let image = f(&unit);
            matrix.column_mut(col).copy_from_slice(image.as_slice());
            unit[(i, j)] = C64::default();
        }
        Self { dim, matrix }
    }

    /// `X ↦ i[H, X]`.
    pub fn hamiltonian(h: &ComplexMatrix) -> Self {
        let d = h.nrows();
        let id = identity(d);
        let m = (kron(&id, h) - kron(&h.transpose(), &id)) * C64::i();
        Self { dim: d, matrix: m }
    }

    /// `X ↦ {A, X}`.
    pub fn anticommutator(a: &ComplexMatrix) -> Self {
        let d = a.nrows();
        let id = identity(d);
        Self {
            dim: d,
            matrix: kron(&id, a) + kron(&a.transpose(), &id),
        }
    }

    /// `X ↦ Σ K† X K`.
    pub fn kraus_heisenberg(dim: usize, ops: &[ComplexMatrix]) -> Self {
        let n = dim * dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for k in ops {
            add_kron_in_place(&mut matrix, &k.transpose(), &k.adjoint());
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.shape(), (self.dim, self.dim), "operand shape");
        let v = &self.matrix * vectorize(x);
        ComplexMatrix::from_column_slice(self.dim, self.dim, v.as_slice())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, other.dim, "composing superoperators of different dims");
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn scale(&self, c: C64) -> Superoperator {
        Self {
            dim: self.dim,
            matrix: &self.matrix * c,
        }
    }

    /// The map `S'` with `Tr(S'(ρ) X) = Tr(ρ S(X))` for all `ρ`, `X`.
    pub fn trace_dual(&self) -> Superoperator {
        let d = self.dim;
        let n = d * d;
        let t = |p: usize| (p % d) * d + p / d;
        let matrix = ComplexMatrix::from_fn(n, n, |p, q| self.matrix[(t(q), t(p))]);
        Self { dim: d, matrix }
    }

    /// `exp(t S)`.
    pub fn exp(&self, t: f64) -> Superoperator {
        let scaled = &self.matrix * re(t);
        Self {
            dim: self.dim,
            matrix: expm(&scaled).expect("superoperator matrices are square and finite"),
        }
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        assert_eq!(self.dim, rhs.dim);
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// `acc += a ⊗ b` without allocating the product.
fn add_kron_in_place(acc: &mut ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    for ja in 0..ac {
        for jb in 0..bc {
            let col = ja * bc + jb;
            for ia in 0..ar {
                let x = a[(ia, ja)];
                if x == C64::default() {
                    continue;
                }
                for ib in 0..br {
                    acc[(ia * br + ib, col)] += x * b[(ib, jb)];
                }
            }
        }
    }
}

/// `C = Σ_ij E_ij ⊗ S(E_ij)`.
pub fn choi_matrix(s: &Superoperator) -> ComplexMatrix {
    let d = s.dim;
    let m = &s.matrix;
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        m[(a + b * d, i + j * d)]
    })
}

/// Result of a positive-semidefiniteness test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// True iff `λ_min >= -tol (1 + ‖M‖)`.
pub fn is_psd(m: &HermitianOperator, tol: f64) -> PsdReport {
    let eig = hermitian_eig(m);
    let min_eigenvalue = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    PsdReport {
        is_psd: min_eigenvalue >= -tol * (1.0 + norm),
        min_eigenvalue,
    }
}

/// Smallest eigenvalue of the (Hermitian part of the) Choi matrix.
pub fn choi_min_eigenvalue(s: &Superoperator) -> f64 {
    let c = HermitianOperator::from_hermitian_part(&choi_matrix(s));
    is_psd(&c, 0.0).min_eigenvalue
}

/// Numerical nullspace with the rank decision exposed.
#[derive(Clone, Debug)]
pub struct Nullspace {
    /// Orthonormal basis vectors.
    pub basis: Vec<ComplexVector>,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    /// Smallest singular value counted as nonzero, relative to the largest.
    pub smallest_kept: f64,
    /// Largest singular value counted as zero, relative to the largest.
    pub largest_dropped: f64,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Right nullspace of `m`: singular values below `rel_cut · σ_max` count as
/// zero.
pub fn nullspace(m: &ComplexMatrix, rel_cut: f64) -> Nullspace {
    let n = m.ncols();
    // pad short matrices so that V† covers all of ℂⁿ
    let padded = if m.nrows() < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let smax = order.first().map(|&k| sv[k]).unwrap_or(0.0);
    let cut = rel_cut * smax;
    let mut basis = Vec::new();
    let mut smallest_kept = f64::INFINITY;
    let mut largest_dropped = 0.0_f64;
    let scale = if smax > 0.0 { smax } else { 1.0 };
    for &k in &order {
        if smax > 0.0 && sv[k] > cut {
            smallest_kept = smallest_kept.min(sv[k] / scale);
        } else {
            largest_dropped = largest_dropped.max(sv[k] / scale);
            basis.push(v_t.row(k).adjoint());
        }
    }
    Nullspace {
        basis,
        singular_values: order.iter().map(|&k| sv[k]).collect(),
        smallest_kept,
        largest_dropped,
    }
}

/// Orthonormal basis of the column space of `m` with known rank, by
/// column-pivoted modified Gram–Schmidt. Also returns the largest residual
/// column norm left after `rank` steps, relative to the largest column norm.
pub fn range_basis(m: &ComplexMatrix, rank: usize) -> (Vec<ComplexVector>, f64) {
    let ncols = m.ncols();
    let mut work: Vec<ComplexVector> = (0..ncols).map(|j| m.column(j).into_owned()).collect();
    let mut norms: Vec<f64> = work.iter().map(|c| c.norm_squared()).collect();
    let scale = norms.iter().fold(0.0_f64, |a, &b| a.max(b)).sqrt().max(f64::MIN_POSITIVE);
    let mut basis: Vec<ComplexVector> = Vec::with_capacity(rank);
    let mut used = vec![false; ncols];
    for _ in 0..rank.min(ncols) {
        let Some(p) = (0..ncols)
            .filter(|&j| !used[j])
            .max_by(|&a, &b| norms[a].total_cmp(&norms[b]))
        else {
            break;
        };
        used[p] = true;
        let mut q = work[p].clone();
        // second pass against accumulated rounding
        for b in &basis {
            let c = b.dotc(&q);
            q -= b * c;
        }
        let nq = q.norm();
        if nq == 0.0 {
            break;
        }
        q /= re(nq);
        for j in 0..ncols {
            if used[j] {
                continue;
            }
            let c = q.dotc(&work[j]);
            work[j] -= &q * c;
            norms[j] = work[j].norm_squared();
        }
        basis.push(q);
    }
    let residual = (0..ncols)
        .filter(|&j| !used[j])
        .map(|j| norms[j])
        .fold(0.0_f64, f64::max)
        .sqrt()
        / scale;
    (basis, residual)
}

/// Stacks basis vectors as columns.
pub fn columns(vs: &[ComplexVector], rows: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.column_mut(j).copy_from(v);
    }
    m
}

/// Pauli matrices, handy in tests and presets.
pub mod pauli {
    use super::{re, ComplexMatrix, C64};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[re(0.0), -C64::i(), C64::i(), re(0.0)])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random::{random_complex, random_hermitian, seeded};
    use std::f64::consts::PI;

    #[test]
    fn eig_diagonal_sorted() {
        let m = HermitianOperator::from_real_diagonal(&[3.0, 1.0]);
        let e = hermitian_eig(&m);
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        assert!((e.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((e.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_x() {
        let e = hermitian_eig(&HermitianOperator::new(pauli::x()).unwrap());
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = seeded(1);
        for d in [8, 17, 64] {
            let h = random_hermitian(&mut rng, d);
            let e = hermitian_eig(&h);
            let u = &e.eigenvectors;
            assert!(max_abs_diff(&(u.adjoint() * u), &identity(d)) < 1e-10);
            let res = max_abs_diff(&e.reconstruct(), h.matrix()) / max_abs(h.matrix());
            assert!(res < 1e-10, "d={d} residual {res}");
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn non_hermitian_rejected_with_witness() {
        let mut m = pauli::x();
        m[(0, 1)] = re(1.5);
        match HermitianOperator::new(m) {
            Err(Error::NotHermitian { asymmetry }) => assert!((asymmetry - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expm_zero_is_identity_exactly() {
        assert_eq!(expm(&ComplexMatrix::zeros(4, 4)).unwrap(), identity(4));
    }

    #[test]
    fn expm_pauli_rotation() {
        let a = pauli::x() * C64::new(0.0, PI / 2.0);
        let e = expm(&a).unwrap();
        let expected = pauli::x() * C64::i();
        assert!(max_abs_diff(&e, &expected) < 1e-13);
        // independent check by power series
        let mut term = identity(2);
        let mut sum = identity(2);
        for k in 1..40 {
            term = &term * &a / re(k as f64);
            sum += &term;
        }
        assert!(max_abs_diff(&e, &sum) < 1e-13);
    }

    #[test]
    fn expm_inverse_and_semigroup() {
        let mut rng = seeded(2);
        let a = random_complex(&mut rng, 6, 6);
        let prod = expm(&a).unwrap() * expm(&(-&a)).unwrap();
        assert!(max_abs_diff(&prod, &identity(6)) < 1e-9);
        let (s, t) = (0.3, 0.9);
        let lhs = expm(&(&a * re(s + t))).unwrap();
        let rhs = expm(&(&a * re(s))).unwrap() * expm(&(&a * re(t))).unwrap();
        assert!(max_abs_diff(&lhs, &rhs) < 1e-9 * (1.0 + max_abs(&lhs)));
    }

    #[test]
    fn expm_skew_hermitian_is_unitary() {
        let mut rng = seeded(3);
        let h = random_hermitian(&mut rng, 7);
        let u = expm(&(h.matrix() * C64::i())).unwrap();
        assert!(max_abs_diff(&(u.adjoint() * &u), &identity(7)) < 1e-10);
    }

    #[test]
    fn expm_rejects_rectangular() {
        assert!(matches!(
            expm(&ComplexMatrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sandwich_identity_and_pauli() {
        let s = sandwich_superop(&identity(3), &identity(3)).unwrap();
        assert_eq!(s, Superoperator::identity(3));
        let sx = sandwich_superop(&pauli::x(), &pauli::x()).unwrap();
        let out = devectorize(&(sx.matrix() * vectorize(&pauli::z())), 2).unwrap();
        assert!(max_abs_diff(&out, &(-pauli::z())) < 1e-15);
    }

    #[test]
    fn sandwich_matches_products() {
        let mut rng = seeded(4);
        let a = random_complex(&mut rng, 4, 4);
        let b = random_complex(&mut rng, 4, 4);
        let x = random_complex(&mut rng, 4, 4);
        let s = sandwich_superop(&a, &b).unwrap();
        assert!(max_abs_diff(&s.apply(&x), &(&a * &x * &b)) < 1e-12);
        assert!(sandwich_superop(&a, &ComplexMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn vectorize_roundtrip() {
        let mut rng = seeded(5);
        let x = random_complex(&mut rng, 5, 5);
        assert_eq!(devectorize(&vectorize(&x), 5).unwrap(), x);
        assert!(devectorize(&vectorize(&x), 4).is_err());
    }

    #[test]
    fn builders_agree_with_from_map() {
        let mut rng = seeded(6);
        let h = random_hermitian(&mut rng, 3);
        let k = random_complex(&mut rng, 3, 3);
        let direct = Superoperator::hamiltonian(h.matrix());
        let tab = Superoperator::from_map(3, |x| commutator(h.matrix(), x) * C64::i());
        assert!(direct.max_abs_diff(&tab) < 1e-13);
        let direct = Superoperator::anticommutator(&k);
        let tab = Superoperator::from_map(3, |x| anticommutator(&k, x));
        assert!(direct.max_abs_diff(&tab) < 1e-13);
        let direct = Superoperator::kraus_heisenberg(3, std::slice::from_ref(&k));
        let tab = Superoperator::from_map(3, |x| k.adjoint() * x * &k);
        assert!(direct.max_abs_diff(&tab) < 1e-13);
    }

    #[test]
    fn trace_dual_pairing() {
        let mut rng = seeded(7);
        let s = Superoperator::new(3, random_complex(&mut rng, 9, 9)).unwrap();
        let dual = s.trace_dual();
        let rho = random_complex(&mut rng, 3, 3);
        let x = random_complex(&mut rng, 3, 3);
        let lhs = (dual.apply(&rho) * &x).trace();
        let rhs = (&rho * s.apply(&x)).trace();
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(dual.trace_dual(), s);
    }

    #[test]
    fn choi_identity_map() {
        let c = choi_matrix(&Superoperator::identity(2));
        // 2 × projector onto (|00⟩ + |11⟩)/√2
        let mut expected = ComplexMatrix::zeros(4, 4);
        for (r, c2) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(r, c2)] = re(1.0);
        }
        assert_eq!(c, expected);
        let e = hermitian_eig(&HermitianOperator::new(c).unwrap());
        assert!(e.eigenvalues[..3].iter().all(|x| x.abs() < 1e-14));
        assert!((e.eigenvalues[3] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn choi_transpose_map_not_cp() {
        let t = Superoperator::from_map(2, |x| x.transpose());
        let c = HermitianOperator::new(choi_matrix(&t)).unwrap();
        let report = is_psd(&c, PSD_SLACK);
        assert!(!report.is_psd);
        assert!((report.min_eigenvalue + 1.0).abs() < 1e-14);
    }

    #[test]
    fn choi_unitary_conjugation_rank_one() {
        let mut rng = seeded(8);
        let u = random::random_unitary(&mut rng, 3);
        let s = Superoperator::kraus_heisenberg(3, &[u]);
        let c = HermitianOperator::new(choi_matrix(&s)).unwrap();
        let e = hermitian_eig(&c);
        assert!(is_psd(&c, PSD_SLACK).is_psd);
        let nonzero = e.eigenvalues.iter().filter(|x| x.abs() > 1e-10).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn psd_examples() {
        let r = is_psd(&HermitianOperator::identity(3), 1e-9);
        assert!(r.is_psd);
        assert_eq!(r.min_eigenvalue, 1.0);
        let r = is_psd(&HermitianOperator::from_real_diagonal(&[1.0, -1e-3]), 1e-9);
        assert!(!r.is_psd);
        assert!((r.min_eigenvalue + 1e-3).abs() < 1e-15);
    }

    #[test]
    fn nullspace_and_range() {
        let m = ComplexMatrix::from_row_slice(2, 3, &[re(1.0), re(0.0), re(0.0), re(0.0), re(2.0), re(0.0)]);
        let ns = nullspace(&m, 1e-9);
        assert_eq!(ns.dim(), 1);
        assert!((ns.basis[0][2].norm() - 1.0).abs() < 1e-14);
        let (basis, residual) = range_basis(&m, 2);
        assert_eq!(basis.len(), 2);
        assert!(residual < 1e-15);
    }
}
