//! Physical subsystems given by Kraus-form projections
//! `P0(X) = Σ_α V_α† X V_α`, their predual action, commutants and a
//! validator for the conditional-expectation axioms.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::mat::random::{random_complex, random_hermitian, seeded};
use crate::mat::{
    self, choi_matrix, columns, hermitian_eig, identity, is_psd, kron, max_abs, max_abs_diff,
    nullspace, range_basis, re, vectorize, ComplexMatrix, HermitianOperator, Superoperator, C64,
    PSD_SLACK, STRUCTURAL_TOL,
};

/// Largest dimension for which idempotence and commutation checks use full
/// superoperator products; above it they run on deterministic probes.
const FULL_PRODUCT_MAX_DIM: usize = 16;
const PROBE_COUNT: usize = 8;

/// Finite family of `d×d` Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausFamily {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausFamily {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| invalid("operators", "Kraus family must not be empty"))?;
        let dim = first.nrows();
        for (k, v) in operators.iter().enumerate() {
            if v.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {dim}x{dim}",
                    v.nrows(),
                    v.ncols()
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `P0(X) = Σ V† X V`.
    pub fn apply_heisenberg(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, v| {
                acc + v.adjoint() * x * v
            })
    }

    /// `ρ ↦ Σ V ρ V†`.
    pub fn apply_schrodinger(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, v| {
                acc + v * rho * v.adjoint()
            })
    }

    pub fn heisenberg_superop(&self) -> Superoperator {
        Superoperator::kraus_heisenberg(self.dim, &self.operators)
    }

    /// Interchange text: a count header followed by the operators.
    pub fn to_text(&self) -> String {
        mat::write_matrix_list(&self.operators)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::new(mat::read_matrix_list(text)?)
    }
}

/// Orthogonal projectors onto consecutive diagonal blocks.
pub fn sector_family(sector_dims: &[usize]) -> Result<KrausFamily> {
    if sector_dims.is_empty() {
        return Err(invalid("sector_dims", "at least one sector is required"));
    }
    if sector_dims.contains(&0) {
        return Err(invalid("sector_dims", "sector dimensions must be positive"));
    }
    let d: usize = sector_dims.iter().sum();
    let mut start = 0;
    let ops = sector_dims
        .iter()
        .map(|&n| {
            let p = ComplexMatrix::from_fn(d, d, |i, j| {
                if i == j && i >= start && i < start + n {
                    re(1.0)
                } else {
                    C64::default()
                }
            });
            start += n;
            p
        })
        .collect();
    KrausFamily::new(ops)
}

/// Index ranges of the blocks produced by [`sector_family`].
pub fn sector_ranges(sector_dims: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    sector_dims
        .iter()
        .map(|&n| {
            let r = start..start + n;
            start += n;
            r
        })
        .collect()
}

/// Kraus family `V_ab = 1_A ⊗ √ω |φ_b⟩⟨φ_a|` built in the eigenbasis of
/// the bath state `ω` (ascending eigenvalues, zero eigenvalues kept). Its
/// predual action is `ρ ↦ Tr_B(ρ) ⊗ ω`.
pub fn partial_trace_family(dim_a: usize, bath_state: &HermitianOperator) -> Result<KrausFamily> {
    if dim_a == 0 {
        return Err(invalid("dim_a", "system dimension must be positive"));
    }
    check_density(bath_state, "bath state")?;
    let eig = hermitian_eig(bath_state);
    let db = bath_state.dim();
    let id_a = identity(dim_a);
    let mut ops = Vec::with_capacity(db * db);
    for a in 0..db {
        for b in 0..db {
            let weight = eig.eigenvalues[b].max(0.0).sqrt();
            let phi_b = eig.eigenvectors.column(b);
            let phi_a = eig.eigenvectors.column(a);
            let outer = (phi_b * phi_a.adjoint()) * re(weight);
            ops.push(kron(&id_a, &outer));
        }
    }
    KrausFamily::new(ops)
}

pub(crate) fn check_density(rho: &HermitianOperator, what: &str) -> Result<()> {
    let tr = rho.matrix().trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!("{what} has trace {tr}, expected 1")));
    }
    let psd = is_psd(rho, 1e-12);
    if !psd.is_psd {
        return Err(Error::InvalidState(format!(
            "{what} is not positive semidefinite (min eigenvalue {:.3e})",
            psd.min_eigenvalue
        )));
    }
    Ok(())
}

/// `Tr_B` of an operator on `ℋ_A ⊗ ℋ_B`.
pub fn partial_trace_b(rho: &ComplexMatrix, dim_a: usize, dim_b: usize) -> ComplexMatrix {
    assert_eq!(rho.shape(), (dim_a * dim_b, dim_a * dim_b));
    ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
        (0..dim_b).map(|b| rho[(i * dim_b + b, j * dim_b + b)]).sum()
    })
}

/// A conditional expectation `P0` together with its predual and an
/// orthonormal (Hilbert–Schmidt) basis of its image `𝒳`.
#[derive(Clone, Debug)]
pub struct PhysicalSubsystem {
    kraus: KrausFamily,
    heisenberg_projection: Superoperator,
    schrodinger_projection: Superoperator,
    /// Orthonormal basis of the image of `P0`; for a genuine conditional
    /// expectation this is the commutant of the Kraus family.
    commutant_basis: Vec<ComplexMatrix>,
    /// Orthonormal basis of the image of the predual projection.
    state_basis: Vec<ComplexMatrix>,
}

/// Builds both projections and an image basis. Rejects non-unital and
/// non-idempotent families.
pub fn build_projection(kraus: &KrausFamily) -> Result<PhysicalSubsystem> {
    let d = kraus.dim();
    let unit = kraus.apply_heisenberg(&identity(d));
    let witness = max_abs_diff(&unit, &identity(d));
    if witness > STRUCTURAL_TOL {
        return Err(Error::NotUnital { witness });
    }
    let p0 = kraus.heisenberg_superop();
    let witness = idempotence_defect(&p0);
    if witness > STRUCTURAL_TOL * (1.0 + max_abs(p0.matrix())) {
        return Err(Error::NotIdempotent { witness });
    }
    // trace of a projection is its rank
    let rank_f = p0.matrix().trace().re;
    let rank = rank_f.round() as usize;
    if (rank_f - rank as f64).abs() > 1e-6 || rank == 0 {
        return Err(Error::NotIdempotent {
            witness: (rank_f - rank as f64).abs(),
        });
    }
    let schrodinger = p0.trace_dual();
    let to_mats = |vs: Vec<mat::ComplexVector>| -> Vec<ComplexMatrix> {
        vs.iter()
            .map(|v| ComplexMatrix::from_column_slice(d, d, v.as_slice()))
            .collect()
    };
    let (basis, _) = range_basis(p0.matrix(), rank);
    let (state_basis, _) = range_basis(schrodinger.matrix(), rank);
    Ok(PhysicalSubsystem {
        kraus: kraus.clone(),
        heisenberg_projection: p0,
        schrodinger_projection: schrodinger,
        commutant_basis: to_mats(basis),
        state_basis: to_mats(state_basis),
    })
}

fn idempotence_defect(p0: &Superoperator) -> f64 {
    let d = p0.dim();
    if d <= FULL_PRODUCT_MAX_DIM {
        return p0.compose(p0).max_abs_diff(p0);
    }
    let mut rng = seeded(0x5eed_1de0);
    (0..PROBE_COUNT)
        .map(|_| {
            let x = random_complex(&mut rng, d, d);
            let once = p0.apply(&x);
            max_abs_diff(&p0.apply(&once), &once)
        })
        .fold(0.0, f64::max)
}

/// `max‖[S, P0]‖` for a superoperator commuting (or not) with the projection.
pub fn commutation_defect(s: &Superoperator, p0: &Superoperator) -> f64 {
    let d = p0.dim();
    if d <= FULL_PRODUCT_MAX_DIM {
        return s.compose(p0).max_abs_diff(&p0.compose(s));
    }
    let mut rng = seeded(0xc0_ffee);
    (0..PROBE_COUNT)
        .map(|_| {
            let x = random_complex(&mut rng, d, d);
            max_abs_diff(&s.apply(&p0.apply(&x)), &p0.apply(&s.apply(&x)))
        })
        .fold(0.0, f64::max)
}

impl PhysicalSubsystem {
    /// The whole algebra (`P0 = id`).
    pub fn full_algebra(d: usize) -> Self {
        build_projection(&KrausFamily::new(vec![identity(d)]).expect("identity family"))
            .expect("identity is a conditional expectation")
    }

    pub fn dim(&self) -> usize {
        self.kraus.dim()
    }

    /// Dimension of `𝒳` as a vector space.
    pub fn image_dim(&self) -> usize {
        self.commutant_basis.len()
    }

    pub fn kraus(&self) -> &KrausFamily {
        &self.kraus
    }

    pub fn heisenberg_projection(&self) -> &Superoperator {
        &self.heisenberg_projection
    }

    pub fn schrodinger_projection(&self) -> &Superoperator {
        &self.schrodinger_projection
    }

    pub fn commutant_basis(&self) -> &[ComplexMatrix] {
        &self.commutant_basis
    }

    pub fn state_basis(&self) -> &[ComplexMatrix] {
        &self.state_basis
    }

    /// `d² × dim 𝒳` matrix whose columns are the vectorized basis.
    pub fn basis_columns(&self) -> ComplexMatrix {
        let vs: Vec<_> = self.commutant_basis.iter().map(vectorize).collect();
        columns(&vs, self.dim() * self.dim())
    }

    pub fn state_basis_columns(&self) -> ComplexMatrix {
        let vs: Vec<_> = self.state_basis.iter().map(vectorize).collect();
        columns(&vs, self.dim() * self.dim())
    }

    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.heisenberg_projection.apply(x)
    }

    pub fn project_state(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.schrodinger_projection.apply(rho)
    }

    /// `max|P0(X) - X|`; zero exactly for members of `𝒳`.
    pub fn image_residual(&self, x: &ComplexMatrix) -> f64 {
        max_abs_diff(&self.project(x), x)
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.image_residual(x) <= tol * (1.0 + max_abs(x))
    }

    pub fn state_residual(&self, rho: &ComplexMatrix) -> f64 {
        max_abs_diff(&self.project_state(rho), rho)
    }

    /// Largest commutator of an image basis element with any `V` or `V†`.
    pub fn commutation_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for b in &self.commutant_basis {
            for v in self.kraus.operators() {
                worst = worst.max(max_abs(&mat::commutator(v, b)));
                worst = worst.max(max_abs(&mat::commutator(&v.adjoint(), b)));
            }
        }
        worst
    }
}

/// Orthonormal basis of `{X : [V_α, X] = [V_α†, X] = 0 ∀α}` from the
/// nullspace of the stacked commutator superoperators.
pub fn commutant(kraus: &KrausFamily) -> Result<Vec<ComplexMatrix>> {
    let d = kraus.dim();
    let n = d * d;
    let id = identity(d);
    let blocks = 2 * kraus.len();
    let mut stacked = ComplexMatrix::zeros(blocks * n, n);
    for (k, v) in kraus.operators().iter().enumerate() {
        for (s, op) in [v.clone(), v.adjoint()].iter().enumerate() {
            let c = kron(&id, op) - kron(&op.transpose(), &id);
            stacked.rows_mut((2 * k + s) * n, n).copy_from(&c);
        }
    }
    let ns = nullspace(&stacked, 1e-9);
    if ns.smallest_kept < 1e-6 {
        return Err(Error::IllDeterminedNullspace {
            gap: ns.smallest_kept,
        });
    }
    Ok(ns
        .basis
        .iter()
        .map(|v| ComplexMatrix::from_column_slice(d, d, v.as_slice()))
        .collect())
}

/// Outcome of one axiom check; `witness` is the largest violation seen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxiomCheck {
    pub passed: bool,
    pub witness: f64,
}

impl AxiomCheck {
    fn within(witness: f64, tol: f64) -> Self {
        Self {
            passed: witness <= tol,
            witness,
        }
    }
}

/// Per-axiom report of the conditional-expectation validator.
#[derive(Clone, Copy, Debug)]
pub struct ValidationReport {
    /// `P0(X†) = P0(X)†`.
    pub adjointness: AxiomCheck,
    /// `P0(X) = X ⇔ X ∈ 𝒳`.
    pub fixed_points: AxiomCheck,
    /// Choi matrix of `P0` is PSD; the witness is the minimum eigenvalue.
    pub complete_positivity: AxiomCheck,
    /// `P0(X₁ Y X₂) = X₁ P0(Y) X₂` for `X₁, X₂ ∈ 𝒳`.
    pub bimodule: AxiomCheck,
    /// Normality; automatic in finite dimension.
    pub normality: AxiomCheck,
    /// Image basis commutes with every `V` and `V†`.
    pub commutant: AxiomCheck,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.adjointness.passed
            && self.fixed_points.passed
            && self.complete_positivity.passed
            && self.bimodule.passed
            && self.normality.passed
            && self.commutant.passed
    }
}

fn random_image_element<R: Rng>(sub: &PhysicalSubsystem, rng: &mut R) -> ComplexMatrix {
    let d = sub.dim();
    let coeffs = random_complex(rng, sub.image_dim(), 1);
    sub.commutant_basis()
        .iter()
        .zip(coeffs.iter())
        .fold(ComplexMatrix::zeros(d, d), |acc, (b, c)| acc + b * *c)
}

pub fn validate_cppnce<R: Rng>(
    sub: &PhysicalSubsystem,
    sample_count: usize,
    rng: &mut R,
) -> ValidationReport {
    let d = sub.dim();
    let tol = STRUCTURAL_TOL;
    let mut adj = 0.0_f64;
    let mut fixed = 0.0_f64;
    let mut bimod = 0.0_f64;
    for b in sub.commutant_basis() {
        fixed = fixed.max(sub.image_residual(b));
    }
    for _ in 0..sample_count.max(1) {
        let x = random_complex(rng, d, d);
        let px = sub.project(&x);
        adj = adj.max(max_abs_diff(&sub.project(&x.adjoint()), &px.adjoint()));
        // the image of P0 must lie inside span(basis)
        let coeffs: Vec<C64> = sub
            .commutant_basis()
            .iter()
            .map(|b| (b.adjoint() * &px).trace())
            .collect();
        let in_span = sub
            .commutant_basis()
            .iter()
            .zip(&coeffs)
            .fold(ComplexMatrix::zeros(d, d), |acc, (b, c)| acc + b * *c);
        fixed = fixed.max(max_abs_diff(&in_span, &px) / (1.0 + max_abs(&x)));

        let x1 = random_image_element(sub, rng);
        let x2 = random_image_element(sub, rng);
        let lhs = sub.project(&(&x1 * &x * &x2));
        let rhs = &x1 * &px * &x2;
        bimod = bimod.max(max_abs_diff(&lhs, &rhs) / (1.0 + max_abs(&lhs)));
    }
    let choi = HermitianOperator::from_hermitian_part(&choi_matrix(sub.heisenberg_projection()));
    let psd = is_psd(&choi, PSD_SLACK);
    ValidationReport {
        adjointness: AxiomCheck::within(adj, tol),
        fixed_points: AxiomCheck::within(fixed, tol),
        complete_positivity: AxiomCheck {
            passed: psd.is_psd,
            witness: psd.min_eigenvalue,
        },
        bimodule: AxiomCheck::within(bimod, tol),
        normality: AxiomCheck {
            passed: true,
            witness: 0.0,
        },
        commutant: AxiomCheck::within(sub.commutation_residual(), tol),
    }
}

/// Unital, idempotent, completely positive family whose image
/// `span{F₁, F₂}` with `F₁ = diag(1, 0, ½)`, `F₂ = diag(0, 1, ½)` is not
/// closed under multiplication: `X ↦ ⟨0|X|0⟩F₁ + ⟨1|X|1⟩F₂`.
pub fn non_multiplicative_family() -> KrausFamily {
    let f: [[f64; 3]; 2] = [[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]];
    let mut ops = Vec::new();
    for (j, fj) in f.iter().enumerate() {
        for (m, &w) in fj.iter().enumerate() {
            if w > 0.0 {
                let mut v = ComplexMatrix::zeros(3, 3);
                v[(j, m)] = re(w.sqrt());
                ops.push(v);
            }
        }
    }
    KrausFamily::new(ops).expect("well-formed family")
}

/// Random Hermitian element of `𝒳` (used for sampled checks).
pub fn random_hermitian_in_image<R: Rng>(sub: &PhysicalSubsystem, rng: &mut R) -> ComplexMatrix {
    let h = random_hermitian(rng, sub.dim());
    mat::hermitian_part(&sub.project(h.matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::pauli;
    use crate::mat::random::random_density;

    fn gibbs_diag(energies: &[f64], beta: f64) -> HermitianOperator {
        let w: Vec<f64> = energies.iter().map(|e| (-beta * e).exp()).collect();
        let z: f64 = w.iter().sum();
        HermitianOperator::from_real_diagonal(&w.iter().map(|x| x / z).collect::<Vec<_>>())
    }

    #[test]
    fn dephasing_projection() {
        let fam = sector_family(&[1, 1]).unwrap();
        let sub = build_projection(&fam).unwrap();
        assert_eq!(sub.image_dim(), 2);
        let x = ComplexMatrix::from_row_slice(2, 2, &[re(1.0), re(2.0), re(3.0), re(4.0)]);
        let px = sub.project(&x);
        assert_eq!(px, ComplexMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(4.0)]));
        for b in sub.commutant_basis() {
            assert!(b[(0, 1)].norm() < 1e-15 && b[(1, 0)].norm() < 1e-15);
        }
        let c = commutant(&fam).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn identity_family_is_full_algebra() {
        let sub = PhysicalSubsystem::full_algebra(3);
        assert_eq!(sub.image_dim(), 9);
        assert_eq!(sub.heisenberg_projection(), &Superoperator::identity(3));
        let fam = KrausFamily::new(vec![identity(3)]).unwrap();
        assert_eq!(commutant(&fam).unwrap().len(), 9);
    }

    #[test]
    fn commutant_of_pauli_z() {
        let fam = KrausFamily::new(vec![pauli::z()]).unwrap();
        let c = commutant(&fam).unwrap();
        assert_eq!(c.len(), 2);
        for b in &c {
            assert!(b[(0, 1)].norm() < 1e-12 && b[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn commutant_of_two_plus_three_sectors() {
        let fam = sector_family(&[2, 3]).unwrap();
        let c = commutant(&fam).unwrap();
        assert_eq!(c.len(), 13);
        let sub = build_projection(&fam).unwrap();
        assert_eq!(sub.image_dim(), 13);
        // mutual containment: every commutant element is fixed by P0
        for b in &c {
            assert!(sub.image_residual(b) < 1e-9);
        }
    }

    #[test]
    fn sector_family_structure() {
        let fam = sector_family(&[2, 3, 3]).unwrap();
        assert_eq!(fam.dim(), 8);
        let sum = fam.operators().iter().fold(ComplexMatrix::zeros(8, 8), |a, v| a + v);
        assert_eq!(sum, identity(8));
        for (a, va) in fam.operators().iter().enumerate() {
            assert_eq!(va.adjoint(), *va);
            for (b, vb) in fam.operators().iter().enumerate() {
                let prod = va * vb;
                if a == b {
                    assert_eq!(prod, *vb);
                } else {
                    assert!(max_abs(&prod) == 0.0);
                }
            }
        }
        let f11 = sector_family(&[1, 1]).unwrap();
        assert_eq!(f11.operators()[0], HermitianOperator::from_real_diagonal(&[1.0, 0.0]).into_matrix());
        assert!(sector_family(&[]).is_err());
        assert!(sector_family(&[2, 0]).is_err());
    }

    #[test]
    fn partial_trace_family_pure_bath() {
        let omega = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let fam = partial_trace_family(2, &omega).unwrap();
        assert_eq!(fam.len(), 4);
        let sub = build_projection(&fam).unwrap();
        let mut rng = seeded(21);
        let rho = random_density(&mut rng, 4);
        let out = sub.project_state(rho.matrix());
        let expected = kron(&partial_trace_b(rho.matrix(), 2, 2), omega.matrix());
        assert!(max_abs_diff(&out, &expected) < 1e-12);
    }

    #[test]
    fn partial_trace_family_trivial_system() {
        let omega = gibbs_diag(&[0.0, 0.4, 1.1], 1.3);
        let sub = build_projection(&partial_trace_family(1, &omega).unwrap()).unwrap();
        let mut rng = seeded(22);
        let rho = random_density(&mut rng, 3);
        let out = sub.project_state(rho.matrix());
        assert!(max_abs_diff(&out, omega.matrix()) < 1e-12);
        assert_eq!(sub.image_dim(), 1);
    }

    #[test]
    fn partial_trace_family_gibbs_bath_against_brute_force() {
        let omega = gibbs_diag(&[0.0, 1.0, 2.0], 1.0);
        let fam = partial_trace_family(2, &omega).unwrap();
        assert_eq!(fam.len(), 9);
        let sub = build_projection(&fam).unwrap();
        let mut rng = seeded(23);
        for _ in 0..3 {
            let rho = random_complex(&mut rng, 6, 6);
            // brute force: explicit index loops
            let mut expected = ComplexMatrix::zeros(6, 6);
            for i in 0..2 {
                for j in 0..2 {
                    let mut tr = C64::default();
                    for b in 0..3 {
                        tr += rho[(i * 3 + b, j * 3 + b)];
                    }
                    for b1 in 0..3 {
                        for b2 in 0..3 {
                            expected[(i * 3 + b1, j * 3 + b2)] = tr * omega.matrix()[(b1, b2)];
                        }
                    }
                }
            }
            assert!(max_abs_diff(&sub.project_state(&rho), &expected) < 1e-12);
            assert!(max_abs_diff(&fam.apply_schrodinger(&rho), &expected) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_commutant_is_system_algebra() {
        let omega = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
        let fam = partial_trace_family(2, &omega).unwrap();
        let c = commutant(&fam).unwrap();
        assert_eq!(c.len(), 4);
        let sub = build_projection(&fam).unwrap();
        assert_eq!(sub.image_dim(), 4);
        for b in &c {
            // X ⊗ 1_B form: Tr_B(b)/2 ⊗ 1 reproduces b
            let xa = partial_trace_b(b, 2, 2) / re(2.0);
            assert!(max_abs_diff(&kron(&xa, &identity(2)), b) < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_bath_states() {
        let not_normalized = HermitianOperator::from_real_diagonal(&[0.5, 0.4]);
        assert!(matches!(partial_trace_family(2, &not_normalized), Err(Error::InvalidState(_))));
        let negative = HermitianOperator::from_real_diagonal(&[1.2, -0.2]);
        assert!(matches!(partial_trace_family(2, &negative), Err(Error::InvalidState(_))));
    }

    #[test]
    fn rejects_non_unital_and_non_idempotent() {
        let half = KrausFamily::new(vec![identity(2) * re(0.5)]).unwrap();
        assert!(matches!(build_projection(&half), Err(Error::NotUnital { .. })));
        let s = 1.0 / 3.0_f64.sqrt();
        let depol = KrausFamily::new(vec![identity(2) * re(s), pauli::x() * re(s), pauli::y() * re(s)]).unwrap();
        match build_projection(&depol) {
            Err(Error::NotIdempotent { witness }) => assert!(witness > 0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validator_accepts_scenario_families() {
        let mut rng = seeded(31);
        let deph = build_projection(&sector_family(&[1, 1]).unwrap()).unwrap();
        assert!(validate_cppnce(&deph, 8, &mut rng).all_passed());
        let omega = gibbs_diag(&[0.0, 1.0], 0.7);
        let pt = build_projection(&partial_trace_family(2, &omega).unwrap()).unwrap();
        let report = validate_cppnce(&pt, 8, &mut rng);
        assert!(report.all_passed(), "{report:?}");
        assert!(report.complete_positivity.witness > -1e-12);
    }

    #[test]
    fn validator_flags_non_multiplicative_image() {
        let sub = build_projection(&non_multiplicative_family()).unwrap();
        assert_eq!(sub.image_dim(), 2);
        let report = validate_cppnce(&sub, 8, &mut seeded(32));
        assert!(report.adjointness.passed);
        assert!(report.fixed_points.passed);
        assert!(report.complete_positivity.passed);
        assert!(!report.bimodule.passed);
        assert!(report.bimodule.witness > 1e-3);
        assert!(!report.commutant.passed);
    }

    #[test]
    fn projections_are_trace_dual() {
        let omega = gibbs_diag(&[0.0, 0.3, 0.9], 2.0);
        let sub = build_projection(&partial_trace_family(2, &omega).unwrap()).unwrap();
        let mut rng = seeded(33);
        let rho = random_complex(&mut rng, 6, 6);
        let x = random_complex(&mut rng, 6, 6);
        let lhs = (sub.project_state(&rho) * &x).trace();
        let rhs = (&rho * sub.project(&x)).trace();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn kraus_text_roundtrip() {
        let fam = sector_family(&[1, 2]).unwrap();
        assert_eq!(KrausFamily::from_text(&fam.to_text()).unwrap(), fam);
    }
}
