//! Assembly of the second-order coarse-grained generator on a physical
//! subsystem, its time-domain reference evaluation, propagation and
//! semigroup certificates.
//!
//! With `M = L₀ - ⟨L₀⟩` (the `ω = 0` coarse-grained perturbation, centred)
//! the Heisenberg generator on `𝒳` is
//!
//! ```text
//! L(X) = i[⟨H₀⟩ + λ⟨H′⟩ + λ²Λ, X] - ½{λ²⟨M²⟩, X} + λ²⟨M X M⟩
//! ```
//!
//! The Lindblad pieces are defined on all of `B(ℋ)` and leave `𝒳`
//! invariant. The bundle stores `L ∘ P0`, so anything outside `𝒳` is
//! projected before the generator acts.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::coarse_grain::{
    centred, coarse_grained_l, lamb_shift, t_of_lambda, CoarseGrainSchedule,
};
use crate::error::{invalid, Error, Result};
use crate::mat::random::{random_density, random_hermitian, seeded};
use crate::mat::{
    choi_min_eigenvalue, hermitian_eig, identity, is_psd, kron, max_abs, max_abs_diff, nullspace,
    op_norm, trace_norm, write_matrix, write_matrix_list, ComplexMatrix, HermitianOperator,
    Superoperator, C64, PSD_SLACK, STRUCTURAL_TOL,
};
use crate::subsystem::{commutation_defect, PhysicalSubsystem};

/// The pieces of `L(X) = i[H, X] - ½{A, X} + Ψ(X)`, with
/// `H = h_free + h_first + h_lamb`, `A = decay` and
/// `Ψ(X) = Σ_k J_k† X J_k`.
#[derive(Clone, Debug)]
pub struct LindbladDecomposition {
    pub h_free: HermitianOperator,
    pub h_first: HermitianOperator,
    pub h_lamb: HermitianOperator,
    pub decay: HermitianOperator,
    pub jump_operators: Vec<ComplexMatrix>,
    pub jump_map: Superoperator,
}

impl LindbladDecomposition {
    pub fn new(
        h_free: HermitianOperator,
        h_first: HermitianOperator,
        h_lamb: HermitianOperator,
        decay: HermitianOperator,
        jump_operators: Vec<ComplexMatrix>,
    ) -> Self {
        let d = h_free.dim();
        let jump_map = Superoperator::kraus_heisenberg(d, &jump_operators);
        Self {
            h_free,
            h_first,
            h_lamb,
            decay,
            jump_operators,
            jump_map,
        }
    }

    pub fn dim(&self) -> usize {
        self.h_free.dim()
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        self.h_free.matrix() + self.h_first.matrix() + self.h_lamb.matrix()
    }

    /// Heisenberg generator as a superoperator.
    pub fn heisenberg(&self) -> Superoperator {
        let h = Superoperator::hamiltonian(&self.hamiltonian());
        let a = Superoperator::anticommutator(self.decay.matrix()).scale(C64::from(-0.5));
        &(&h + &a) + &self.jump_map
    }

    /// Only the second-order part `i[h_lamb, ·] - ½{decay, ·} + Ψ`.
    pub fn second_order(&self) -> Superoperator {
        let h = Superoperator::hamiltonian(self.h_lamb.matrix());
        let a = Superoperator::anticommutator(self.decay.matrix()).scale(C64::from(-0.5));
        &(&h + &a) + &self.jump_map
    }

    /// `L(X)` evaluated with matrix products only.
    pub fn apply_heisenberg(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let h = self.hamiltonian();
        let a = self.decay.matrix();
        let mut out = (&h * x - x * &h) * C64::i() - (a * x + x * a) * C64::from(0.5);
        for j in &self.jump_operators {
            out += j.adjoint() * x * j;
        }
        out
    }

    /// `max|Ψ(1) - A|`.
    pub fn jump_decay_residual(&self) -> f64 {
        let d = self.dim();
        max_abs_diff(&self.jump_map.apply(&identity(d)), self.decay.matrix())
    }
}

/// A generator together with its dual and the data it was built from.
///
/// `heisenberg` is `L ∘ P0`: operators outside `𝒳` are projected first.
/// `schrodinger` is its trace dual `P0_* ∘ L_*`.
#[derive(Clone, Debug)]
pub struct GeneratorBundle {
    pub decomposition: LindbladDecomposition,
    pub heisenberg: Superoperator,
    pub schrodinger: Superoperator,
    pub schedule: CoarseGrainSchedule,
    pub subsystem: Arc<PhysicalSubsystem>,
}

impl GeneratorBundle {
    pub fn from_parts(
        decomposition: LindbladDecomposition,
        schedule: CoarseGrainSchedule,
        subsystem: Arc<PhysicalSubsystem>,
    ) -> Result<Self> {
        if decomposition.dim() != subsystem.dim() {
            return Err(Error::DimensionMismatch(format!(
                "generator on dimension {} for subsystem of dimension {}",
                decomposition.dim(),
                subsystem.dim()
            )));
        }
        let heisenberg = decomposition
            .heisenberg()
            .compose(subsystem.heisenberg_projection());
        let schrodinger = heisenberg.trace_dual();
        Ok(Self {
            decomposition,
            heisenberg,
            schrodinger,
            schedule,
            subsystem,
        })
    }

    pub fn dim(&self) -> usize {
        self.subsystem.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.schedule.lambda
    }

    pub fn coarse_graining_time(&self) -> f64 {
        self.schedule.coarse_graining_time()
    }

    /// `λ² K_T` restricted to the image, i.e. composed with `P0`.
    pub fn second_order_on_image(&self) -> Superoperator {
        self.decomposition
            .second_order()
            .compose(self.subsystem.heisenberg_projection())
    }

    /// `max|L(1)|`.
    pub fn unitality_residual(&self) -> f64 {
        max_abs(&self.heisenberg.apply(&identity(self.dim())))
    }

    /// Heisenberg propagator `exp(tL) ∘ P0`.
    pub fn heisenberg_propagator(&self, t: f64) -> Superoperator {
        self.heisenberg
            .exp(t)
            .compose(self.subsystem.heisenberg_projection())
    }

    /// Schrödinger propagator `P0_* ∘ exp(tL_*)`.
    pub fn schrodinger_propagator(&self, t: f64) -> Superoperator {
        self.subsystem
            .schrodinger_projection()
            .compose(&self.schrodinger.exp(t))
    }

    /// Generator restricted to the image in the orthonormal basis `B` of
    /// `𝒳`: `B† L B`.
    pub fn reduced_heisenberg(&self) -> ComplexMatrix {
        let b = self.subsystem.basis_columns();
        b.adjoint() * (self.heisenberg.matrix() * &b)
    }

    /// Writes every Lindblad piece in the matrix interchange format plus a
    /// plain-text manifest.
    pub fn export(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let dec = &self.decomposition;
        let files: [(&str, &ComplexMatrix); 6] = [
            ("h_free.mat", dec.h_free.matrix()),
            ("h_first.mat", dec.h_first.matrix()),
            ("h_lamb.mat", dec.h_lamb.matrix()),
            ("decay.mat", dec.decay.matrix()),
            ("heisenberg.mat", self.heisenberg.matrix()),
            ("schrodinger.mat", self.schrodinger.matrix()),
        ];
        for (name, m) in files {
            std::fs::write(dir.join(name), write_matrix(m))?;
        }
        std::fs::write(dir.join("jump_operators.mat"), write_matrix_list(&dec.jump_operators))?;
        std::fs::write(dir.join("kraus.mat"), self.subsystem.kraus().to_text())?;
        let mut manifest = String::new();
        let s = &self.schedule;
        let _ = writeln!(manifest, "[schedule]");
        let _ = writeln!(manifest, "lambda = {:e}", s.lambda);
        let _ = writeln!(manifest, "xi = {:e}", s.xi);
        let _ = writeln!(manifest, "t_ref = {:e}", s.t_ref);
        let _ = writeln!(manifest, "coarse_graining_time = {:e}", self.coarse_graining_time());
        let _ = writeln!(manifest, "\n[dimensions]");
        let _ = writeln!(manifest, "hilbert = {}", self.dim());
        let _ = writeln!(manifest, "image = {}", self.subsystem.image_dim());
        let _ = writeln!(manifest, "\n[subsystem]");
        let _ = writeln!(manifest, "kraus_operators = {}", self.subsystem.kraus().len());
        let _ = writeln!(manifest, "kraus_file = \"kraus.mat\"");
        let _ = writeln!(manifest, "\n[files]");
        for (name, _) in files {
            let _ = writeln!(manifest, "{} = \"{name}\"", name.trim_end_matches(".mat"));
        }
        let _ = writeln!(manifest, "jump_operators = \"jump_operators.mat\"");
        std::fs::write(dir.join("manifest.toml"), manifest)?;
        Ok(())
    }
}

/// `max|[Z, P0]|` for `Z = i[H₀, ·]`.
pub fn free_commutation_defect(sub: &PhysicalSubsystem, h0: &HermitianOperator) -> f64 {
    commutation_defect(&Superoperator::hamiltonian(h0.matrix()), sub.heisenberg_projection())
}

fn check_inputs(
    sub: &PhysicalSubsystem,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
) -> Result<()> {
    let d = sub.dim();
    if h0.dim() != d || hp.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "subsystem acts on dimension {d}, H0 is {}, H' is {}",
            h0.dim(),
            hp.dim()
        )));
    }
    let witness = free_commutation_defect(sub, h0);
    if witness > STRUCTURAL_TOL * (1.0 + max_abs(h0.matrix())) {
        return Err(Error::NotCommuting { witness });
    }
    Ok(())
}

/// Builds the full generator for coupling `sched.lambda` at the
/// coarse-graining time `T(λ)` of the schedule.
pub fn build_generator(
    sub: Arc<PhysicalSubsystem>,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
    sched: &CoarseGrainSchedule,
) -> Result<GeneratorBundle> {
    let decomposition = build_decomposition(&sub, h0, hp, sched)?;
    GeneratorBundle::from_parts(decomposition, *sched, sub)
}

/// Lindblad pieces only, without forming `L ∘ P0` (useful for large `d`).
pub fn build_decomposition(
    sub: &PhysicalSubsystem,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
    sched: &CoarseGrainSchedule,
) -> Result<LindbladDecomposition> {
    let t = t_of_lambda(sched)?;
    check_inputs(sub, h0, hp)?;
    let lambda = sched.lambda;
    let eig = hermitian_eig(h0);

    let h_free = HermitianOperator::from_hermitian_part(&sub.project(h0.matrix()));
    let h_first =
        HermitianOperator::from_hermitian_part(&(sub.project(hp.matrix()) * C64::from(lambda)));
    let h_lamb = lamb_shift(&eig, hp, t, sub)?.scaled(lambda * lambda);

    // M = L₀ - ⟨L₀⟩ is the transform of the centred perturbation
    let k = HermitianOperator::from_hermitian_part(&centred(hp, sub));
    let m = coarse_grained_l(&eig, &k, t, 0.0)?.matrix;
    let j = crate::mat::hermitian_part(&m) * C64::from(lambda);
    let decay = HermitianOperator::from_hermitian_part(&sub.project(&(&j * &j)));
    let jump_operators: Vec<ComplexMatrix> =
        sub.kraus().operators().iter().map(|v| &j * v).collect();

    Ok(LindbladDecomposition::new(
        h_free,
        h_first,
        h_lamb,
        decay,
        jump_operators,
    ))
}

/// Settings for the time-domain evaluation of `K_T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleGrid {
    /// Number of trapezoid intervals on `[-8T, 8T]`.
    pub intervals: usize,
    /// Combine `intervals` and `2·intervals` to cancel the `h²` error term.
    pub richardson: bool,
}

impl OracleGrid {
    /// At least 400 intervals, refined until a step resolves the fastest
    /// Bohr frequency with phase increment ≤ 0.05 and the Gaussian with at
    /// least 50 steps per width.
    pub fn for_problem(t: f64, spectral_width: f64) -> Self {
        let mut h = t / 50.0;
        if spectral_width > 0.0 {
            h = h.min(0.05 / spectral_width);
        }
        let intervals = ((16.0 * t / h).ceil() as usize).max(400);
        Self {
            intervals,
            richardson: true,
        }
    }
}

/// `K_T` from its defining time-ordered double integral, on an automatic
/// grid (see [`OracleGrid::for_problem`]); returns `K_T ∘ P0`.
pub fn k_t_oracle(
    sub: &PhysicalSubsystem,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
    t: f64,
) -> Result<Superoperator> {
    let eig = hermitian_eig(h0);
    let width = eig.eigenvalues.last().copied().unwrap_or(0.0)
        - eig.eigenvalues.first().copied().unwrap_or(0.0);
    k_t_oracle_with_grid(sub, h0, hp, t, OracleGrid::for_problem(t, width))
}

/// Time-domain `K_T ∘ P0`.
///
/// For `X ∈ 𝒳` the inner integral is accumulated as a running trapezoid
/// sum `D(t₁) = ∫_{-8T}^{t₁} g(t₂) (H′ - ⟨H′⟩)(t₂) dt₂`, so that
/// `K_T X = -(√π T)^{-1} P0 ∫ g(t₁) [H′(t₁), [D(t₁), X]] dt₁` with
/// `g(t) = e^{-t²/2T²}`. The nested rule is the triangle trapezoid of the
/// double integral, with the diagonal carrying half weight.
pub fn k_t_oracle_with_grid(
    sub: &PhysicalSubsystem,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
    t: f64,
    grid: OracleGrid,
) -> Result<Superoperator> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("T", format!("coarse-graining time must be positive, got {t}")));
    }
    if grid.intervals < 2 {
        return Err(invalid("intervals", "oracle grid needs at least two intervals"));
    }
    check_inputs(sub, h0, hp)?;
    let coarse = oracle_kernel(sub, h0, hp, t, grid.intervals)?;
    let s = if grid.richardson {
        let fine = oracle_kernel(sub, h0, hp, t, 2 * grid.intervals)?;
        (fine * C64::from(4.0) - coarse) / C64::from(3.0)
    } else {
        coarse
    };
    let p0 = sub.heisenberg_projection();
    let s = Superoperator::new(sub.dim(), s * C64::from(-1.0 / (PI.sqrt() * t)))?;
    Ok(p0.compose(&s).compose(p0))
}

/// Un-normalized `Σ_i w_i [F_i, [D_i, ·]]` as a `d²×d²` matrix.
fn oracle_kernel(
    sub: &PhysicalSubsystem,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
    t: f64,
    intervals: usize,
) -> Result<ComplexMatrix> {
    let d = sub.dim();
    let eig = hermitian_eig(h0);
    let e = &eig.eigenvalues;
    let hp_e = eig.to_eigenbasis(hp.matrix());
    let k_e = eig.to_eigenbasis(&centred(hp, sub));
    let u = &eig.eigenvectors;
    let ut = u.adjoint();
    let rotate = |x_e: &ComplexMatrix, s: f64| -> ComplexMatrix {
        // H′(s) = e^{-iH₀s} H′ e^{iH₀s}: entries pick up e^{-iΔ_mn s}
        let xs = ComplexMatrix::from_fn(d, d, |m, n| {
            x_e[(m, n)] * C64::from_polar(1.0, -(e[m] - e[n]) * s)
        });
        u * xs * &ut
    };
    let gauss = |s: f64| (-s * s / (2.0 * t * t)).exp();
    let a = -8.0 * t;
    let h = 16.0 * t / intervals as f64;

    let n = d * d;
    let id = identity(d);
    let mut left = ComplexMatrix::zeros(d, d); // Σ w F D
    let mut right = ComplexMatrix::zeros(d, d); // Σ w D F
    let mut sandwich = ComplexMatrix::zeros(n, n); // Σ w (Dᵀ⊗F + Fᵀ⊗D)
    let mut running = ComplexMatrix::zeros(d, d);
    let mut prev_g = rotate(&k_e, a) * C64::from(gauss(a));
    for i in 0..=intervals {
        let s = a + h * i as f64;
        let gs = gauss(s);
        if i > 0 {
            let cur = rotate(&k_e, s) * C64::from(gs);
            running += (&prev_g + &cur) * C64::from(0.5 * h);
            prev_g = cur;
        }
        let w = if i == 0 || i == intervals { 0.5 * h } else { h };
        let f = rotate(&hp_e, s) * C64::from(gs * w);
        left += &f * &running;
        right += &running * &f;
        sandwich += kron(&running.transpose(), &f) + kron(&f.transpose(), &running);
    }
    Ok(kron(&id, &left) + kron(&right.transpose(), &id) - sandwich)
}

/// Picture in which a trajectory is propagated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub picture: Picture,
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    /// Set when the grid contains negative times; the exponential is still
    /// evaluated there but the result need not be positive.
    pub has_negative_times: bool,
}

/// Propagates an observable (Heisenberg) or a density matrix (Schrödinger)
/// on the given time grid.
pub fn evolve(
    bundle: &GeneratorBundle,
    state0: &HermitianOperator,
    times: &[f64],
    picture: Picture,
) -> Result<Trajectory> {
    let sub = &bundle.subsystem;
    if state0.dim() != bundle.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for generator of dimension {}",
            state0.dim(),
            bundle.dim()
        )));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("times", "time grid contains non-finite values"));
    }
    let x = state0.matrix();
    match picture {
        Picture::Heisenberg => {
            let residual = sub.image_residual(x);
            if residual > 1e-9 * (1.0 + max_abs(x)) {
                return Err(Error::OutsideImage { residual });
            }
        }
        Picture::Schrodinger => {
            crate::subsystem::check_density(state0, "initial state")?;
            let residual = sub.state_residual(x);
            if residual > 1e-9 {
                return Err(Error::OutsideImage { residual });
            }
        }
    }
    let gen = match picture {
        Picture::Heisenberg => &bundle.heisenberg,
        Picture::Schrodinger => &bundle.schrodinger,
    };
    let states = times.iter().map(|&t| gen.exp(t).apply(x)).collect();
    Ok(Trajectory {
        picture,
        times: times.to_vec(),
        states,
        has_negative_times: times.iter().any(|&t| t < 0.0),
    })
}

/// Checks at one sampled time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QdsSample {
    pub t: f64,
    /// Smallest eigenvalue of the Choi matrix of `exp(tL) ∘ P0`.
    pub min_choi_eigenvalue: f64,
    pub choi_psd: bool,
    /// `max|Φ_t(1) - 1|`.
    pub unitality_residual: f64,
    /// Largest `|Tr ρ(t) - Tr ρ(0)|` over sampled states.
    pub trace_deviation: f64,
    /// `max|Φ_{2t} - Φ_t Φ_t|`.
    pub semigroup_residual: f64,
    /// Largest singular value of `B† exp(tL) B` on the image.
    pub image_singular_max: f64,
    /// Largest `‖ρ(t)‖₁ - ‖ρ(0)‖₁` over sampled Hermitian inputs.
    pub trace_norm_growth: f64,
    /// Largest `‖Φ_t(X)‖ - ‖X‖` (operator norm) over sampled observables.
    pub op_norm_growth: f64,
    /// Smallest eigenvalue among evolved sampled density matrices.
    pub min_state_eigenvalue: f64,
}

impl QdsSample {
    pub fn passed(&self) -> bool {
        self.choi_psd
            && self.unitality_residual <= STRUCTURAL_TOL
            && self.trace_deviation <= 1e-9
            && self.semigroup_residual <= 1e-9
            && self.trace_norm_growth <= 1e-9
            && self.op_norm_growth <= 1e-9
    }
}

#[derive(Clone, Debug)]
pub struct QdsReport {
    pub samples: Vec<QdsSample>,
}

impl QdsReport {
    pub fn passed(&self) -> bool {
        self.samples.iter().all(QdsSample::passed)
    }
}

const CERTIFICATE_PROBES: usize = 6;

/// Complete positivity, unitality, trace preservation, semigroup law and
/// contraction of the semigroup at each sampled time.
pub fn qds_certificate(bundle: &GeneratorBundle, time_samples: &[f64]) -> QdsReport {
    qds_certificate_seeded(bundle, time_samples, CERTIFICATE_SEED)
}

const CERTIFICATE_SEED: u64 = 0x0d5_cafe;

/// Same as [`qds_certificate`], with probe states drawn from `seed`.
pub fn qds_certificate_seeded(bundle: &GeneratorBundle, time_samples: &[f64], seed: u64) -> QdsReport {
    let d = bundle.dim();
    let sub = &bundle.subsystem;
    let p0 = sub.heisenberg_projection();
    let b = sub.basis_columns();
    let mut rng = seeded(seed);
    let states: Vec<ComplexMatrix> = (0..CERTIFICATE_PROBES)
        .map(|_| sub.project_state(random_density(&mut rng, d).matrix()))
        .collect();
    let signed: Vec<ComplexMatrix> = (0..CERTIFICATE_PROBES)
        .map(|_| sub.project_state(random_hermitian(&mut rng, d).matrix()))
        .collect();
    let observables: Vec<ComplexMatrix> = (0..CERTIFICATE_PROBES)
        .map(|_| sub.project(random_hermitian(&mut rng, d).matrix()))
        .collect();
    let id = identity(d);

    let samples = time_samples
        .iter()
        .map(|&t| {
            let e_t = bundle.heisenberg.exp(t);
            let phi = e_t.compose(p0);
            let phi2 = bundle.heisenberg.exp(2.0 * t).compose(p0);
            let min_choi = choi_min_eigenvalue(&phi);
            let choi_scale = 1.0 + max_abs(phi.matrix());
            let dual = bundle.schrodinger.exp(t);
            let dual = sub.schrodinger_projection().compose(&dual);

            let mut trace_dev = 0.0_f64;
            let mut min_state = f64::INFINITY;
            for rho in &states {
                let out = dual.apply(rho);
                trace_dev = trace_dev.max((out.trace() - rho.trace()).norm());
                let h = HermitianOperator::from_hermitian_part(&out);
                min_state = min_state.min(is_psd(&h, 0.0).min_eigenvalue);
            }
            let mut tn_growth = f64::NEG_INFINITY;
            for x in states.iter().chain(&signed) {
                let out = dual.apply(x);
                tn_growth = tn_growth.max(trace_norm(&out) - trace_norm(x));
            }
            let mut op_growth = f64::NEG_INFINITY;
            for x in &observables {
                op_growth = op_growth.max(op_norm(&phi.apply(x)) - op_norm(x));
            }
            let reduced = b.adjoint() * (e_t.matrix() * &b);
            let image_singular_max = reduced
                .singular_values()
                .iter()
                .fold(0.0_f64, |a, &s| a.max(s));
            QdsSample {
                t,
                min_choi_eigenvalue: min_choi,
                choi_psd: min_choi >= -PSD_SLACK * choi_scale,
                unitality_residual: max_abs_diff(&phi.apply(&id), &id),
                trace_deviation: trace_dev,
                semigroup_residual: phi2.max_abs_diff(&phi.compose(&phi)),
                image_singular_max,
                trace_norm_growth: tn_growth,
                op_norm_growth: op_growth,
                min_state_eigenvalue: min_state,
            }
        })
        .collect();
    QdsReport { samples }
}

/// Stationary states of the Schrödinger generator on the image.
#[derive(Clone, Debug)]
pub struct SteadyState {
    /// Trace-one Hermitian representative (the first nullspace vector when
    /// the nullspace is degenerate).
    pub state: HermitianOperator,
    pub nullspace_dim: usize,
    /// Smallest kept over largest dropped singular value (relative to the
    /// largest); `∞` when nothing was dropped below machine precision.
    pub separation: f64,
    /// Nullspace dimension is one and well separated.
    pub unique: bool,
    /// The rank decision is numerically ambiguous.
    pub ambiguous: bool,
}

/// Relative singular-value cut for the stationary-state nullspace.
pub const STEADY_STATE_CUT: f64 = 1e-9;
/// Minimum separation between kept and dropped singular values for the
/// rank decision to be trusted.
pub const STEADY_STATE_SEPARATION: f64 = 1e3;

pub fn steady_state(bundle: &GeneratorBundle) -> Result<SteadyState> {
    let d = bundle.dim();
    let sub = &bundle.subsystem;
    let bs = sub.state_basis_columns();
    let reduced = bs.adjoint() * (bundle.schrodinger.matrix() * &bs);
    let ns = nullspace(&reduced, STEADY_STATE_CUT);
    if ns.dim() == 0 {
        return Err(Error::IllDeterminedNullspace {
            gap: ns.singular_values.last().copied().unwrap_or(0.0),
        });
    }
    let separation = if ns.largest_dropped > 0.0 {
        ns.smallest_kept / ns.largest_dropped
    } else {
        f64::INFINITY
    };
    let ambiguous = separation < STEADY_STATE_SEPARATION;
    // choose the null vector whose operator has the largest trace
    let candidates: Vec<ComplexMatrix> = ns
        .basis
        .iter()
        .map(|c| {
            let v = &bs * c;
            ComplexMatrix::from_column_slice(d, d, v.as_slice())
        })
        .collect();
    let rho = if candidates.len() == 1 {
        candidates[0].clone()
    } else {
        // a density matrix inside the nullspace: project the maximally
        // mixed state onto the span
        let target = identity(d) / C64::from(d as f64);
        candidates
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, c| acc + c * (c.adjoint() * &target).trace())
    };
    let tr = rho.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::InvalidState("stationary operator has zero trace".into()));
    }
    let mut state = crate::mat::hermitian_part(&(rho / tr));
    let tr = state.trace().re;
    state /= C64::from(tr);
    Ok(SteadyState {
        state: HermitianOperator::from_hermitian_part(&state),
        nullspace_dim: ns.dim(),
        separation,
        unique: ns.dim() == 1 && !ambiguous,
        ambiguous,
    })
}
