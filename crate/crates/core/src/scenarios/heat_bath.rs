//! A system coupled to a finite thermal bath through `λ Q ⊗ Φ`, reduced by
//! the partial trace against the bath Gibbs state.

use std::sync::Arc;

use crate::coarse_grain::{gaussian_transform_eigenbasis, pv_gram, t_of_lambda, CoarseGrainSchedule};
use crate::error::{invalid, Error, Result};
use crate::generator::{
    build_generator, steady_state, GeneratorBundle, LindbladDecomposition, SteadyState,
};
use crate::mat::{
    hermitian_eig, identity, kron, max_abs_diff, trace_norm, ComplexMatrix, HermitianOperator,
    C64,
};
use crate::subsystem::{build_projection, partial_trace_family, PhysicalSubsystem};

#[derive(Clone, Debug)]
pub struct HeatBathModel {
    pub h_a: HermitianOperator,
    pub h_b: HermitianOperator,
    pub q: HermitianOperator,
    pub phi: HermitianOperator,
    pub beta: f64,
    pub schedule: CoarseGrainSchedule,
}

impl HeatBathModel {
    pub fn new(
        h_a: HermitianOperator,
        h_b: HermitianOperator,
        q: HermitianOperator,
        phi: HermitianOperator,
        beta: f64,
        schedule: CoarseGrainSchedule,
    ) -> Result<Self> {
        if q.dim() != h_a.dim() || phi.dim() != h_b.dim() {
            return Err(Error::DimensionMismatch(format!(
                "system {} / coupling {}, bath {} / coupling {}",
                h_a.dim(),
                q.dim(),
                h_b.dim(),
                phi.dim()
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", format!("inverse temperature must be finite and ≥ 0, got {beta}")));
        }
        schedule.validate()?;
        Ok(Self {
            h_a,
            h_b,
            q,
            phi,
            beta,
            schedule,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.h_a.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.h_b.dim()
    }

    pub fn with_schedule(&self, schedule: CoarseGrainSchedule) -> Self {
        Self {
            schedule,
            ..self.clone()
        }
    }

    pub fn bath_state(&self) -> HermitianOperator {
        gibbs_state(&self.h_b, self.beta)
    }

    /// `H_A ⊗ 1 + 1 ⊗ H_B`.
    pub fn free_hamiltonian(&self) -> HermitianOperator {
        let ia = identity(self.dim_a());
        let ib = identity(self.dim_b());
        HermitianOperator::from_hermitian_part(&(kron(self.h_a.matrix(), &ib) + kron(&ia, self.h_b.matrix())))
    }

    /// `Q ⊗ Φ`.
    pub fn interaction(&self) -> HermitianOperator {
        HermitianOperator::from_hermitian_part(&kron(self.q.matrix(), self.phi.matrix()))
    }

    pub fn subsystem(&self) -> Result<PhysicalSubsystem> {
        build_projection(&partial_trace_family(self.dim_a(), &self.bath_state())?)
    }
}

/// `e^{-βH}/Tr e^{-βH}`, computed from the spectrum with the ground energy
/// subtracted.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> HermitianOperator {
    let eig = hermitian_eig(h);
    let e0 = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let rho = eig.map_spectrum(|e| C64::from((-beta * (e - e0)).exp() / z));
    HermitianOperator::from_hermitian_part(&rho)
}

/// One spectral line `c e^{iωt}` of the bath correlation function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralLine {
    pub omega: f64,
    pub weight: f64,
}

/// `h(t) = Tr(σ Φ_t Φ) = Σ_k c_k e^{iω_k t}` with `Φ_t = e^{-iH_B t} Φ e^{iH_B t}`,
/// and the connected lines of `h(t) - h̄²`.
#[derive(Clone, Debug)]
pub struct CorrelationData {
    pub mean: f64,
    pub spectral_weights: Vec<SpectralLine>,
    pub connected_weights: Vec<SpectralLine>,
}

/// Lines closer than this are merged into one.
pub const LINE_MERGE_TOL: f64 = 1e-10;

impl CorrelationData {
    pub fn h(&self, t: f64) -> C64 {
        self.spectral_weights
            .iter()
            .map(|l| C64::from_polar(l.weight, l.omega * t))
            .sum()
    }

    pub fn connected(&self, t: f64) -> C64 {
        self.connected_weights
            .iter()
            .map(|l| C64::from_polar(l.weight, l.omega * t))
            .sum()
    }
}

fn merge_lines(mut lines: Vec<SpectralLine>) -> Vec<SpectralLine> {
    lines.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let mut out: Vec<SpectralLine> = Vec::with_capacity(lines.len());
    for l in lines {
        match out.last_mut() {
            Some(prev) if (l.omega - prev.omega).abs() < LINE_MERGE_TOL => prev.weight += l.weight,
            _ => out.push(l),
        }
    }
    out
}

pub fn bath_correlation(m: &HeatBathModel) -> CorrelationData {
    let eig = hermitian_eig(&m.h_b);
    let sigma = m.bath_state();
    let pops: Vec<f64> = eig
        .to_eigenbasis(sigma.matrix())
        .diagonal()
        .iter()
        .map(|z| z.re)
        .collect();
    let phi = eig.to_eigenbasis(m.phi.matrix());
    let mean = (sigma.matrix() * m.phi.matrix()).trace().re;
    let db = m.dim_b();
    let mut full = Vec::with_capacity(db * db);
    let mut connected = Vec::with_capacity(db * db);
    for a in 0..db {
        for b in 0..db {
            let omega = eig.eigenvalues[b] - eig.eigenvalues[a];
            let w = pops[a] * phi[(a, b)].norm_sqr();
            full.push(SpectralLine { omega, weight: w });
            let centred = if a == b { phi[(a, b)] - C64::from(mean) } else { phi[(a, b)] };
            connected.push(SpectralLine {
                omega,
                weight: pops[a] * centred.norm_sqr(),
            });
        }
    }
    CorrelationData {
        mean,
        spectral_weights: merge_lines(full),
        connected_weights: merge_lines(connected),
    }
}

/// Generator on `B(ℋ_A)` assembled from the bath correlation lines:
///
/// ```text
/// Ψ(X) = λ² Σ_k c̃_k Q_{ω_k} X Q_{ω_k}†,  A = Ψ(1),
/// Λ = -Σ_k c̃_k PV ∫ dω/(2πω) Q_{ω-ω_k}† Q_{ω-ω_k},
/// H = H_A + λ h̄ Q + λ² Λ,
/// ```
///
/// where `Q_ω` is the coarse-grained transform of `Q` under `H_A` and the
/// `c̃_k` are the connected weights.
pub fn heat_bath_generator(m: &HeatBathModel) -> Result<GeneratorBundle> {
    let t = t_of_lambda(&m.schedule)?;
    let lambda = m.schedule.lambda;
    let corr = bath_correlation(m);
    let eig = hermitian_eig(&m.h_a);
    let q_e = eig.to_eigenbasis(m.q.matrix());
    let da = m.dim_a();

    let mut jumps = Vec::new();
    let mut lamb = ComplexMatrix::zeros(da, da);
    for line in &corr.connected_weights {
        let c = line.weight.max(0.0);
        if c == 0.0 {
            continue;
        }
        let q_w = eig.from_eigenbasis(&gaussian_transform_eigenbasis(&eig, &q_e, t, line.omega));
        jumps.push(q_w.adjoint() * C64::from(lambda * c.sqrt()));
        lamb -= pv_gram(&eig, m.q.matrix(), t, line.omega)? * C64::from(c);
    }
    let decay = jumps
        .iter()
        .fold(ComplexMatrix::zeros(da, da), |acc, j| acc + j.adjoint() * j);
    let decomposition = LindbladDecomposition::new(
        m.h_a.clone(),
        m.q.scaled(lambda * corr.mean),
        HermitianOperator::from_hermitian_part(&(lamb * C64::from(lambda * lambda))),
        HermitianOperator::from_hermitian_part(&decay),
        jumps,
    );
    GeneratorBundle::from_parts(
        decomposition,
        m.schedule,
        Arc::new(PhysicalSubsystem::full_algebra(da)),
    )
}

/// The same generator through the general construction on `ℋ_A ⊗ ℋ_B`.
pub fn heat_bath_general(m: &HeatBathModel) -> Result<GeneratorBundle> {
    let sub = Arc::new(m.subsystem()?);
    build_generator(sub, &m.free_hamiltonian(), &m.interaction(), &m.schedule)
}

/// Largest discrepancy `|L_gen(E_ij ⊗ 1) - L_A(E_ij) ⊗ 1|` over matrix units.
pub fn dual_path_residual(specialized: &GeneratorBundle, general: &GeneratorBundle, dim_b: usize) -> f64 {
    let da = specialized.dim();
    let ib = identity(dim_b);
    let mut worst = 0.0_f64;
    for i in 0..da {
        for j in 0..da {
            let mut unit = ComplexMatrix::zeros(da, da);
            unit[(i, j)] = C64::from(1.0);
            let lhs = general.heisenberg.apply(&kron(&unit, &ib));
            let rhs = kron(&specialized.heisenberg.apply(&unit), &ib);
            worst = worst.max(max_abs_diff(&lhs, &rhs));
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct GibbsRow {
    pub lambda: f64,
    pub distance: f64,
    pub steady: SteadyState,
}

#[derive(Clone, Debug)]
pub struct GibbsStudy {
    pub target: HermitianOperator,
    pub rows: Vec<GibbsRow>,
}

impl GibbsStudy {
    /// Distances strictly decrease along the (decreasing) λ grid.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].distance < w[0].distance)
    }

    pub fn distances(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.distance).collect()
    }
}

/// Trace distance `½‖ρ - σ‖₁`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// Stationary state of the reduced dynamics against the system Gibbs state
/// for each λ. Requires `Tr(σ_β Φ) = 0`.
pub fn gibbs_limit_study(m: &HeatBathModel, lambda_grid: &[f64]) -> Result<GibbsStudy> {
    if lambda_grid.is_empty() {
        return Err(invalid("lambda_grid", "need at least one coupling"));
    }
    let mean = (m.bath_state().matrix() * m.phi.matrix()).trace().re;
    if mean.abs() > 1e-12 {
        return Err(invalid(
            "Phi",
            format!("bath coupling must have zero thermal mean, Tr(σΦ) = {mean:.3e}"),
        ));
    }
    let target = gibbs_state(&m.h_a, m.beta);
    let mut rows = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let model = m.with_schedule(m.schedule.with_lambda(lambda)?);
        let bundle = heat_bath_generator(&model)?;
        let steady = steady_state(&bundle)?;
        rows.push(GibbsRow {
            lambda,
            distance: trace_distance(steady.state.matrix(), target.matrix()),
            steady,
        });
    }
    Ok(GibbsStudy { target, rows })
}
