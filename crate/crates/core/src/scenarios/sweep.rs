//! Distance between the exact projected evolution and the coarse-grained
//! semigroup over the window `0 ≤ t ≤ λ^{-2} τ̄`.

use crate::coarse_grain::CoarseGrainSchedule;
use crate::error::{invalid, Error, Result};
use crate::generator::{build_decomposition, free_commutation_defect};
use crate::mat::{
    expm, hermitian_eig, max_abs, vectorize, ComplexMatrix, HermitianOperator, C64,
    STRUCTURAL_TOL,
};
use crate::subsystem::PhysicalSubsystem;

/// Largest Hilbert-space dimension accepted by the sweep.
pub const SWEEP_MAX_DIM: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub t: f64,
    /// Spectral norm of `(W_t - W̃_t)` restricted to `𝒳` (Hilbert–Schmidt
    /// geometry).
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    /// `(λ, sup_t error)` in the order the couplings were given.
    pub fn sup_errors(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for p in &self.points {
            match out.last_mut() {
                Some((l, e)) if *l == p.lambda => *e = e.max(p.error),
                _ => out.push((p.lambda, p.error)),
            }
        }
        out
    }
}

/// Runs the comparison for each schedule on `time_points` equally spaced
/// times in `[0, λ^{-2} τ̄]`.
pub fn weak_coupling_sweep(
    sub: &PhysicalSubsystem,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
    schedules: &[CoarseGrainSchedule],
    tau_bar: f64,
    time_points: usize,
) -> Result<SweepTable> {
    if schedules.is_empty() || time_points == 0 {
        return Err(invalid("grid", "sweep needs at least one coupling and one time"));
    }
    if !(tau_bar.is_finite() && tau_bar > 0.0) {
        return Err(invalid("tau_bar", format!("window scale must be positive, got {tau_bar}")));
    }
    let mut points = Vec::new();
    for sched in schedules {
        let t_max = tau_bar / (sched.lambda * sched.lambda);
        let times: Vec<f64> = (0..time_points)
            .map(|k| {
                if time_points == 1 {
                    0.0
                } else {
                    t_max * k as f64 / (time_points - 1) as f64
                }
            })
            .collect();
        points.extend(sweep_errors_at(sub, h0, hp, sched, &times)?);
    }
    Ok(SweepTable { points })
}

/// Error of the coarse-grained semigroup against the exact projected
/// evolution at the given times, for a single coupling.
pub fn sweep_errors_at(
    sub: &PhysicalSubsystem,
    h0: &HermitianOperator,
    hp: &HermitianOperator,
    sched: &CoarseGrainSchedule,
    times: &[f64],
) -> Result<Vec<SweepPoint>> {
    let d = sub.dim();
    if d > SWEEP_MAX_DIM {
        return Err(invalid(
            "dimension",
            format!("sweep exponentiates on dimension {d}, limit is {SWEEP_MAX_DIM}"),
        ));
    }
    let witness = free_commutation_defect(sub, h0);
    if witness > STRUCTURAL_TOL * (1.0 + max_abs(h0.matrix())) {
        return Err(Error::NotCommuting { witness });
    }
    let basis = sub.commutant_basis();
    let b = sub.basis_columns();
    let lambda = sched.lambda;
    let dec = build_decomposition(sub, h0, hp, sched)?;
    let cols: Vec<_> = basis.iter().map(|x| vectorize(&dec.apply_heisenberg(x))).collect();
    let reduced = b.adjoint() * crate::mat::columns(&cols, d * d);

    let full = HermitianOperator::from_hermitian_part(
        &(h0.matrix() + hp.matrix() * C64::from(lambda)),
    );
    let eig = hermitian_eig(&full);
    let ut = eig.eigenvectors.adjoint();
    let basis_e: Vec<ComplexMatrix> = basis.iter().map(|x| &ut * x * &eig.eigenvectors).collect();

    let mut points = Vec::with_capacity(times.len());
    for &t in times {
        // W_t(X) = P0(e^{iHt} X e^{-iHt}) in eigenbasis coordinates
        let phase = |m: usize, n: usize| C64::from_polar(1.0, (eig.eigenvalues[m] - eig.eigenvalues[n]) * t);
        let exact_cols: Vec<_> = basis_e
            .iter()
            .map(|xe| {
                let rotated = ComplexMatrix::from_fn(d, d, |m, n| xe[(m, n)] * phase(m, n));
                let back = &eig.eigenvectors * rotated * &ut;
                vectorize(&sub.project(&back))
            })
            .collect();
        let exact = b.adjoint() * crate::mat::columns(&exact_cols, d * d);
        let approx = expm(&(&reduced * C64::from(t)))?;
        let diff = exact - approx;
        let error = diff
            .singular_values()
            .iter()
            .fold(0.0_f64, |a, &s| a.max(s));
        points.push(SweepPoint { lambda, t, error });
    }
    Ok(points)
}
