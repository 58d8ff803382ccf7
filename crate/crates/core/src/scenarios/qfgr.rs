//! Sector dynamics: a Hamiltonian that commutes with a family of orthogonal
//! sector projectors, and the coupled per-sector master equations.

use std::sync::Arc;

use crate::coarse_grain::{coarse_grained_l, pv_gram, t_of_lambda, CoarseGrainSchedule};
use crate::error::{invalid, Error, Result};
use crate::generator::{build_generator, GeneratorBundle};
use crate::mat::{
    commutator, hermitian_eig, max_abs, max_abs_diff, ComplexMatrix, EigenSystem,
    HermitianOperator, Superoperator, C64,
};
use crate::quad;
use crate::subsystem::{build_projection, sector_family, sector_ranges, PhysicalSubsystem};

#[derive(Clone, Debug)]
pub struct QfgrModel {
    pub sector_dims: Vec<usize>,
    pub h0: HermitianOperator,
    pub hp: HermitianOperator,
    pub schedule: CoarseGrainSchedule,
}

impl QfgrModel {
    pub fn new(
        sector_dims: Vec<usize>,
        h0: HermitianOperator,
        hp: HermitianOperator,
        schedule: CoarseGrainSchedule,
    ) -> Result<Self> {
        let family = sector_family(&sector_dims)?;
        let d = family.dim();
        if h0.dim() != d || hp.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "sectors span dimension {d}, H0 is {}, H' is {}",
                h0.dim(),
                hp.dim()
            )));
        }
        for v in family.operators() {
            let witness = max_abs(&commutator(h0.matrix(), v));
            if witness > 1e-12 {
                return Err(Error::NotCommuting { witness });
            }
        }
        schedule.validate()?;
        Ok(Self {
            sector_dims,
            h0,
            hp,
            schedule,
        })
    }

    pub fn dim(&self) -> usize {
        self.sector_dims.iter().sum()
    }

    pub fn subsystem(&self) -> Result<PhysicalSubsystem> {
        build_projection(&sector_family(&self.sector_dims)?)
    }
}

/// `D[α][β] = V_β L V_α` for `α ≠ β` (an `α → β` transition amplitude,
/// supported on block `(β, α)`) and the per-sector energy corrections.
#[derive(Clone, Debug)]
pub struct ScatteringOperators {
    pub amplitudes: Vec<Vec<Option<ComplexMatrix>>>,
    /// `H″_α`, embedded in the full space.
    pub shifts: Vec<HermitianOperator>,
}

impl ScatteringOperators {
    pub fn amplitude(&self, from: usize, to: usize) -> Option<&ComplexMatrix> {
        self.amplitudes.get(from)?.get(to)?.as_ref()
    }
}

/// The sector equations together with the general generator they must
/// agree with.
#[derive(Clone, Debug)]
pub struct QfgrSystem {
    pub model: QfgrModel,
    pub scattering: ScatteringOperators,
    pub bundle: GeneratorBundle,
    /// Largest discrepancy between the sector equations and the general
    /// Schrödinger generator on block-diagonal inputs.
    pub cross_check_residual: f64,
}

/// Tolerance for the sector equations against the general generator.
pub const QFGR_CROSS_CHECK_TOL: f64 = 1e-8;

/// Eigensystem assembled block by block, so that each eigenvector lies in a
/// single sector even when levels of different sectors coincide.
fn sector_eigensystem(h0: &HermitianOperator, dims: &[usize]) -> EigenSystem {
    let d = h0.dim();
    let mut eigenvalues = Vec::with_capacity(d);
    let mut eigenvectors = ComplexMatrix::zeros(d, d);
    for r in sector_ranges(dims) {
        let n = r.len();
        let block = h0.matrix().view((r.start, r.start), (n, n)).into_owned();
        let eig = hermitian_eig(&HermitianOperator::from_hermitian_part(&block));
        eigenvalues.extend_from_slice(&eig.eigenvalues);
        eigenvectors
            .view_mut((r.start, r.start), (n, n))
            .copy_from(&eig.eigenvectors);
    }
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}

fn block_mask(m: &ComplexMatrix, rows: &std::ops::Range<usize>, cols: &std::ops::Range<usize>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if rows.contains(&i) && cols.contains(&j) {
            m[(i, j)]
        } else {
            C64::default()
        }
    })
}

pub fn scattering_operators(model: &QfgrModel) -> Result<ScatteringOperators> {
    let t = t_of_lambda(&model.schedule)?;
    let eig = sector_eigensystem(&model.h0, &model.sector_dims);
    let l = coarse_grained_l(&eig, &model.hp, t, 0.0)?.matrix;
    let ranges = sector_ranges(&model.sector_dims);
    let n = ranges.len();
    let mut amplitudes = vec![vec![None; n]; n];
    let mut shifts = Vec::with_capacity(n);
    for (a, ra) in ranges.iter().enumerate() {
        let mut shift = ComplexMatrix::zeros(model.dim(), model.dim());
        for (b, rb) in ranges.iter().enumerate() {
            if a == b {
                continue;
            }
            amplitudes[a][b] = Some(block_mask(&l, rb, ra));
            let k = block_mask(model.hp.matrix(), rb, ra);
            shift -= pv_gram(&eig, &k, t, 0.0)?;
        }
        shifts.push(HermitianOperator::from_hermitian_part(&block_mask(&shift, ra, ra)));
    }
    Ok(ScatteringOperators { amplitudes, shifts })
}

/// Right-hand side of the coupled sector equations for the block-diagonal
/// part of `rho`.
pub fn sector_rhs(model: &QfgrModel, ops: &ScatteringOperators, rho: &ComplexMatrix) -> ComplexMatrix {
    let lambda = model.schedule.lambda;
    let lam2 = C64::from(lambda * lambda);
    let ranges = sector_ranges(&model.sector_dims);
    let blocks: Vec<ComplexMatrix> = ranges.iter().map(|r| block_mask(rho, r, r)).collect();
    let mut out = ComplexMatrix::zeros(model.dim(), model.dim());
    for (a, ra) in ranges.iter().enumerate() {
        let rho_a = &blocks[a];
        let h = block_mask(model.h0.matrix(), ra, ra)
            + block_mask(model.hp.matrix(), ra, ra) * C64::from(lambda)
            + ops.shifts[a].matrix() * lam2;
        let mut d_a = (&h * rho_a - rho_a * &h) * C64::new(0.0, -1.0);
        for (b, rho_b) in blocks.iter().enumerate() {
            if a == b {
                continue;
            }
            let loss = ops.amplitude(a, b).expect("off-diagonal amplitude");
            let loss = loss.adjoint() * loss;
            d_a -= (&loss * rho_a + rho_a * &loss) * (lam2 * 0.5);
            let gain = ops.amplitude(b, a).expect("off-diagonal amplitude");
            d_a += gain * rho_b * gain.adjoint() * lam2;
        }
        out += d_a;
    }
    out
}

/// Sector equations as a superoperator on `d×d` matrices (acting on the
/// block-diagonal part).
pub fn sector_superoperator(model: &QfgrModel, ops: &ScatteringOperators) -> Superoperator {
    Superoperator::from_map(model.dim(), |rho| sector_rhs(model, ops, rho))
}

/// Builds the sector equations and checks them against the general
/// generator on every block-diagonal matrix unit.
pub fn qfgr_generator(model: &QfgrModel) -> Result<QfgrSystem> {
    let sub = Arc::new(model.subsystem()?);
    let bundle = build_generator(sub, &model.h0, &model.hp, &model.schedule)?;
    let scattering = scattering_operators(model)?;
    let d = model.dim();
    let mut residual = 0.0_f64;
    for r in sector_ranges(&model.sector_dims) {
        for i in r.clone() {
            for j in r.clone() {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit[(i, j)] = C64::from(1.0);
                let general = bundle.schrodinger.apply(&unit);
                let sector = sector_rhs(model, &scattering, &unit);
                residual = residual.max(max_abs_diff(&general, &sector));
            }
        }
    }
    if residual > QFGR_CROSS_CHECK_TOL {
        return Err(Error::CrossCheck {
            what: "sector equations against general generator",
            residual,
            tolerance: QFGR_CROSS_CHECK_TOL,
        });
    }
    Ok(QfgrSystem {
        model: model.clone(),
        scattering,
        bundle,
        cross_check_residual: residual,
    })
}

/// Transition rate `2√π T e^{-T²Δ²} |H′|²` between two rank-one sectors.
pub fn fgr_rate(t: f64, delta: f64, coupling_abs: f64) -> f64 {
    2.0 * std::f64::consts::PI.sqrt() * t * (-t * t * delta * delta).exp() * coupling_abs.powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FgrRateRow {
    pub t: f64,
    /// `∫ g_T(Δ) dΔ / |H′|²`, expected `2π`.
    pub integral: f64,
    pub peak: f64,
    /// Half width at half maximum, `√ln 2 / T`.
    pub half_width: f64,
}

#[derive(Clone, Debug)]
pub struct FgrRateReport {
    pub rows: Vec<FgrRateRow>,
    /// Largest `|integral - 2π|`.
    pub normalization_error: f64,
    /// Largest relative deviation of `peak / T` from `2√π`.
    pub peak_scaling_error: f64,
}

impl FgrRateReport {
    pub fn passed(&self) -> bool {
        self.normalization_error <= 1e-6 && self.peak_scaling_error <= 1e-9
    }
}

/// Nascent-delta checks of the rate profile for each `T`.
pub fn fgr_rate_check(t_values: &[f64]) -> Result<FgrRateReport> {
    if t_values.is_empty() {
        return Err(invalid("T_values", "need at least one coarse-graining time"));
    }
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid("T", format!("coarse-graining time must be positive, got {t}")));
        }
        let span = 12.0 / t;
        let integral = quad::integrate(|x| fgr_rate(t, x, 1.0), -span, span, 1e-13);
        let peak = fgr_rate(t, 0.0, 1.0);
        // bisection for the half maximum
        let (mut lo, mut hi) = (0.0, span);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fgr_rate(t, mid, 1.0) > 0.5 * peak {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rows.push(FgrRateRow {
            t,
            integral,
            peak,
            half_width: 0.5 * (lo + hi),
        });
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let normalization_error = rows.iter().map(|r| (r.integral - two_pi).abs()).fold(0.0, f64::max);
    let expected = 2.0 * std::f64::consts::PI.sqrt();
    let peak_scaling_error = rows
        .iter()
        .map(|r| (r.peak / r.t / expected - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(FgrRateReport {
        rows,
        normalization_error,
        peak_scaling_error,
    })
}
