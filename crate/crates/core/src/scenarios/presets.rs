//! Named, fixed scenario models. Parameters here are versioned: changing a
//! value changes the recorded tables.

use crate::coarse_grain::CoarseGrainSchedule;
use crate::error::{invalid, Result};
use crate::mat::random::{random_hermitian, seeded};
use crate::mat::{pauli, ComplexMatrix, HermitianOperator, C64};
use crate::subsystem::{build_projection, sector_family, PhysicalSubsystem};

use super::heat_bath::HeatBathModel;
use super::qfgr::QfgrModel;

/// Scenario family a preset belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    Qfgr,
    HeatBath,
    Custom,
}

impl PresetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetKind::Qfgr => "qfgr",
            PresetKind::HeatBath => "heat_bath",
            PresetKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PresetInfo {
    pub name: &'static str,
    pub kind: PresetKind,
    pub description: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "dephasing-qubit",
        kind: PresetKind::Custom,
        description: "qubit, diagonal subalgebra, H0 = σz, H' = σx",
    },
    PresetInfo {
        name: "two-sector-qubit",
        kind: PresetKind::Qfgr,
        description: "two rank-one sectors, H0 = diag(0.3, -0.2), H' = 0.8 σx",
    },
    PresetInfo {
        name: "sectors-2x2",
        kind: PresetKind::Qfgr,
        description: "two two-dimensional sectors with a fixed generic coupling",
    },
    PresetInfo {
        name: "qubit-gibbs",
        kind: PresetKind::HeatBath,
        description: "qubit σz coupled by σx to a four-level bath with zero thermal mean, β = 1",
    },
    PresetInfo {
        name: "qubit-bath3",
        kind: PresetKind::HeatBath,
        description: "qubit coupled to a generic three-level bath, β = 0.7",
    },
    PresetInfo {
        name: "quasi-continuum",
        kind: PresetKind::HeatBath,
        description: "qubit coupled to sixteen equally spaced bath levels with a smooth profile",
    },
];

pub fn preset_info(name: &str) -> Option<&'static PresetInfo> {
    PRESETS.iter().find(|p| p.name == name)
}

fn herm(m: ComplexMatrix) -> HermitianOperator {
    HermitianOperator::from_hermitian_part(&m)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Default coupling schedule used when a config does not override it.
pub fn default_schedule(lambda: f64) -> Result<CoarseGrainSchedule> {
    CoarseGrainSchedule::new(lambda, 1.0, 1.0)
}

/// A custom model: subsystem plus free and perturbing Hamiltonians.
#[derive(Clone, Debug)]
pub struct CustomModel {
    pub subsystem: PhysicalSubsystem,
    pub h0: HermitianOperator,
    pub hp: HermitianOperator,
}

pub fn dephasing_qubit() -> CustomModel {
    CustomModel {
        subsystem: build_projection(&sector_family(&[1, 1]).expect("sectors")).expect("projection"),
        h0: herm(pauli::z()),
        hp: herm(pauli::x()),
    }
}

pub fn two_sector_qubit(schedule: CoarseGrainSchedule) -> Result<QfgrModel> {
    QfgrModel::new(
        vec![1, 1],
        HermitianOperator::from_real_diagonal(&[0.3, -0.2]),
        herm(pauli::x() * C64::from(0.8)),
        schedule,
    )
}

pub fn sectors_2x2(schedule: CoarseGrainSchedule) -> Result<QfgrModel> {
    let h0 = ComplexMatrix::from_row_slice(
        4,
        4,
        &[
            c(0.4, 0.0), c(0.15, -0.05), c(0.0, 0.0), c(0.0, 0.0),
            c(0.15, 0.05), c(-0.1, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.9, 0.0), c(-0.2, 0.1),
            c(0.0, 0.0), c(0.0, 0.0), c(-0.2, -0.1), c(1.3, 0.0),
        ],
    );
    let hp = ComplexMatrix::from_row_slice(
        4,
        4,
        &[
            c(0.2, 0.0), c(0.1, 0.3), c(0.5, -0.2), c(0.3, 0.1),
            c(0.1, -0.3), c(-0.4, 0.0), c(0.25, 0.4), c(-0.6, 0.0),
            c(0.5, 0.2), c(0.25, -0.4), c(0.1, 0.0), c(0.2, 0.2),
            c(0.3, -0.1), c(-0.6, 0.0), c(0.2, -0.2), c(-0.3, 0.0),
        ],
    );
    QfgrModel::new(vec![2, 2], herm(h0), herm(hp), schedule)
}

/// Bath levels `0, 0.7, 1.9, 2.4`, every pair coupled and a zero diagonal,
/// so `Tr(σ_β Φ) = 0` for every β.
///
/// No bath transition sits exactly at the qubit splitting 2. As `T` grows
/// the nearest line (1.9) takes over, and the stationary state tends to
/// the Gibbs state at that energy: a floor of about 0.0109 in trace
/// distance. The pair weights damp the 2.4 line and favour the 1.7 line,
/// so the approach to that floor is from above.
pub fn qubit_gibbs(schedule: CoarseGrainSchedule) -> Result<HeatBathModel> {
    const PAIRS: [((usize, usize), f64); 6] = [
        ((0, 1), 1.0),
        ((0, 2), 1.0),
        ((0, 3), 0.1),
        ((1, 2), 1.0),
        ((1, 3), 2.0),
        ((2, 3), 1.0),
    ];
    let mut phi = ComplexMatrix::zeros(4, 4);
    for ((i, j), w) in PAIRS {
        phi[(i, j)] = C64::from(w);
        phi[(j, i)] = C64::from(w);
    }
    HeatBathModel::new(
        herm(pauli::z()),
        HermitianOperator::from_real_diagonal(&[0.0, 0.7, 1.9, 2.4]),
        herm(pauli::x()),
        herm(phi),
        1.0,
        schedule,
    )
}

/// Couplings of the Gibbs reference study.
pub const GIBBS_LAMBDAS: [f64; 3] = [0.3, 0.1, 0.03];

pub fn qubit_bath3(schedule: CoarseGrainSchedule) -> Result<HeatBathModel> {
    let h_a = pauli::z() * C64::from(0.6) + pauli::x() * C64::from(0.2);
    let q = pauli::x() + pauli::z() * C64::from(0.3);
    let phi = ComplexMatrix::from_row_slice(
        3,
        3,
        &[
            c(0.3, 0.0), c(0.5, 0.2), c(-0.1, 0.4),
            c(0.5, -0.2), c(-0.2, 0.0), c(0.6, 0.0),
            c(-0.1, -0.4), c(0.6, 0.0), c(0.1, 0.0),
        ],
    );
    HeatBathModel::new(
        herm(h_a),
        HermitianOperator::from_real_diagonal(&[0.0, 0.45, 1.3]),
        herm(q),
        herm(phi),
        0.7,
        schedule,
    )
}

/// Qubit plus three-level bath with every operator drawn from `seed`.
pub fn random_qubit_bath3(seed: u64, schedule: CoarseGrainSchedule) -> Result<HeatBathModel> {
    let mut rng = seeded(seed);
    HeatBathModel::new(
        random_hermitian(&mut rng, 2),
        random_hermitian(&mut rng, 3),
        random_hermitian(&mut rng, 2),
        random_hermitian(&mut rng, 3),
        0.5 + (seed % 7) as f64 * 0.25,
        schedule,
    )
}

/// Parameters of the quasi-continuum bath.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiContinuum {
    pub levels: usize,
    /// Bath levels are equally spaced in `[-bandwidth/2, bandwidth/2]`.
    pub bandwidth: f64,
    /// Qubit splitting: `H_A = (splitting/2) σz`.
    pub splitting: f64,
    /// Coupling profile `Φ_mn = g(e_m) g(e_n)` for `m ≠ n`, with
    /// `g(e) = amplitude · exp(-e² / (2 width²))`.
    pub amplitude: f64,
    pub width: f64,
    pub beta: f64,
    pub tau_bar: f64,
    pub time_points: usize,
    pub lambdas: [f64; 2],
}

pub const QUASI_CONTINUUM: QuasiContinuum = QuasiContinuum {
    levels: 16,
    bandwidth: 2.0,
    splitting: 1.0,
    amplitude: 0.5,
    width: 1.0,
    beta: 1.0,
    tau_bar: 0.1,
    time_points: 41,
    lambdas: [0.2, 0.05],
};

pub fn quasi_continuum(p: &QuasiContinuum, schedule: CoarseGrainSchedule) -> Result<HeatBathModel> {
    if p.levels < 2 {
        return Err(invalid("levels", "quasi-continuum needs at least two levels"));
    }
    let n = p.levels;
    let e: Vec<f64> = (0..n)
        .map(|j| -0.5 * p.bandwidth + p.bandwidth * j as f64 / (n - 1) as f64)
        .collect();
    let g = |x: f64| p.amplitude * (-x * x / (2.0 * p.width * p.width)).exp();
    let phi = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::default()
        } else {
            C64::from(g(e[i]) * g(e[j]))
        }
    });
    HeatBathModel::new(
        herm(pauli::z() * C64::from(0.5 * p.splitting)),
        HermitianOperator::from_real_diagonal(&e),
        herm(pauli::x()),
        herm(phi),
        p.beta,
        schedule,
    )
}
