//! Worked scenarios: sector (golden-rule) dynamics, a system coupled to a
//! finite thermal bath, and the weak-coupling error sweep.

pub mod heat_bath;
pub mod presets;
pub mod qfgr;
pub mod sweep;

pub use heat_bath::{
    bath_correlation, dual_path_residual, gibbs_limit_study, gibbs_state, heat_bath_general,
    heat_bath_generator, trace_distance, CorrelationData, GibbsStudy, HeatBathModel,
    SpectralLine,
};
pub use qfgr::{fgr_rate_check, qfgr_generator, QfgrModel, QfgrSystem, ScatteringOperators};
pub use sweep::{sweep_errors_at, weak_coupling_sweep, SweepPoint, SweepTable};
