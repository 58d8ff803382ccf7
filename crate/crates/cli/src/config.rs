//! Scenario configuration: the TOML document as written by the user, and
//! the checked form the runner consumes.

use std::fmt;
use std::path::PathBuf;

use qfp_core::coarse_grain::CoarseGrainSchedule;
use qfp_core::generator::free_commutation_defect;
use qfp_core::mat::{max_abs, read_matrix, HermitianOperator, STRUCTURAL_TOL};
use qfp_core::scenarios::presets::{self, CustomModel, PresetKind};
use qfp_core::scenarios::{HeatBathModel, QfgrModel};
use qfp_core::subsystem::{build_projection, sector_family, KrausFamily};
use serde::{Deserialize, Serialize};

/// A configuration problem, tied to the offending field when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }

    fn missing(field: &str, what: &str) -> Self {
        Self::new(field, format!("missing required field ({what})"))
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<RawScenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<RawSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_grid: Option<RawTimeGrid>,
    #[serde(default)]
    pub model: RawModel,
    #[serde(default)]
    pub checks: RawChecks,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSchedule {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_ref: Option<f64>,
    /// Fixed coarse-graining time, used instead of `t_ref · λ^{-ξ}`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinned_time: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTimeGrid {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_bar: Option<f64>,
}

/// Inline matrices in the interchange format.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectors: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kraus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_a: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChecks {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_state: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gibbs_monotone: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export_generators: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Qfgr,
    HeatBath,
    Custom,
}

impl ScenarioKind {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "qfgr" => Ok(Self::Qfgr),
            "heat_bath" => Ok(Self::HeatBath),
            "custom" => Ok(Self::Custom),
            other => Err(ConfigError::new(
                "scenario.kind",
                format!("unknown scenario kind `{other}` (expected qfgr, heat_bath or custom)"),
            )),
        }
    }

    fn preset_kind(self) -> PresetKind {
        match self {
            Self::Qfgr => PresetKind::Qfgr,
            Self::HeatBath => PresetKind::HeatBath,
            Self::Custom => PresetKind::Custom,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Model {
    Qfgr(QfgrModel),
    HeatBath(HeatBathModel),
    Custom(CustomModel),
}

impl Model {
    /// Hilbert-space dimension the generator is built on.
    pub fn dim(&self) -> usize {
        match self {
            Model::Qfgr(m) => m.dim(),
            Model::HeatBath(m) => m.dim_a(),
            Model::Custom(m) => m.subsystem.dim(),
        }
    }

    /// Dimension of the full (system plus environment) space.
    pub fn full_dim(&self) -> usize {
        match self {
            Model::HeatBath(m) => m.dim_a() * m.dim_b(),
            _ => self.dim(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TimeGrid {
    Explicit { start: f64, stop: f64, count: usize },
    /// `count` equally spaced times in `[0, τ̄ / λ²]`.
    Auto { tau_bar: f64, count: usize },
}

impl TimeGrid {
    pub fn times(&self, lambda: f64) -> Vec<f64> {
        let (start, stop, count) = match *self {
            TimeGrid::Explicit { start, stop, count } => (start, stop, count),
            TimeGrid::Auto { tau_bar, count } => (0.0, tau_bar / (lambda * lambda), count),
        };
        if count == 1 {
            return vec![start];
        }
        (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checks {
    pub sweep: bool,
    pub oracle: bool,
    pub steady_state: bool,
    pub gibbs_monotone: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub dir: Option<PathBuf>,
    pub csv: String,
    pub json: String,
    pub export_generators: bool,
}

/// Largest full dimension on which the time-domain oracle is run.
pub const ORACLE_MAX_DIM: usize = 8;

/// A parsed and semantically checked scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub raw: RawConfig,
    pub kind: ScenarioKind,
    pub preset: Option<String>,
    pub seed: u64,
    pub model: Model,
    pub schedules: Vec<CoarseGrainSchedule>,
    pub time_grid: TimeGrid,
    pub checks: Checks,
    pub output: Output,
}

pub const DEFAULT_SEED: u64 = 0;

pub fn parse_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let at = e
            .span()
            .map(|s| {
                let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}: ")
            })
            .unwrap_or_default();
        ConfigError::new("", format!("{at}{}", e.message()))
    })?;
    check(raw)
}

pub fn load(path: &std::path::Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text)
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("value must be finite, got {v}")))
    }
}

fn core_err(field: &str) -> impl Fn(qfp_core::Error) -> ConfigError + '_ {
    move |e| ConfigError::new(field, e.to_string())
}

fn hermitian(field: &str, text: &Option<String>) -> Result<HermitianOperator, ConfigError> {
    let text = text
        .as_ref()
        .ok_or_else(|| ConfigError::missing(field, "inline matrix in interchange format"))?;
    let m = read_matrix(text).map_err(core_err(field))?;
    HermitianOperator::new(m).map_err(core_err(field))
}

fn schedules(raw: &Option<RawSchedule>) -> Result<Vec<CoarseGrainSchedule>, ConfigError> {
    let s = raw
        .as_ref()
        .ok_or_else(|| ConfigError::missing("schedule", "section with lambdas, xi and t_ref"))?;
    let lambdas = s
        .lambdas
        .as_ref()
        .ok_or_else(|| ConfigError::missing("schedule.lambdas", "list of couplings λ"))?;
    if lambdas.is_empty() {
        return Err(ConfigError::new("schedule.lambdas", "at least one coupling is required"));
    }
    let xi = s
        .xi
        .ok_or_else(|| ConfigError::missing("schedule.xi", "scaling exponent ξ with 0 < ξ < 2"))?;
    let mut out = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let field = format!("schedule.lambdas[{i}]");
        if lambdas[..i].contains(&lambda) {
            return Err(ConfigError::new(field, format!("coupling {lambda} is listed twice")));
        }
        let sched = match (s.pinned_time, s.t_ref) {
            (Some(t), _) => {
                let sched = CoarseGrainSchedule::pinned(lambda, t);
                sched.map_err(|e| map_schedule_error(e, &field))?
            }
            (None, Some(t_ref)) => {
                CoarseGrainSchedule::new(lambda, xi, t_ref).map_err(|e| map_schedule_error(e, &field))?
            }
            (None, None) => {
                return Err(ConfigError::missing(
                    "schedule.t_ref",
                    "reference time T̃ of the coarse-graining schedule T(λ) = T̃ λ^(-ξ)",
                ))
            }
        };
        // the pinned form keeps a default exponent; range-check the given one
        if s.pinned_time.is_some() && !(xi > 0.0 && xi < 2.0) {
            return Err(ConfigError::new(
                "schedule.xi",
                format!("scaling exponent must satisfy 0 < ξ < 2, got {xi}"),
            ));
        }
        out.push(sched);
    }
    Ok(out)
}

fn map_schedule_error(e: qfp_core::Error, lambda_field: &str) -> ConfigError {
    let field = match &e {
        qfp_core::Error::InvalidParameter { name, .. } => match *name {
            "lambda" => lambda_field.to_string(),
            "xi" => "schedule.xi".to_string(),
            "T_ref" => "schedule.t_ref".to_string(),
            "T" => "schedule.pinned_time".to_string(),
            other => format!("schedule.{other}"),
        },
        _ => "schedule".to_string(),
    };
    ConfigError::new(field, e.to_string())
}

fn time_grid(raw: &Option<RawTimeGrid>) -> Result<TimeGrid, ConfigError> {
    let g = raw
        .as_ref()
        .ok_or_else(|| ConfigError::missing("time_grid", "section with mode and count"))?;
    let count = g
        .count
        .ok_or_else(|| ConfigError::missing("time_grid.count", "number of time samples"))?;
    if count == 0 {
        return Err(ConfigError::new("time_grid.count", "time grid must be nonempty"));
    }
    match g.mode.as_deref().unwrap_or("explicit") {
        "explicit" => {
            let start = finite(
                "time_grid.start",
                g.start.ok_or_else(|| ConfigError::missing("time_grid.start", "first time"))?,
            )?;
            let stop = finite(
                "time_grid.stop",
                g.stop.ok_or_else(|| ConfigError::missing("time_grid.stop", "last time"))?,
            )?;
            if start < 0.0 {
                return Err(ConfigError::new("time_grid.start", format!("times must be nonnegative, got {start}")));
            }
            if stop < start {
                return Err(ConfigError::new("time_grid.stop", format!("stop {stop} precedes start {start}")));
            }
            if g.tau_bar.is_some() {
                return Err(ConfigError::new("time_grid.tau_bar", "only used with mode = \"auto\""));
            }
            Ok(TimeGrid::Explicit { start, stop, count })
        }
        "auto" => {
            let tau_bar = g
                .tau_bar
                .ok_or_else(|| ConfigError::missing("time_grid.tau_bar", "window scale τ̄ of [0, τ̄/λ²]"))?;
            if !(tau_bar.is_finite() && tau_bar > 0.0) {
                return Err(ConfigError::new("time_grid.tau_bar", format!("must be positive, got {tau_bar}")));
            }
            if g.start.is_some() || g.stop.is_some() {
                return Err(ConfigError::new("time_grid", "start/stop are not used with mode = \"auto\""));
            }
            Ok(TimeGrid::Auto { tau_bar, count })
        }
        other => Err(ConfigError::new(
            "time_grid.mode",
            format!("unknown mode `{other}` (expected explicit or auto)"),
        )),
    }
}

fn preset_model(name: &str, kind: ScenarioKind, sched: CoarseGrainSchedule) -> Result<Model, ConfigError> {
    let info = presets::preset_info(name)
        .ok_or_else(|| ConfigError::new("scenario.preset", format!("unknown preset `{name}`")))?;
    if info.kind != kind.preset_kind() {
        return Err(ConfigError::new(
            "scenario.preset",
            format!("preset `{name}` is a {} scenario, not {}", info.kind.as_str(), kind.preset_kind().as_str()),
        ));
    }
    let field = "scenario.preset";
    Ok(match name {
        "dephasing-qubit" => Model::Custom(presets::dephasing_qubit()),
        "two-sector-qubit" => Model::Qfgr(presets::two_sector_qubit(sched).map_err(core_err(field))?),
        "sectors-2x2" => Model::Qfgr(presets::sectors_2x2(sched).map_err(core_err(field))?),
        "qubit-gibbs" => Model::HeatBath(presets::qubit_gibbs(sched).map_err(core_err(field))?),
        "qubit-bath3" => Model::HeatBath(presets::qubit_bath3(sched).map_err(core_err(field))?),
        "quasi-continuum" => Model::HeatBath(
            presets::quasi_continuum(&presets::QUASI_CONTINUUM, sched).map_err(core_err(field))?,
        ),
        other => return Err(ConfigError::new(field, format!("preset `{other}` has no builder"))),
    })
}

fn inline_model(kind: ScenarioKind, m: &RawModel, sched: CoarseGrainSchedule) -> Result<Model, ConfigError> {
    let reject = |present: bool, field: &str| {
        if present {
            Err(ConfigError::new(field, format!("not used by {} scenarios", kind.preset_kind().as_str())))
        } else {
            Ok(())
        }
    };
    match kind {
        ScenarioKind::Qfgr => {
            reject(m.kraus.is_some(), "model.kraus")?;
            reject(m.h_a.is_some() || m.h_b.is_some() || m.q.is_some() || m.phi.is_some(), "model")?;
            reject(m.beta.is_some(), "model.beta")?;
            let sectors = m
                .sectors
                .clone()
                .ok_or_else(|| ConfigError::missing("model.sectors", "list of sector dimensions"))?;
            let h0 = hermitian("model.h0", &m.h0)?;
            let hp = hermitian("model.hp", &m.hp)?;
            let model = QfgrModel::new(sectors, h0, hp, sched).map_err(core_err("model"))?;
            Ok(Model::Qfgr(model))
        }
        ScenarioKind::HeatBath => {
            reject(m.sectors.is_some(), "model.sectors")?;
            reject(m.kraus.is_some(), "model.kraus")?;
            reject(m.h0.is_some() || m.hp.is_some(), "model")?;
            let beta = m
                .beta
                .ok_or_else(|| ConfigError::missing("model.beta", "inverse bath temperature β"))?;
            let model = HeatBathModel::new(
                hermitian("model.h_a", &m.h_a)?,
                hermitian("model.h_b", &m.h_b)?,
                hermitian("model.q", &m.q)?,
                hermitian("model.phi", &m.phi)?,
                beta,
                sched,
            )
            .map_err(core_err("model"))?;
            Ok(Model::HeatBath(model))
        }
        ScenarioKind::Custom => {
            reject(m.h_a.is_some() || m.h_b.is_some() || m.q.is_some() || m.phi.is_some(), "model")?;
            reject(m.beta.is_some(), "model.beta")?;
            let family = match (&m.sectors, &m.kraus) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::new("model", "give either `sectors` or `kraus`, not both"))
                }
                (Some(s), None) => sector_family(s).map_err(core_err("model.sectors"))?,
                (None, Some(k)) => KrausFamily::from_text(k).map_err(core_err("model.kraus"))?,
                (None, None) => {
                    return Err(ConfigError::missing("model.kraus", "Kraus family or `sectors` list"))
                }
            };
            let subsystem = build_projection(&family).map_err(core_err("model.kraus"))?;
            let h0 = hermitian("model.h0", &m.h0)?;
            let hp = hermitian("model.hp", &m.hp)?;
            let d = subsystem.dim();
            for (field, h) in [("model.h0", &h0), ("model.hp", &hp)] {
                if h.dim() != d {
                    return Err(ConfigError::new(
                        field,
                        format!("dimension {} does not match the Kraus family ({d})", h.dim()),
                    ));
                }
            }
            let witness = free_commutation_defect(&subsystem, &h0);
            if witness > STRUCTURAL_TOL * (1.0 + max_abs(h0.matrix())) {
                return Err(ConfigError::new(
                    "model.h0",
                    format!("free evolution does not commute with the projection (witness {witness:.3e})"),
                ));
            }
            Ok(Model::Custom(CustomModel { subsystem, h0, hp }))
        }
    }
}

fn model_is_empty(m: &RawModel) -> bool {
    m.sectors.is_none()
        && m.kraus.is_none()
        && m.h0.is_none()
        && m.hp.is_none()
        && m.h_a.is_none()
        && m.h_b.is_none()
        && m.q.is_none()
        && m.phi.is_none()
        && m.beta.is_none()
}

pub fn check(raw: RawConfig) -> Result<ScenarioConfig, ConfigError> {
    let scenario = raw
        .scenario
        .as_ref()
        .ok_or_else(|| ConfigError::missing("scenario", "section with the scenario kind"))?;
    let kind = ScenarioKind::parse(
        scenario
            .kind
            .as_deref()
            .ok_or_else(|| ConfigError::missing("scenario.kind", "one of qfgr, heat_bath, custom"))?,
    )?;
    let schedules = schedules(&raw.schedule)?;
    let time_grid = time_grid(&raw.time_grid)?;

    let model = match &scenario.preset {
        Some(name) => {
            if !model_is_empty(&raw.model) {
                return Err(ConfigError::new("model", "inline matrices cannot be combined with a preset"));
            }
            preset_model(name, kind, schedules[0])?
        }
        None => inline_model(kind, &raw.model, schedules[0])?,
    };

    let checks = Checks {
        sweep: raw.checks.sweep.unwrap_or(true),
        oracle: raw.checks.oracle.unwrap_or(false),
        steady_state: raw.checks.steady_state.unwrap_or(true),
        gibbs_monotone: raw.checks.gibbs_monotone.unwrap_or(false),
    };
    if checks.gibbs_monotone {
        let Model::HeatBath(m) = &model else {
            return Err(ConfigError::new("checks.gibbs_monotone", "only available for heat_bath scenarios"));
        };
        if !checks.steady_state {
            return Err(ConfigError::new("checks.gibbs_monotone", "requires checks.steady_state = true"));
        }
        let mean = (m.bath_state().matrix() * m.phi.matrix()).trace().re;
        if mean.abs() > 1e-12 {
            return Err(ConfigError::new(
                "checks.gibbs_monotone",
                format!("bath coupling must have zero thermal mean, Tr(σΦ) = {mean:.3e}"),
            ));
        }
    }
    if checks.oracle && model.full_dim() > ORACLE_MAX_DIM {
        return Err(ConfigError::new(
            "checks.oracle",
            format!("oracle runs on dimension ≤ {ORACLE_MAX_DIM}, model has {}", model.full_dim()),
        ));
    }
    if checks.sweep && model.full_dim() > qfp_core::scenarios::sweep::SWEEP_MAX_DIM {
        return Err(ConfigError::new(
            "checks.sweep",
            format!(
                "sweep runs on dimension ≤ {}, model has {}",
                qfp_core::scenarios::sweep::SWEEP_MAX_DIM,
                model.full_dim()
            ),
        ));
    }

    let output = Output {
        dir: raw.output.dir.as_ref().map(PathBuf::from),
        csv: raw.output.csv.clone().unwrap_or_else(|| "results.csv".into()),
        json: raw.output.json.clone().unwrap_or_else(|| "summary.json".into()),
        export_generators: raw.output.export_generators.unwrap_or(false),
    };
    for (field, name) in [("output.csv", &output.csv), ("output.json", &output.json)] {
        if name.is_empty() {
            return Err(ConfigError::new(field, "file name must be nonempty"));
        }
    }

    Ok(ScenarioConfig {
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        preset: scenario.preset.clone(),
        raw,
        kind,
        model,
        schedules,
        time_grid,
        checks,
        output,
    })
}
