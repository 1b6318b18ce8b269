//! Scenario files: JSON layout, defaults and cross-field validation.

use std::path::{Path, PathBuf};

use nullwave_core::chaplygin::GasParameters;
use nullwave_core::geometry::{Harmonic, ObstacleShape};
use nullwave_core::initial::{DataDescription, DataKind};
use nullwave_core::linalg::Mat4;
use nullwave_core::nullform::{check_null, CubicPart, NullFormSpec, QuasilinearTensor, DEFAULT_SAMPLES, DEFAULT_TOLERANCE};
use nullwave_core::solver::flat3d::Flat3dGrid;
use nullwave_core::solver::radial::{OuterBoundary, SolverSettings, MAX_CFL};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    LinearRadial,
    NullRadial,
    NonnullRadial,
    ChaplyginRadial,
    #[serde(rename = "linear_3d")]
    Linear3d,
    OracleCompare,
    ConvergenceStudy,
    EpsilonSweep,
}

impl ScenarioKind {
    fn default_preset(self) -> Preset {
        match self {
            ScenarioKind::NullRadial => Preset::NullQ0,
            ScenarioKind::NonnullRadial => Preset::NonnullDt2,
            ScenarioKind::ChaplyginRadial | ScenarioKind::EpsilonSweep => Preset::Chaplygin,
            _ => Preset::Zero,
        }
    }

    /// Scenarios whose equation is the linear wave equation.
    pub fn is_linear(self) -> bool {
        matches!(
            self,
            ScenarioKind::LinearRadial | ScenarioKind::Linear3d | ScenarioKind::OracleCompare | ScenarioKind::ConvergenceStudy
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleConfig {
    Ball { b: f64 },
    /// Harmonics as `[degree, order, coefficient]`.
    Star { base: f64, harmonics: Vec<(u32, i32, f64)> },
}

impl Default for ObstacleConfig {
    fn default() -> Self {
        ObstacleConfig::Ball { b: 0.875 }
    }
}

impl ObstacleConfig {
    pub fn shape(&self) -> Result<ObstacleShape> {
        let shape = match self {
            ObstacleConfig::Ball { b } => ObstacleShape::ball(*b),
            ObstacleConfig::Star { base, harmonics } => ObstacleShape::star(
                *base,
                harmonics.iter().map(|&(degree, order, coefficient)| Harmonic { degree, order, coefficient }).collect(),
            ),
        };
        shape.map_err(|e| CliError::config("obstacle", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Zero,
    Chaplygin,
    NullQ0,
    NonnullDt2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NonlinearityConfig {
    Preset {
        preset: Preset,
    },
    Explicit {
        #[serde(rename = "S")]
        s: Mat4,
        #[serde(rename = "Q")]
        q: Box<QuasilinearTensor>,
    },
}

impl NonlinearityConfig {
    pub fn spec(&self) -> Result<NullFormSpec> {
        Ok(match self {
            NonlinearityConfig::Preset { preset: Preset::Zero } => NullFormSpec::zero(),
            NonlinearityConfig::Preset { preset: Preset::Chaplygin } => NullFormSpec::chaplygin(),
            NonlinearityConfig::Preset { preset: Preset::NullQ0 } => NullFormSpec::null_q0(),
            NonlinearityConfig::Preset { preset: Preset::NonnullDt2 } => NullFormSpec::nonnull_dt2(),
            NonlinearityConfig::Explicit { s, q } => NullFormSpec::new(*s, **q, CubicPart::None)?,
        })
    }

    pub fn is_chaplygin(&self) -> bool {
        matches!(self, NonlinearityConfig::Preset { preset: Preset::Chaplygin })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    Bump,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    #[serde(rename = "type")]
    pub kind: DataType,
    pub center: f64,
    pub width: f64,
    pub u0_amp: f64,
    pub u1_amp: f64,
    pub epsilon: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig { kind: DataType::Bump, center: 3.0, width: 1.0, u0_amp: 1.0, u1_amp: 0.0, epsilon: 0.01 }
    }
}

impl DataConfig {
    pub fn description(&self) -> DataDescription {
        DataDescription {
            kind: match self.kind {
                DataType::Bump => DataKind::Bump,
                DataType::Outgoing => DataKind::Outgoing,
            },
            center: self.center,
            width: self.width,
            u0_amp: self.u0_amp,
            u1_amp: self.u1_amp,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RMax {
    Auto(Auto),
    Value(f64),
}

impl RMax {
    pub fn value(self) -> Option<f64> {
        match self {
            RMax::Auto(_) => None,
            RMax::Value(v) => Some(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outer {
    Dod,
    Sommerfeld,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dr: f64,
    pub cfl: f64,
    pub r_max: RMax,
    pub outer: Outer,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dr: 0.005, cfl: 0.5, r_max: RMax::Auto(Auto::Auto), outer: Outer::Dod }
    }
}

impl GridConfig {
    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            cfl: self.cfl,
            outer: match self.outer {
                Outer::Dod => OuterBoundary::DomainOfDependence,
                Outer::Sommerfeld => OuterBoundary::Sommerfeld,
            },
            ..Default::default()
        }
    }
}

/// Cell counts and outer radius of the flattened 3-D grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid3dConfig {
    pub radial: usize,
    pub polar: usize,
    pub azimuthal: usize,
    pub y_max: f64,
    pub dt: Option<f64>,
}

impl Default for Grid3dConfig {
    fn default() -> Self {
        Grid3dConfig { radial: 64, polar: 8, azimuthal: 16, y_max: 5.0, dt: None }
    }
}

impl Grid3dConfig {
    pub fn grid(&self) -> Result<Flat3dGrid> {
        Ok(Flat3dGrid::new(self.radial, self.polar, self.azimuthal, self.y_max)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub order_cap: usize,
    pub sample_every: f64,
    pub snapshot_times: Vec<f64>,
    pub hierarchy_every: f64,
    pub local_radius: f64,
    pub fit_start: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            order_cap: 2,
            sample_every: 0.5,
            snapshot_times: Vec::new(),
            hierarchy_every: 5.0,
            local_radius: 5.0,
            fit_start: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GasConfig {
    pub rho_bar: f64,
    #[serde(rename = "P0")]
    pub p0: f64,
}

impl Default for GasConfig {
    fn default() -> Self {
        GasConfig { rho_bar: 1.0, p0: 2.0 }
    }
}

impl GasConfig {
    pub fn parameters(&self) -> Result<GasParameters> {
        Ok(GasParameters::new(self.rho_bar, self.p0)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

impl OutputConfig {
    pub fn csv(&self) -> bool {
        self.formats.contains(&Format::Csv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub epsilons: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { epsilons: vec![0.02, 0.01, 0.005] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub dr: Vec<f64>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { dr: vec![0.02, 0.01, 0.005] }
    }
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    /// `None` only for `oracle_compare`, which is posed outside the unit ball.
    pub obstacle: Option<ObstacleConfig>,
    pub nonlinearity: NonlinearityConfig,
    pub data: DataConfig,
    pub grid: GridConfig,
    pub grid3d: Grid3dConfig,
    pub t_final: f64,
    pub diagnostics: DiagnosticsConfig,
    pub gas: Option<GasConfig>,
    pub output: OutputConfig,
    pub seed: u64,
    pub sweep: SweepConfig,
    pub convergence: ConvergenceConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<ScenarioKind>,
    obstacle: Option<ObstacleConfig>,
    nonlinearity: Option<NonlinearityConfig>,
    #[serde(default)]
    data: DataConfig,
    #[serde(default)]
    grid: GridConfig,
    grid3d: Option<Grid3dConfig>,
    t_final: Option<f64>,
    #[serde(default)]
    diagnostics: DiagnosticsConfig,
    gas: Option<GasConfig>,
    #[serde(default)]
    output: OutputConfig,
    #[serde(default)]
    seed: u64,
    sweep: Option<SweepConfig>,
    convergence: Option<ConvergenceConfig>,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::config(field, format!("must be positive, got {v}")))
    }
}

fn reject_unused<T>(entry: &Option<T>, field: &str, scenario: ScenarioKind) -> Result<()> {
    match entry {
        Some(_) => Err(CliError::config(field, format!("is not used by {}", scenario_name(scenario)))),
        None => Ok(()),
    }
}

pub fn scenario_name(kind: ScenarioKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

/// Reads and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    parse_config_str(&text)
}

/// Field path of a deserialization error, `"<root>"` when it is not inside an
/// object.
fn json_error(e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = e.path().to_string();
    let field = if path == "." { "<root>".to_owned() } else { path };
    CliError::config(field, format!("is malformed: {}", e.inner()))
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(json_error)?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<ScenarioConfig> {
    let grid = raw.grid;
    positive("grid.dr", grid.dr)?;
    if !(grid.cfl > 0.0) {
        return Err(CliError::config("grid.cfl", format!("must be positive, got {}", grid.cfl)));
    }
    if grid.cfl > MAX_CFL {
        return Err(CliError::config("grid.cfl", format!("exceeds {MAX_CFL} (got {})", grid.cfl)));
    }
    if let Some(r) = grid.r_max.value() {
        positive("grid.r_max", r)?;
    }
    let scenario = raw.scenario.ok_or_else(|| CliError::config("scenario", "is required"))?;
    let t_final = raw.t_final.ok_or_else(|| CliError::config("t_final", "is required"))?;
    positive("t_final", t_final)?;

    let diagnostics = raw.diagnostics;
    if diagnostics.order_cap > 2 {
        return Err(CliError::config("diagnostics.order_cap", format!("at most 2, got {}", diagnostics.order_cap)));
    }
    positive("diagnostics.sample_every", diagnostics.sample_every)?;
    positive("diagnostics.hierarchy_every", diagnostics.hierarchy_every)?;
    positive("diagnostics.local_radius", diagnostics.local_radius)?;
    if !(diagnostics.fit_start >= 0.0) {
        return Err(CliError::config("diagnostics.fit_start", "must be nonnegative"));
    }
    for (i, &t) in diagnostics.snapshot_times.iter().enumerate() {
        if !(0.0..=t_final).contains(&t) {
            return Err(CliError::config(
                format!("diagnostics.snapshot_times[{i}]"),
                format!("{t} outside [0, {t_final}]"),
            ));
        }
    }
    if raw.output.formats.is_empty() {
        return Err(CliError::config("output.formats", "must name at least one format"));
    }

    let obstacle = match scenario {
        ScenarioKind::OracleCompare => {
            if raw.obstacle.is_some() {
                return Err(CliError::config("obstacle", "oracle_compare is posed outside the unit ball; omit it"));
            }
            None
        }
        _ => Some(raw.obstacle.unwrap_or_default()),
    };
    let shape = obstacle.as_ref().map(ObstacleConfig::shape).transpose()?;
    let radial = !matches!(scenario, ScenarioKind::Linear3d | ScenarioKind::OracleCompare);
    if radial && !matches!(shape, Some(ObstacleShape::Ball { .. })) {
        return Err(CliError::config("obstacle", "radial scenarios need a ball"));
    }

    let nonlinearity = raw.nonlinearity.unwrap_or(NonlinearityConfig::Preset { preset: scenario.default_preset() });
    let spec = nonlinearity.spec()?;
    if scenario.is_linear() && !spec.is_zero() {
        return Err(CliError::config(
            "nonlinearity",
            format!("{} solves the linear equation; quasilinear terms are not supported", scenario_name(scenario)),
        ));
    }
    let null = || check_null(&spec, DEFAULT_TOLERANCE, DEFAULT_SAMPLES);
    match scenario {
        ScenarioKind::NullRadial if !null().holds => {
            return Err(CliError::config("nonlinearity", format!("fails the null condition (residual {:e})", null().max_residual)));
        }
        ScenarioKind::NonnullRadial if null().holds => {
            return Err(CliError::config("nonlinearity", "satisfies the null condition; use null_radial"));
        }
        ScenarioKind::ChaplyginRadial if !nonlinearity.is_chaplygin() => {
            return Err(CliError::config("nonlinearity", "chaplygin_radial needs {\"preset\":\"chaplygin\"}"));
        }
        _ => {}
    }
    if !spec.is_isotropic() && radial {
        return Err(CliError::config("nonlinearity", "radial mode needs a rotation-invariant nonlinearity"));
    }

    let data = raw.data;
    positive("data.width", data.width)?;
    if !(data.epsilon >= 0.0) || !data.epsilon.is_finite() {
        return Err(CliError::config("data.epsilon", format!("must be nonnegative, got {}", data.epsilon)));
    }
    match &shape {
        Some(shape) => data.description().validate(shape)?,
        None if data.center - data.width <= 1.0 => {
            return Err(CliError::config("data.center", "bump support reaches the unit sphere"));
        }
        None => {}
    }

    let chaplygin = nonlinearity.is_chaplygin();
    let gas = match (chaplygin, raw.gas) {
        (true, gas) => {
            let gas = gas.unwrap_or_default();
            gas.parameters()?;
            Some(gas)
        }
        (false, Some(_)) => return Err(CliError::config("gas", "only used with the chaplygin nonlinearity")),
        (false, None) => None,
    };

    if scenario != ScenarioKind::Linear3d {
        reject_unused(&raw.grid3d, "grid3d", scenario)?;
    }
    let grid3d = raw.grid3d.unwrap_or_default();
    if scenario == ScenarioKind::Linear3d {
        grid3d.grid()?;
        if let Some(dt) = grid3d.dt {
            positive("grid3d.dt", dt)?;
        }
    }

    if scenario != ScenarioKind::EpsilonSweep {
        reject_unused(&raw.sweep, "sweep", scenario)?;
    }
    let sweep = raw.sweep.unwrap_or_default();
    validate_epsilons(&sweep.epsilons)?;

    if scenario != ScenarioKind::ConvergenceStudy {
        reject_unused(&raw.convergence, "convergence", scenario)?;
    }
    let convergence = raw.convergence.unwrap_or_default();
    validate_drs(&convergence.dr)?;

    Ok(ScenarioConfig {
        scenario,
        obstacle,
        nonlinearity,
        data,
        grid,
        grid3d,
        t_final,
        diagnostics,
        gas,
        output: raw.output,
        seed: raw.seed,
        sweep,
        convergence,
    })
}

pub fn validate_epsilons(eps: &[f64]) -> Result<()> {
    if eps.len() < 2 {
        return Err(CliError::config("sweep.epsilons", "need at least two amplitudes"));
    }
    for (i, &e) in eps.iter().enumerate() {
        positive(&format!("sweep.epsilons[{i}]"), e)?;
    }
    Ok(())
}

pub fn validate_drs(drs: &[f64]) -> Result<()> {
    if drs.len() < 2 {
        return Err(CliError::config("convergence.dr", "need at least two spacings"));
    }
    for (i, &h) in drs.iter().enumerate() {
        positive(&format!("convergence.dr[{i}]"), h)?;
        if i > 0 && h >= drs[i - 1] {
            return Err(CliError::config(format!("convergence.dr[{i}]"), "spacings must decrease"));
        }
    }
    Ok(())
}

/// A validated `chaplygin_radial` scenario for potential data `data` scaled
/// by `epsilon`, with defaults elsewhere.
pub fn chaplygin_scenario(epsilon: f64, data: DataConfig, gas: GasConfig, t_final: f64) -> Result<ScenarioConfig> {
    validate(RawConfig {
        scenario: Some(ScenarioKind::ChaplyginRadial),
        obstacle: None,
        nonlinearity: None,
        data: DataConfig { epsilon, ..data },
        grid: GridConfig::default(),
        grid3d: None,
        t_final: Some(t_final),
        diagnostics: DiagnosticsConfig::default(),
        gas: Some(gas),
        output: OutputConfig::default(),
        seed: 0,
        sweep: None,
        convergence: None,
    })
}

impl ScenarioConfig {
    pub fn shape(&self) -> Result<Option<ObstacleShape>> {
        self.obstacle.as_ref().map(ObstacleConfig::shape).transpose()
    }

    pub fn spec(&self) -> Result<NullFormSpec> {
        self.nonlinearity.spec()
    }

    pub fn gas_parameters(&self) -> Result<GasParameters> {
        self.gas.unwrap_or_default().parameters()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(r#"{"scenario":"linear_radial","t_final":10}"#).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.grid.cfl, 0.5);
        assert_eq!(c.grid.dr, 0.005);
        assert_eq!(c.grid.r_max, RMax::Auto(Auto::Auto));
        assert_eq!(c.diagnostics.order_cap, 2);
        assert_eq!(c.obstacle, Some(ObstacleConfig::Ball { b: 0.875 }));
        assert_eq!(c.nonlinearity, NonlinearityConfig::Preset { preset: Preset::Zero });
        assert_eq!(c.data, DataConfig::default());
        assert!(c.gas.is_none());
    }

    #[test]
    fn cfl_bound_names_field() {
        let e = parse_config_str(r#"{"grid":{"cfl":1.5}}"#).unwrap_err();
        assert_eq!(e.to_string(), "grid.cfl exceeds 0.5 (got 1.5)");
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn overlapping_bump_is_rejected() {
        let text = r#"{"scenario":"chaplygin_radial","t_final":10,"data":{"center":1.0,"width":0.5}}"#;
        match parse_config_str(text).unwrap_err() {
            CliError::Config { field, message } => {
                assert_eq!(field, "data.center");
                assert!(message.contains("reaches the obstacle"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn malformed_json_reports_path() {
        let e = parse_config_str(r#"{"scenario":"linear_radial","t_final":10,"grid":{"dr":"x"}}"#).unwrap_err();
        assert!(matches!(&e, CliError::Config { field, .. } if field == "grid.dr"), "{e}");
        let e = parse_config_str("{not json").unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let e = parse_config_str(r#"{"scenario":"linear_radial","t_final":10,"grdi":{}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn presets_and_explicit_tensors() {
        let c = parse_config_str(r#"{"scenario":"null_radial","t_final":1}"#).unwrap();
        assert_eq!(c.spec().unwrap(), NullFormSpec::null_q0());
        let c = parse_config_str(r#"{"scenario":"chaplygin_radial","t_final":1}"#).unwrap();
        assert_eq!(c.gas, Some(GasConfig::default()));
        let mut s = [[0.0; 4]; 4];
        s[0][0] = 1.0;
        for i in 1..4 {
            s[i][i] = -1.0;
        }
        let q = [[[0.0; 4]; 4]; 4];
        let text = serde_json::json!({"scenario":"null_radial","t_final":1,"nonlinearity":{"S":s,"Q":q}}).to_string();
        let c = parse_config_str(&text).unwrap();
        assert_eq!(c.spec().unwrap().semilinear(), &s);
    }

    #[test]
    fn cross_field_rules() {
        let bad = [
            (r#"{"scenario":"linear_3d","t_final":1,"nonlinearity":{"preset":"chaplygin"}}"#, "nonlinearity"),
            (r#"{"scenario":"linear_radial","t_final":1,"nonlinearity":{"preset":"null_q0"}}"#, "nonlinearity"),
            (r#"{"scenario":"linear_radial","t_final":1,"gas":{"rho_bar":1,"P0":2}}"#, "gas"),
            (r#"{"scenario":"null_radial","t_final":1,"nonlinearity":{"preset":"nonnull_dt2"}}"#, "nonlinearity"),
            (r#"{"scenario":"nonnull_radial","t_final":1,"nonlinearity":{"preset":"chaplygin"}}"#, "nonlinearity"),
            (r#"{"scenario":"chaplygin_radial","t_final":1,"nonlinearity":{"preset":"null_q0"}}"#, "nonlinearity"),
            (r#"{"scenario":"chaplygin_radial","t_final":1,"gas":{"rho_bar":1,"P0":0.5}}"#, "gas.P0"),
            (r#"{"scenario":"oracle_compare","t_final":1,"obstacle":{"kind":"ball","b":0.875}}"#, "obstacle"),
            (
                r#"{"scenario":"linear_radial","t_final":1,"obstacle":{"kind":"star","base":0.875,"harmonics":[[2,0,0.01]]}}"#,
                "obstacle",
            ),
            (r#"{"scenario":"linear_radial","t_final":1,"obstacle":{"kind":"ball","b":1.5}}"#, "obstacle"),
            (r#"{"scenario":"linear_radial","t_final":-1}"#, "t_final"),
            (r#"{"t_final":1}"#, "scenario"),
            (r#"{"scenario":"linear_radial","t_final":1,"sweep":{"epsilons":[0.1]}}"#, "sweep"),
            (r#"{"scenario":"epsilon_sweep","t_final":1,"sweep":{"epsilons":[0.1]}}"#, "sweep.epsilons"),
            (r#"{"scenario":"epsilon_sweep","t_final":1,"sweep":{"epsilons":[0.1,-1]}}"#, "sweep.epsilons[1]"),
            (r#"{"scenario":"convergence_study","t_final":1,"convergence":{"dr":[0.01,0.02]}}"#, "convergence.dr[1]"),
            (r#"{"scenario":"linear_radial","t_final":1,"diagnostics":{"order_cap":3}}"#, "diagnostics.order_cap"),
            (r#"{"scenario":"linear_radial","t_final":1,"diagnostics":{"snapshot_times":[2]}}"#, "diagnostics.snapshot_times[0]"),
            (r#"{"scenario":"linear_3d","t_final":1,"grid3d":{"azimuthal":15}}"#, "grid3d.azimuthal"),
            (r#"{"scenario":"linear_radial","t_final":1,"grid3d":{}}"#, "grid3d"),
            (r#"{"scenario":"linear_radial","t_final":1,"output":{"formats":[]}}"#, "output.formats"),
        ];
        for (text, want) in bad {
            match parse_config_str(text) {
                Err(CliError::Config { field, .. }) => assert_eq!(field, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn chaplygin_scenario_builder() {
        let c = chaplygin_scenario(0.02, DataConfig::default(), GasConfig::default(), 10.0).unwrap();
        assert_eq!(c.scenario, ScenarioKind::ChaplyginRadial);
        assert!(c.nonlinearity.is_chaplygin());
        assert_eq!(c.data.epsilon, 0.02);
        let near = DataConfig { center: 1.0, width: 0.5, ..Default::default() };
        assert!(chaplygin_scenario(0.02, near, GasConfig::default(), 10.0).is_err());
        let thin = GasConfig { rho_bar: 1.0, p0: 0.5 };
        assert!(chaplygin_scenario(0.02, DataConfig::default(), thin, 10.0).is_err());
    }

    #[test]
    fn star_obstacle_and_r_max() {
        let text = r#"{"scenario":"linear_3d","t_final":1,
            "obstacle":{"kind":"star","base":0.875,"harmonics":[[2,0,0.01]]},
            "grid":{"r_max":20,"outer":"sommerfeld"}}"#;
        let c = parse_config_str(text).unwrap();
        assert!(matches!(c.shape().unwrap(), Some(ObstacleShape::StarShaped { .. })));
        assert_eq!(c.grid.r_max.value(), Some(20.0));
        assert_eq!(c.grid.outer, Outer::Sommerfeld);
    }
}
