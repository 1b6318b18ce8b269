//! Runs validated scenarios and writes their artifacts.

use std::sync::Arc;

use nullwave_core::chaplygin::{FlowMonitor, FlowReport};
use nullwave_core::diagnostics::{DecayFit, DiagnosticsReport};
use nullwave_core::grid::RadialGrid;
use nullwave_core::initial::{bump, DataDescription, DataKind, InitialData};
use nullwave_core::nullform::NullFormSpec;
use nullwave_core::solver::flat3d::{relative_l2_to_profile, run_3d_linear, Flat3dConfig};
use nullwave_core::solver::oracle::{oracle_residual, spherical_oracle, SphericalOracleProblem};
use nullwave_core::solver::run::{run_radial, RadialProblem, RunOutput, RunSettings};
use nullwave_core::solver::SolverSettings;
use serde::{Deserialize, Serialize};

use crate::config::{scenario_name, validate_drs, validate_epsilons, ScenarioConfig, ScenarioKind};
use crate::error::{exit, CliError, Result};
use crate::output::{diagnostics_table, flow_table, num, snapshot_name, snapshot_table, ManifestEntry, OutputDir};
use crate::parallel::parallel_map;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    pub truncated_at: Option<f64>,
}

impl From<&DecayFit> for FitSummary {
    fn from(f: &DecayFit) -> Self {
        FitSummary { rate: f.rate, intercept: f.intercept, r_squared: f.r_squared, points: f.points, truncated_at: f.truncated_at }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub rho_min: f64,
    pub density_floor: f64,
    pub max_density_deviation: f64,
    pub max_speed: f64,
    pub max_slip_residual: f64,
    pub max_bernoulli_residual: f64,
    pub max_continuity_residual: Option<f64>,
    pub physical: bool,
    pub violation: Option<String>,
}

impl From<&FlowReport> for FlowSummary {
    fn from(f: &FlowReport) -> Self {
        FlowSummary {
            rho_min: f.rho_min(),
            density_floor: f.gas.density_floor(),
            max_density_deviation: f.max_density_deviation(),
            max_speed: f.max_speed(),
            max_slip_residual: f.max_slip_residual(),
            max_bernoulli_residual: f.max_bernoulli_residual(),
            max_continuity_residual: f.max_continuity_residual(),
            physical: f.is_physical(),
            violation: f.violation.as_ref().map(|v| format!("t = {}: {}", v.t, v.message)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub relative_l2: f64,
    pub residual_pde: f64,
    pub residual_boundary: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMethod {
    /// Error against a manufactured exact solution.
    Manufactured,
    /// Error against the spherical quadrature oracle.
    Oracle,
    /// Differences between successive resolutions.
    SelfConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub method: ConvergenceMethod,
    pub dr: Vec<f64>,
    /// Relative L2 errors; for self-convergence, entry `i` compares
    /// resolutions `i` and `i + 1`.
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub max_envelope: Option<f64>,
    pub amplification: Option<f64>,
    pub blowup_time: Option<f64>,
    pub rho_min: Option<f64>,
    pub max_density_deviation: Option<f64>,
    pub physical: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `log sup_t D(t)` against `log epsilon`.
    pub envelope_slope: Option<f64>,
    pub density_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flat3dSummary {
    pub steps: usize,
    pub dt: f64,
    pub energy_drift: Option<f64>,
    pub min_jacobian_determinant: f64,
    /// Relative L2 distance to the radial solver at matched spacing (ball
    /// only).
    pub radial_relative_l2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub exit_status: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplification: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_drift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_fit: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kss_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_envelope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat3d: Option<Flat3dSummary>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunSummary {
    fn escalate(&mut self, status: i32) {
        self.exit_status = self.exit_status.max(status);
    }

    /// `forced` runs also record the KSS ratio; without forcing its
    /// denominator is only the roundoff in the wave operator.
    fn record_report(&mut self, report: &DiagnosticsReport, forced: bool) {
        self.steps = Some(report.steps);
        self.dt = Some(report.dt);
        self.amplification = report.amplification();
        self.energy_drift = report.energy_drift();
        self.decay_fit = report.decay_fit.as_ref().map(FitSummary::from);
        self.max_envelope = Some(report.max_envelope());
        self.kss_ratio = report.last().filter(|r| forced && r.kss_rhs > 0.0).map(|r| r.kss_lhs / r.kss_rhs);
        if let Some(b) = &report.blowup {
            self.blowup_time = Some(b.t);
            self.blowup_reason = Some(format!("{:?}", b.reason));
            self.escalate(exit::BLOWUP);
        }
    }
}

/// Runs a scenario, writes its files under `config.output.dir` and the
/// summary last.
///
/// Numerical failures are reported through `exit_status = 4` in the returned
/// summary; only invalid input and unwritable output are errors.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunSummary> {
    match config.scenario {
        ScenarioKind::EpsilonSweep => sweep(config, &config.sweep.epsilons),
        ScenarioKind::ConvergenceStudy => converge(config, &config.convergence.dr),
        _ => finish(config, |dir, summary| match config.scenario {
            ScenarioKind::Linear3d => run_flat3d(config, dir, summary),
            ScenarioKind::OracleCompare => run_oracle(config, dir, summary),
            _ => run_radial_scenario(config, dir, summary),
        }),
    }
}

fn finish(config: &ScenarioConfig, body: impl FnOnce(&mut OutputDir, &mut RunSummary) -> Result<()>) -> Result<RunSummary> {
    let mut dir = OutputDir::create(&config.output.dir)?;
    let mut summary = RunSummary { scenario: scenario_name(config.scenario), seed: config.seed, ..Default::default() };
    match body(&mut dir, &mut summary) {
        Ok(()) => {}
        Err(CliError::Numerical(e)) => {
            summary.escalate(exit::DIVERGENCE);
            summary.message = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    summary.manifest = dir.manifest.clone();
    dir.json_atomic("summary.json", &summary)?;
    Ok(summary)
}

fn run_settings(config: &ScenarioConfig) -> RunSettings {
    let d = &config.diagnostics;
    RunSettings {
        sample_every: d.sample_every,
        snapshot_times: d.snapshot_times.clone(),
        order_cap: d.order_cap,
        hierarchy_every: d.hierarchy_every,
        local_radius: d.local_radius,
        fit_start: d.fit_start,
        ..Default::default()
    }
}

/// The radial problem of `config` at amplitude `epsilon` and spacing `dr`.
pub fn radial_problem(config: &ScenarioConfig, epsilon: f64, dr: f64) -> Result<RadialProblem> {
    let shape = config.shape()?.ok_or_else(|| CliError::config("obstacle", "radial runs need a ball"))?;
    let data = DataDescription { epsilon, ..config.data.description() };
    Ok(RadialProblem::from_description(
        &shape,
        config.spec()?,
        &data,
        dr,
        config.grid.r_max.value(),
        config.grid.solver_settings(),
        config.t_final,
    )?)
}

pub struct RadialRun {
    pub grid: RadialGrid,
    pub output: RunOutput,
    pub flow: Option<FlowReport>,
}

pub fn run_radial_case(config: &ScenarioConfig, epsilon: f64, dr: f64) -> Result<RadialRun> {
    let problem = radial_problem(config, epsilon, dr)?;
    let settings = run_settings(config);
    let (output, flow) = if config.nonlinearity.is_chaplygin() {
        let mut monitor = FlowMonitor::new(config.gas_parameters()?);
        let out = run_radial(&problem, &settings, Some(&mut monitor))?;
        (out, Some(monitor.report))
    } else {
        (run_radial(&problem, &settings, None)?, None)
    };
    Ok(RadialRun { grid: problem.grid, output, flow })
}

fn write_report(config: &ScenarioConfig, dir: &mut OutputDir, report: &DiagnosticsReport, name: &str) -> Result<()> {
    if config.output.csv() {
        let (h, rows) = diagnostics_table(report, config.diagnostics.local_radius);
        dir.csv(name, &h, rows)?;
    }
    Ok(())
}

fn run_radial_scenario(config: &ScenarioConfig, dir: &mut OutputDir, summary: &mut RunSummary) -> Result<()> {
    let run = run_radial_case(config, config.data.epsilon, config.grid.dr)?;
    write_report(config, dir, &run.output.report, "diagnostics.csv")?;
    if config.output.csv() {
        for snap in &run.output.snapshots {
            let (h, rows) = snapshot_table(&run.grid, snap);
            dir.csv(&snapshot_name(snap.t), &h, rows)?;
        }
        let (h, rows) = snapshot_table(&run.grid, &run.output.last);
        dir.csv("final.csv", &h, rows)?;
        if let Some(flow) = &run.flow {
            let (h, rows) = flow_table(flow);
            dir.csv("flow.csv", &h, rows)?;
        }
    }
    summary.record_report(&run.output.report, false);
    if let Some(flow) = &run.flow {
        if !flow.is_physical() {
            summary.escalate(exit::BLOWUP);
        }
        summary.flow = Some(FlowSummary::from(flow));
    }
    Ok(())
}

/// Fixed source of the oracle comparison: a bump in time centered at
/// `t = 1` times a bump in radius centered at `r = 2.5`, no boundary datum.
pub fn oracle_source(t: f64, r: f64) -> f64 {
    bump(t - 1.0) * bump(r - 2.5)
}

pub fn oracle_problem() -> SphericalOracleProblem {
    SphericalOracleProblem {
        f1: Arc::new(oracle_source),
        f2: Arc::new(|_| 0.0),
        f1_support: Some(((0.0, 2.0), (1.5, 3.5))),
        f2_support: None,
        resolution: 200,
    }
}

/// Largest residual of the quadrature output accepted before it is used as
/// a reference.
pub const ORACLE_RESIDUAL_LIMIT: f64 = 5e-3;

/// Substitutes the oracle into the equation and boundary condition.
pub fn validate_oracle(problem: &SphericalOracleProblem) -> (f64, f64) {
    let pts = [(1.0, 2.5), (1.5, 2.0), (1.2, 3.0), (1.8, 1.4), (3.0, 2.0), (5.0, 2.5), (6.5, 4.2)];
    let times = [1.5, 2.5, 4.0, 6.0];
    let r = oracle_residual(problem, &pts, &times, 0.02);
    (r.pde, r.boundary)
}

/// Forced linear run outside the unit ball with zero data.
pub fn oracle_run(config: &ScenarioConfig, dr: f64) -> Result<(RadialGrid, RunOutput)> {
    let t = config.t_final;
    let r_max = config.grid.r_max.value().unwrap_or_else(|| RadialGrid::domain_of_dependence_radius(1.0, 3.5, t));
    let grid = RadialGrid::new(1.0, r_max, dr)?;
    let problem = RadialProblem {
        grid: grid.clone(),
        spec: NullFormSpec::zero(),
        solver: config.grid.solver_settings(),
        data: InitialData::zero(&grid),
        forcing: Some(Arc::new(oracle_source)),
        t_final: t,
    };
    let out = run_radial(&problem, &run_settings(config), None)?;
    Ok((grid, out))
}

fn relative_l2(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.l2_norm(&diff) / grid.l2_norm(b)
}

fn run_oracle(config: &ScenarioConfig, dir: &mut OutputDir, summary: &mut RunSummary) -> Result<()> {
    let oracle = oracle_problem();
    let (pde, boundary) = validate_oracle(&oracle);
    if !(pde <= ORACLE_RESIDUAL_LIMIT && boundary <= ORACLE_RESIDUAL_LIMIT) {
        return Err(CliError::Numerical(nullwave_core::Error::Degenerate(format!(
            "oracle residual check failed: equation {pde:e}, boundary {boundary:e}"
        ))));
    }
    let (grid, out) = oracle_run(config, config.grid.dr)?;
    let exact: Vec<f64> = grid.radii().iter().map(|&r| spherical_oracle(&oracle, out.last.t, r)).collect();
    write_report(config, dir, &out.report, "diagnostics.csv")?;
    if config.output.csv() {
        let rows = (0..grid.len()).map(|j| vec![num(grid.r(j)), num(out.last.u[j]), num(exact[j])]);
        dir.csv("oracle.csv", &["r", "u", "oracle"].map(String::from), rows)?;
    }
    summary.record_report(&out.report, true);
    summary.oracle = Some(OracleSummary { relative_l2: relative_l2(&grid, &out.last.u, &exact), residual_pde: pde, residual_boundary: boundary });
    Ok(())
}

/// `u = exp(-x^2) cos(3 x^2 - t)` with `x = r - r_min`: satisfies the Neumann
/// condition and is negligible ten units out.
pub fn manufactured_exact(r_min: f64, t: f64, r: f64) -> f64 {
    let x = r - r_min;
    (-x * x).exp() * (3.0 * x * x - t).cos()
}

/// Source that makes [`manufactured_exact`] a solution.
pub fn manufactured_source(r_min: f64, t: f64, r: f64) -> f64 {
    let x = r - r_min;
    let e = (-x * x).exp();
    let (e1, e2) = (-2.0 * x * e, (4.0 * x * x - 2.0) * e);
    let p = 3.0 * x * x - t;
    let (p1, p2) = (6.0 * x, 6.0);
    let (c, s) = (p.cos(), p.sin());
    let utt = -e * c;
    let ur = e1 * c - e * s * p1;
    let urr = e2 * c - 2.0 * e1 * s * p1 - e * c * p1 * p1 - e * s * p2;
    utt - urr - 2.0 * ur / r
}

/// Relative L2 error of the manufactured run at `t_final`.
pub fn manufactured_error(r_min: f64, dr: f64, settings: SolverSettings, t_final: f64) -> Result<f64> {
    let grid = RadialGrid::new(r_min, r_min + 10.0, dr)?;
    let radii = grid.radii();
    let u0 = radii.iter().map(|&r| manufactured_exact(r_min, 0.0, r)).collect();
    let u1 = radii.iter().map(|&r| (-(r - r_min).powi(2)).exp() * (3.0 * (r - r_min).powi(2)).sin()).collect();
    let problem = RadialProblem {
        grid: grid.clone(),
        spec: NullFormSpec::zero(),
        solver: settings,
        data: InitialData { u0, u1, epsilon: 1.0, support_radius: r_min + 10.0 },
        forcing: Some(Arc::new(move |t, r| manufactured_source(r_min, t, r))),
        t_final,
    };
    let out = run_radial(&problem, &RunSettings { order_cap: 0, ..Default::default() }, None)?;
    let exact: Vec<f64> = radii.iter().map(|&r| manufactured_exact(r_min, out.last.t, r)).collect();
    Ok(relative_l2(&grid, &out.last.u, &exact))
}

fn observed_orders(drs: &[f64], errors: &[f64]) -> Vec<f64> {
    errors.windows(2).zip(drs.windows(2)).map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()).collect()
}

/// Runs the scenario of `config` at each spacing in `drs` and measures the
/// observed order of accuracy.
pub fn converge(config: &ScenarioConfig, drs: &[f64]) -> Result<RunSummary> {
    validate_drs(drs)?;
    let method = match config.scenario {
        ScenarioKind::ConvergenceStudy => ConvergenceMethod::Manufactured,
        ScenarioKind::OracleCompare => ConvergenceMethod::Oracle,
        ScenarioKind::Linear3d => return Err(CliError::config("scenario", "convergence runs are radial only")),
        _ if drs.len() < 3 => return Err(CliError::config("convergence.dr", "self-convergence needs three spacings")),
        _ => ConvergenceMethod::SelfConvergence,
    };
    finish(config, |dir, summary| {
        let errors: Vec<f64> = match method {
            ConvergenceMethod::Manufactured => {
                let r_min = match config.shape()? {
                    Some(nullwave_core::geometry::ObstacleShape::Ball { radius }) => radius,
                    _ => return Err(CliError::config("obstacle", "radial runs need a ball")),
                };
                let settings = config.grid.solver_settings();
                parallel_map(drs, |&h| manufactured_error(r_min, h, settings, config.t_final))?.into_iter().collect::<Result<_>>()?
            }
            ConvergenceMethod::Oracle => {
                let oracle = oracle_problem();
                let runs = parallel_map(drs, |&h| oracle_run(config, h))?;
                runs.into_iter()
                    .map(|run| {
                        let (grid, out) = run?;
                        let exact: Vec<f64> = grid.radii().iter().map(|&r| spherical_oracle(&oracle, out.last.t, r)).collect();
                        Ok(relative_l2(&grid, &out.last.u, &exact))
                    })
                    .collect::<Result<_>>()?
            }
            ConvergenceMethod::SelfConvergence => {
                let runs: Vec<RadialRun> =
                    parallel_map(drs, |&h| run_radial_case(config, config.data.epsilon, h))?.into_iter().collect::<Result<_>>()?;
                let finest = runs.last().expect("at least three runs");
                let scale = finest.grid.l2_norm(&finest.output.last.u);
                runs.windows(2)
                    .map(|w| {
                        let (coarse, fine) = (&w[0], &w[1]);
                        let diff: Vec<f64> = (0..coarse.grid.len())
                            .map(|j| coarse.output.last.u[j] - fine.grid.interpolate(&fine.output.last.u, coarse.grid.r(j)))
                            .collect();
                        coarse.grid.l2_norm(&diff) / scale
                    })
                    .collect()
            }
        };
        let orders = match method {
            ConvergenceMethod::SelfConvergence => observed_orders(&drs[..drs.len() - 1], &errors),
            _ => observed_orders(drs, &errors),
        };
        if config.output.csv() {
            let rows = errors.iter().enumerate().map(|(i, e)| {
                let order = if i == 0 { String::new() } else { num(orders[i - 1]) };
                vec![num(drs[i]), num(*e), order]
            });
            dir.csv("convergence.csv", &["dr", "error", "order"].map(String::from), rows)?;
        }
        summary.convergence = Some(ConvergenceSummary { method, dr: drs.to_vec(), errors, orders });
        Ok(())
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs the radial scenario of `config` once per amplitude.
pub fn sweep(config: &ScenarioConfig, epsilons: &[f64]) -> Result<RunSummary> {
    validate_epsilons(epsilons)?;
    if matches!(config.scenario, ScenarioKind::Linear3d | ScenarioKind::OracleCompare | ScenarioKind::ConvergenceStudy) {
        return Err(CliError::config("scenario", "amplitude sweeps need a radial scenario with data"));
    }
    finish(config, |dir, summary| {
        let runs = parallel_map(epsilons, |&eps| run_radial_case(config, eps, config.grid.dr))?;
        let mut points = Vec::new();
        for (&epsilon, run) in epsilons.iter().zip(runs) {
            let point = match run {
                Ok(run) => {
                    let report = &run.output.report;
                    if report.blowup.is_some() || run.flow.as_ref().is_some_and(|f| !f.is_physical()) {
                        summary.escalate(exit::BLOWUP);
                    }
                    write_report(config, dir, report, &format!("diagnostics_eps{epsilon}.csv"))?;
                    SweepPoint {
                        epsilon,
                        max_envelope: Some(report.max_envelope()),
                        amplification: report.amplification(),
                        blowup_time: report.blowup.map(|b| b.t),
                        rho_min: run.flow.as_ref().map(FlowReport::rho_min),
                        max_density_deviation: run.flow.as_ref().map(FlowReport::max_density_deviation),
                        physical: run.flow.as_ref().map(FlowReport::is_physical),
                        error: None,
                    }
                }
                Err(CliError::Numerical(e)) => {
                    summary.escalate(exit::DIVERGENCE);
                    SweepPoint {
                        epsilon,
                        max_envelope: None,
                        amplification: None,
                        blowup_time: None,
                        rho_min: None,
                        max_density_deviation: None,
                        physical: None,
                        error: Some(e.to_string()),
                    }
                }
                Err(e) => return Err(e),
            };
            points.push(point);
        }
        let envelope: Vec<(f64, f64)> = points.iter().filter_map(|p| Some((p.epsilon, p.max_envelope?))).collect();
        let density: Vec<(f64, f64)> = points.iter().filter_map(|p| Some((p.epsilon, p.max_density_deviation?))).collect();
        if config.output.csv() {
            let opt = |v: Option<f64>| v.map_or_else(String::new, num);
            let rows = points.iter().map(|p| {
                vec![num(p.epsilon), opt(p.max_envelope), opt(p.amplification), opt(p.rho_min), opt(p.blowup_time)]
            });
            dir.csv("sweep.csv", &["epsilon", "max_envelope", "amplification", "rho_min", "blowup_time"].map(String::from), rows)?;
        }
        summary.sweep = Some(SweepSummary { envelope_slope: log_log_slope(&envelope), density_slope: log_log_slope(&density), points });
        Ok(())
    })
}

/// Radial profiles `(u0, u1)` of the data, scaled by `epsilon`.
fn radial_profiles(data: &DataDescription) -> (impl Fn(f64) -> f64 + Send + Sync, impl Fn(f64) -> f64 + Send + Sync) {
    let d = *data;
    let p0 = d.profile(d.u0_amp);
    let p1 = d.profile(d.u1_amp);
    let u0 = move |r: f64| d.epsilon * p0.value(r);
    let u1 = move |r: f64| match d.kind {
        DataKind::Bump => d.epsilon * p1.value(r),
        DataKind::Outgoing => {
            let (f, fr, _) = p0.jet(r);
            -d.epsilon * (f / r + fr)
        }
    };
    (u0, u1)
}

fn run_flat3d(config: &ScenarioConfig, dir: &mut OutputDir, summary: &mut RunSummary) -> Result<()> {
    let shape = config.shape()?.expect("3-D scenarios carry an obstacle");
    let grid = config.grid3d.grid()?;
    let data = config.data.description();
    let (u0, u1) = radial_profiles(&data);
    let cfg = Flat3dConfig {
        dt: config.grid3d.dt,
        sample_every: config.diagnostics.sample_every,
        snapshot_times: config.diagnostics.snapshot_times.clone(),
        ..Flat3dConfig::spherical(shape.clone(), grid, config.t_final, u0, u1)
    };
    let (op, out) = run_3d_linear(&cfg)?;
    let radial_relative_l2 = match shape {
        nullwave_core::geometry::ObstacleShape::Ball { .. } => {
            let problem = RadialProblem::from_description(
                &shape,
                NullFormSpec::zero(),
                &data,
                grid.d_rho(),
                None,
                SolverSettings::default(),
                config.t_final,
            )?;
            let reference = run_radial(&problem, &RunSettings { order_cap: 0, ..Default::default() }, None)?;
            Some(relative_l2_to_profile(&op, &out.last, |r| problem.grid.interpolate(&reference.last.u, r)))
        }
        _ => None,
    };
    if config.output.csv() {
        let rows = out.report.rows.iter().map(|r| vec![num(r.t), num(r.e00), num(r.sup_u)]);
        dir.csv("diagnostics.csv", &["t", "E00", "sup_u"].map(String::from), rows)?;
        let field = |v: &[f64]| -> Vec<Vec<String>> {
            op.positions().iter().zip(v).map(|(x, u)| vec![num(x[0]), num(x[1]), num(x[2]), num(*u)]).collect()
        };
        let header = ["x", "y", "z", "u"].map(String::from);
        for (t, v) in &out.snapshots {
            dir.csv(&format!("field_t{t}.csv"), &header, field(v))?;
        }
        dir.csv("field_final.csv", &header, field(&out.last))?;
    }
    summary.steps = Some(out.report.steps);
    summary.dt = Some(out.report.dt);
    summary.energy_drift = out.report.energy_drift();
    if let Some(b) = &out.report.blowup {
        summary.blowup_time = Some(b.t);
        summary.blowup_reason = Some(format!("{:?}", b.reason));
        summary.escalate(exit::BLOWUP);
    }
    summary.flat3d = Some(Flat3dSummary {
        steps: out.report.steps,
        dt: out.report.dt,
        energy_drift: out.report.energy_drift(),
        min_jacobian_determinant: out.min_jacobian_determinant,
        radial_relative_l2,
    });
    Ok(())
}
