//! Drives a radial evolution to `t_final` and collects diagnostics.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::energy::radial_e00;
use crate::diagnostics::fields::EnergyHierarchy;
use crate::diagnostics::measures::{decay_envelope, kss_density, local_energy, local_energy_decay_fit, KssAccumulator};
use crate::diagnostics::report::{BlowupEvent, BlowupReason, DiagnosticsReport, DiagnosticsRow, HierarchyRow};
use crate::error::{Error, Result};
use crate::geometry::ObstacleShape;
use crate::grid::RadialGrid;
use crate::initial::{DataDescription, InitialData};
use crate::nullform::NullFormSpec;
use crate::solver::radial::{Forcing, OuterBoundary, RadialSolver, SolverSettings, StepStatus};

/// Everything that determines a radial evolution.
#[derive(Clone)]
pub struct RadialProblem {
    pub grid: RadialGrid,
    pub spec: NullFormSpec,
    pub solver: SolverSettings,
    pub data: InitialData,
    pub forcing: Option<Forcing>,
    pub t_final: f64,
}

impl RadialProblem {
    /// Unforced problem outside a ball. Without `r_max` the grid is sized so
    /// that nothing reaches its end before `t_final`.
    pub fn from_description(
        shape: &ObstacleShape,
        spec: NullFormSpec,
        data: &DataDescription,
        dr: f64,
        r_max: Option<f64>,
        solver: SolverSettings,
        t_final: f64,
    ) -> Result<Self> {
        let ObstacleShape::Ball { radius } = *shape else {
            return Err(Error::config("obstacle", "radial runs need a ball"));
        };
        data.validate(shape)?;
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::config("t_final", alloc::format!("must be nonnegative, got {t_final}")));
        }
        let needed = RadialGrid::domain_of_dependence_radius(radius, data.center + data.width, t_final);
        let r_max = match r_max {
            Some(r) if solver.outer == OuterBoundary::DomainOfDependence && r < needed => {
                return Err(Error::config(
                    "grid.r_max",
                    alloc::format!("{r} is inside the domain of dependence; need at least {needed}"),
                ));
            }
            Some(r) => r,
            None => needed,
        };
        let grid = RadialGrid::new(radius, r_max, dr)?;
        let data = data.build(&grid, shape)?;
        Ok(RadialProblem { grid, spec, solver, data, forcing: None, t_final })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Time between diagnostics rows.
    pub sample_every: f64,
    pub snapshot_times: Vec<f64>,
    /// Highest `mu + nu` of the energy hierarchy; `0` keeps only the base
    /// energy and skips the vector-field computation.
    pub order_cap: usize,
    /// Time between hierarchy evaluations.
    pub hierarchy_every: f64,
    /// Radius of the local-energy ball.
    pub local_radius: f64,
    /// Start of the exponential-fit window; the fit runs when `t_final`
    /// exceeds it by at least `min_fit_span`.
    pub fit_start: f64,
    pub min_fit_span: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            sample_every: 0.5,
            snapshot_times: Vec::new(),
            order_cap: 2,
            hierarchy_every: 5.0,
            local_radius: 5.0,
            fit_start: 5.0,
            min_fit_span: 10.0,
        }
    }
}

/// Fields of one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub u_t: Vec<f64>,
    pub u_r: Vec<f64>,
}

/// Read-only view of one sampled level, handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct Frame<'a> {
    pub t: f64,
    pub grid: &'a RadialGrid,
    pub u: &'a [f64],
    pub u_t: &'a [f64],
    pub u_r: &'a [f64],
    /// The wave operator applied to the solution.
    pub box_u: &'a [f64],
}

pub trait RunObserver {
    fn observe(&mut self, frame: &Frame<'_>);
}

impl<F: FnMut(&Frame<'_>)> RunObserver for F {
    fn observe(&mut self, frame: &Frame<'_>) {
        self(frame)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: DiagnosticsReport,
    pub snapshots: Vec<Snapshot>,
    /// Last level reached (`t_final`, or the blowup time).
    pub last: Snapshot,
}

fn row_for(
    grid: &RadialGrid,
    spec: &NullFormSpec,
    t: f64,
    frame: (&[f64], &[f64], &[f64]),
    kss: &KssAccumulator,
    local_radius: f64,
) -> DiagnosticsRow {
    let (u, ut, ur) = frame;
    let (e00, h_max) = radial_e00(grid, spec, ut, ur);
    DiagnosticsRow {
        t,
        e00,
        grad_norm2: grid.weighted_sum(|j| ut[j] * ut[j] + ur[j] * ur[j]),
        h_max,
        kss_lhs: kss.lhs(),
        kss_rhs: kss.rhs(),
        local_energy: local_energy(grid, ut, ur, local_radius),
        envelope: decay_envelope(grid, t, u, ut, ur),
        sup_u: u.iter().fold(0.0, |m, v| m.max(v.abs())),
        sup_du: RadialSolver::sup_gradient(ut, ur),
        blowup: false,
    }
}

/// Picard contraction ratio above which a failed step is read as growth the
/// time step can no longer resolve rather than as a solver failure.
pub const UNRESOLVED_CONTRACTION: f64 = 0.5;

/// Growth of `sup |du|` over its initial value past which a failed step is
/// read the same way.
pub const UNRESOLVED_AMPLIFICATION: f64 = 10.0;

/// Current level with one-sided time differences, for runs that stop on a
/// failed step.
fn fallback_snapshot(grid: &RadialGrid, state: &crate::solver::radial::FieldState, t: f64) -> Snapshot {
    let u_t = state.u_curr.iter().zip(&state.u_prev).map(|(a, b)| (a - b) / state.dt).collect();
    Snapshot { t, u: state.u_curr.clone(), u_t, u_r: grid.gradient(&state.u_curr) }
}

fn flagged_row(grid: &RadialGrid, spec: &NullFormSpec, snap: &Snapshot, kss: &KssAccumulator, local_radius: f64) -> DiagnosticsRow {
    let mut row = row_for(grid, spec, snap.t, (&snap.u, &snap.u_t, &snap.u_r), kss, local_radius);
    row.blowup = true;
    row
}

/// Evolves `problem` and samples diagnostics every `settings.sample_every`.
///
/// Level `n` is reported once level `n + 1` exists, so time derivatives are
/// centered; the run therefore takes one step past `t_final`.
pub fn run_radial(
    problem: &RadialProblem,
    settings: &RunSettings,
    mut observer: Option<&mut dyn RunObserver>,
) -> Result<RunOutput> {
    if !(settings.sample_every > 0.0) {
        return Err(Error::config("diagnostics.sample_every", "must be positive"));
    }
    let grid = &problem.grid;
    let mut solver = RadialSolver::new(
        grid.clone(),
        problem.spec.clone(),
        problem.solver,
        problem.t_final,
        problem.forcing.clone(),
    )?;
    let dt = solver.dt();
    let mut state = solver.initial_state(&problem.data)?;
    let initial_sup = solver.initial_sup_gradient(&problem.data);
    let threshold =
        if initial_sup > 0.0 { problem.solver.blowup_factor * initial_sup } else { f64::INFINITY };
    let mut report = DiagnosticsReport { initial_sup_du: initial_sup, max_sup_du: initial_sup, dt, ..Default::default() };
    let mut kss = KssAccumulator::default();
    let n_steps = if problem.t_final > 0.0 { (problem.t_final / dt).round() as usize } else { 0 };
    let sample_stride = ((settings.sample_every / dt).round() as usize).max(1);
    let hierarchy_stride = ((settings.hierarchy_every / dt).round() as usize).max(1);
    let snapshot_steps: Vec<usize> =
        settings.snapshot_times.iter().map(|t| ((t / dt).round() as usize).min(n_steps)).collect();
    let mut snapshots = Vec::new();

    if n_steps == 0 {
        let seq = solver.compatibility(&problem.data)?;
        let [p0, p1, p2] = &seq.psis;
        let ur = grid.gradient(p0);
        let box_u: Vec<f64> = (0..grid.len()).map(|j| p2[j] - grid.laplacian(p0, j)).collect();
        kss.push(0.0, kss_density(grid, p1, &ur), grid.l2_norm(&box_u));
        let row = row_for(grid, &problem.spec, 0.0, (p0, p1, &ur), &kss, settings.local_radius);
        report.rows.push(row);
        if let Some(obs) = observer.as_deref_mut() {
            obs.observe(&Frame { t: 0.0, grid, u: p0, u_t: p1, u_r: &ur, box_u: &box_u });
        }
        let snap = Snapshot { t: 0.0, u: p0.clone(), u_t: p1.clone(), u_r: ur };
        for _ in &snapshot_steps {
            snapshots.push(snap.clone());
        }
        return Ok(RunOutput { report, snapshots, last: snap });
    }

    let levels_needed = EnergyHierarchy::levels_needed(settings.order_cap);
    let mut ring: VecDeque<Vec<f64>> = VecDeque::with_capacity(levels_needed + 1);
    if settings.order_cap > 0 {
        ring.push_back(state.u_curr.clone());
    }
    let mut last = Snapshot { t: 0.0, u: state.u_curr.clone(), u_t: Vec::new(), u_r: Vec::new() };
    let volume = grid.volume_weights();
    let kss_weights: Vec<f64> = (0..grid.len()).map(|j| volume[j] / (1.0 + grid.r(j) * grid.r(j)).sqrt()).collect();

    for n in 0..=n_steps {
        let t_n = n as f64 * dt;
        let status = match solver.step(&mut state) {
            Ok(s) => s,
            Err(Error::NonlinearDivergence { t, change }) => {
                let sup = RadialSolver::sup_gradient(solver.level_ut(), &grid.gradient(&state.u_curr));
                let reason = if !sup.is_finite() || sup > threshold {
                    Some(BlowupReason::Amplification)
                } else if solver.last_contraction() >= UNRESOLVED_CONTRACTION
                    || sup >= UNRESOLVED_AMPLIFICATION * report.initial_sup_du
                {
                    Some(BlowupReason::UnresolvedGrowth)
                } else {
                    None
                };
                match reason {
                    Some(reason) => {
                        report.blowup = Some(BlowupEvent { t: t_n, reason, sup_du: sup });
                        last = fallback_snapshot(grid, &state, t_n);
                        report.rows.push(flagged_row(grid, &problem.spec, &last, &kss, settings.local_radius));
                        break;
                    }
                    None => return Err(Error::NonlinearDivergence { t, change }),
                }
            }
            Err(e) => return Err(e),
        };
        match status {
            StepStatus::NonFinite => {
                report.blowup = Some(BlowupEvent { t: t_n, reason: BlowupReason::NonFinite, sup_du: f64::INFINITY });
                last = fallback_snapshot(grid, &state, t_n);
                report.rows.push(flagged_row(grid, &problem.spec, &last, &kss, settings.local_radius));
                break;
            }
            StepStatus::Converged { iterations } => {
                report.max_picard_iterations = report.max_picard_iterations.max(iterations);
            }
        }
        report.steps = n + 1;
        let (u, ut, ur, box_u) = (&state.u_prev, solver.level_ut(), solver.level_ur(), solver.level_box());
        let active = solver.active_range();
        let sup = RadialSolver::sup_gradient(&ut[active.clone()], &ur[active.clone()]);
        report.max_sup_du = report.max_sup_du.max(sup);
        let mut density = 0.0;
        let mut box2 = 0.0;
        for j in active {
            density += kss_weights[j] * (ut[j] * ut[j] + ur[j] * ur[j]);
            box2 += volume[j] * box_u[j] * box_u[j];
        }
        kss.push(t_n, density, box2.sqrt());
        let blew_up = sup > threshold;
        let sampled = n % sample_stride == 0 || n == n_steps || blew_up;
        if sampled {
            let mut row = row_for(grid, &problem.spec, t_n, (u, ut, ur), &kss, settings.local_radius);
            row.blowup = blew_up;
            report.rows.push(row);
            if let Some(obs) = observer.as_deref_mut() {
                obs.observe(&Frame { t: t_n, grid, u, u_t: ut, u_r: ur, box_u });
            }
        }
        for &s in &snapshot_steps {
            if s == n {
                snapshots.push(Snapshot { t: t_n, u: u.clone(), u_t: ut.to_vec(), u_r: ur.to_vec() });
            }
        }
        if n == n_steps || blew_up {
            last = Snapshot { t: t_n, u: u.clone(), u_t: ut.to_vec(), u_r: ur.to_vec() };
        }
        if blew_up {
            report.blowup = Some(BlowupEvent { t: t_n, reason: BlowupReason::Amplification, sup_du: sup });
            break;
        }
        if settings.order_cap > 0 {
            ring.push_back(state.u_curr.clone());
            if ring.len() > levels_needed {
                ring.pop_front();
            }
            if ring.len() == levels_needed {
                // The ring holds levels n + 1 - (levels_needed - 1) ..= n + 1.
                let center = n + 1 - levels_needed / 2;
                if center.is_multiple_of(hierarchy_stride) && center <= n_steps {
                    let levels: Vec<&[f64]> = ring.iter().map(|v| v.as_slice()).collect();
                    let t_c = center as f64 * dt;
                    let h = EnergyHierarchy::compute(grid, &problem.spec, &levels, t_c, dt, settings.order_cap)?;
                    report.hierarchy.push(HierarchyRow { t: t_c, entries: h.entries });
                }
            }
        }
    }

    if report.blowup.is_none() && problem.t_final >= settings.fit_start + settings.min_fit_span {
        let times: Vec<f64> = report.rows.iter().map(|r| r.t).collect();
        let values: Vec<f64> = report.rows.iter().map(|r| r.local_energy).collect();
        report.decay_fit = local_energy_decay_fit(&times, &values, settings.fit_start, problem.t_final).ok();
    }
    Ok(RunOutput { report, snapshots, last })
}
