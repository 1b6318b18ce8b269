//! Irrotational Chaplygin gas outside an obstacle, `P = P0 - A / rho`, in
//! terms of the velocity potential `phi` (`u = grad phi`).
//!
//! With `A = rho_bar^2` the sound speed of the background is one and
//! Bernoulli's law `d_t phi + |grad phi|^2 / 2 + h(rho) = 0`, with
//! `h(rho) = 1/2 - A / (2 rho^2)`, closes to
//! `rho = rho_bar / sqrt(1 + 2 d_t phi + |grad phi|^2)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::ObstacleShape;
use crate::grid::RadialGrid;
use crate::initial::DataDescription;
use crate::nullform::NullFormSpec;
use crate::solver::radial::SolverSettings;
use crate::solver::run::{Frame, RadialProblem, RunObserver, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasParameters {
    rho_bar: f64,
    p0: f64,
}

impl Default for GasParameters {
    fn default() -> Self {
        GasParameters { rho_bar: 1.0, p0: 2.0 }
    }
}

impl GasParameters {
    /// Background density and pressure offset; `A` is fixed to `rho_bar^2`.
    pub fn new(rho_bar: f64, p0: f64) -> Result<Self> {
        if !(rho_bar > 0.0) || !rho_bar.is_finite() {
            return Err(Error::config("gas.rho_bar", format!("must be positive, got {rho_bar}")));
        }
        if !(p0 > 0.0) || !p0.is_finite() {
            return Err(Error::config("gas.P0", format!("must be positive, got {p0}")));
        }
        let gas = GasParameters { rho_bar, p0 };
        if !(gas.pressure(rho_bar) > 0.0) {
            return Err(Error::config(
                "gas.P0",
                format!("background pressure P0 - A / rho_bar = {} is not positive", gas.pressure(rho_bar)),
            ));
        }
        Ok(gas)
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn a(&self) -> f64 {
        self.rho_bar * self.rho_bar
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        self.p0 - self.a() / rho
    }

    pub fn enthalpy(&self, rho: f64) -> f64 {
        0.5 - self.a() / (2.0 * rho * rho)
    }

    pub fn sound_speed(&self, rho: f64) -> f64 {
        self.a().sqrt() / rho
    }

    /// `A / P0`: the density below which the pressure turns negative.
    pub fn density_floor(&self) -> f64 {
        self.a() / self.p0
    }
}

/// Density from `(d_t phi, grad phi)` through Bernoulli's law.
pub fn density_from_potential(dphi: &[f64; 4], gas: &GasParameters) -> Result<f64> {
    let radicand = 1.0 + 2.0 * dphi[0] + dphi[1] * dphi[1] + dphi[2] * dphi[2] + dphi[3] * dphi[3];
    if !(radicand > 0.0) {
        return Err(Error::Degenerate(format!("vacuum: 1 + 2 phi_t + |grad phi|^2 = {radicand:e}")));
    }
    Ok(gas.rho_bar / radicand.sqrt())
}

/// Radial problem for the potential: Chaplygin nonlinearity, `d_r phi = 0`
/// on the ball (no flow through the wall), data scaled by `epsilon`.
pub fn chaplygin_scenario(
    epsilon: f64,
    data: &DataDescription,
    gas: &GasParameters,
    shape: &ObstacleShape,
    dr: f64,
    t_final: f64,
) -> Result<RadialProblem> {
    GasParameters::new(gas.rho_bar, gas.p0)?;
    let data = DataDescription { epsilon, ..*data };
    RadialProblem::from_description(shape, NullFormSpec::chaplygin(), &data, dr, None, SolverSettings::default(), t_final)
}

/// Density and radial velocity of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub rho: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// Density and velocity of a level given `phi_t` and `phi_r`. Fails with a
/// physicality error when the density reaches the pressure floor.
pub fn flow_state(t: f64, phi_t: &[f64], phi_r: &[f64], gas: &GasParameters) -> Result<FlowState> {
    let floor = gas.density_floor();
    let mut rho = Vec::with_capacity(phi_t.len());
    for (&pt, &pr) in phi_t.iter().zip(phi_r) {
        let d = density_from_potential(&[pt, pr, 0.0, 0.0], gas).map_err(|e| Error::Physicality { t, message: format!("{e}") })?;
        if !(d > floor) {
            return Err(Error::Physicality { t, message: format!("density {d} at or below A / P0 = {floor}") });
        }
        rho.push(d);
    }
    Ok(FlowState { t, rho, velocity: phi_r.to_vec() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample {
    pub t: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub max_speed: f64,
    /// `|d_r phi|` at the wall.
    pub slip_residual: f64,
    /// `max |phi_t + |grad phi|^2 / 2 + h(rho)|`.
    pub bernoulli_residual: f64,
    /// `|dM/dt + outer flux| / int |rho_t| r^2 dr` for the mass
    /// `M = int rho r^2 dr`; needs the wave operator, so only live runs have it.
    pub continuity_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Physicality {
    pub t: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    pub gas: GasParameters,
    pub samples: Vec<FlowSample>,
    /// First unphysical level; later levels are not processed.
    pub violation: Option<Physicality>,
}

impl FlowReport {
    pub fn new(gas: GasParameters) -> Self {
        FlowReport { gas, samples: Vec::new(), violation: None }
    }

    pub fn rho_min(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, s| m.min(s.rho_min))
    }

    pub fn max_speed(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.max_speed))
    }

    /// `max_t max_x |rho - rho_bar|`.
    pub fn max_density_deviation(&self) -> f64 {
        let rb = self.gas.rho_bar;
        self.samples.iter().fold(0.0, |m, s| m.max((s.rho_max - rb).abs()).max((s.rho_min - rb).abs()))
    }

    pub fn max_slip_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.slip_residual))
    }

    pub fn max_bernoulli_residual(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.bernoulli_residual))
    }

    pub fn max_continuity_residual(&self) -> Option<f64> {
        self.samples.iter().filter_map(|s| s.continuity_residual).reduce(f64::max)
    }

    pub fn is_physical(&self) -> bool {
        self.violation.is_none()
    }

    /// Adds one level; `box_u` enables the continuity check.
    pub fn push(&mut self, t: f64, grid: &RadialGrid, u: &[f64], u_t: &[f64], u_r: &[f64], box_u: Option<&[f64]>) {
        if self.violation.is_some() {
            return;
        }
        let flow = match flow_state(t, u_t, u_r, &self.gas) {
            Ok(f) => f,
            Err(Error::Physicality { t, message }) => {
                self.violation = Some(Physicality { t, message });
                return;
            }
            Err(e) => {
                self.violation = Some(Physicality { t, message: format!("{e}") });
                return;
            }
        };
        let (rho_min, rho_max) = flow.rho.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        let max_speed = flow.velocity.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bernoulli_residual = (0..grid.len()).fold(0.0f64, |m, j| {
            let res = u_t[j] + 0.5 * u_r[j] * u_r[j] + self.gas.enthalpy(flow.rho[j]);
            m.max(res.abs())
        });
        let continuity_residual = box_u.map(|b| continuity_residual(grid, &self.gas, u, u_t, u_r, b, &flow.rho));
        self.samples.push(FlowSample {
            t,
            rho_min,
            rho_max,
            max_speed,
            slip_residual: u_r[0].abs(),
            bernoulli_residual,
            continuity_residual,
        });
    }
}

/// `rho_t = -(rho^3 / rho_bar^2)(phi_tt + phi_r phi_tr)` integrated against
/// `r^2`, compared with the flux `r^2 rho phi_r` through the last node.
fn continuity_residual(
    grid: &RadialGrid,
    gas: &GasParameters,
    u: &[f64],
    u_t: &[f64],
    u_r: &[f64],
    box_u: &[f64],
    rho: &[f64],
) -> f64 {
    let rb2 = gas.rho_bar * gas.rho_bar;
    let rho_t = |j: usize| {
        let phi_tt = grid.laplacian(u, j) + box_u[j];
        let phi_tr = grid.d_r(u_t, j);
        -(rho[j].powi(3) / rb2) * (phi_tt + u_r[j] * phi_tr)
    };
    let n = grid.len();
    let h = grid.dr();
    let mut dm = 0.0;
    let mut scale = 0.0;
    for j in 0..n {
        let w = if j == 0 || j == n - 1 { 0.5 * h } else { h };
        let r = grid.r(j);
        let v = rho_t(j);
        dm += w * r * r * v;
        scale += w * r * r * v.abs();
    }
    let r_out = grid.r(n - 1);
    let flux = r_out * r_out * rho[n - 1] * u_r[n - 1];
    if scale > 0.0 {
        (dm + flux).abs() / scale
    } else {
        0.0
    }
}

/// Post-processes stored snapshots of a potential run.
pub fn flow_report(snapshots: &[Snapshot], grid: &RadialGrid, gas: &GasParameters) -> FlowReport {
    let mut report = FlowReport::new(*gas);
    for s in snapshots {
        report.push(s.t, grid, &s.u, &s.u_t, &s.u_r, None);
    }
    report
}

/// Collects a [`FlowReport`] from every sampled level of a live run.
#[derive(Debug, Clone)]
pub struct FlowMonitor {
    pub report: FlowReport,
}

impl FlowMonitor {
    pub fn new(gas: GasParameters) -> Self {
        FlowMonitor { report: FlowReport::new(gas) }
    }
}

impl RunObserver for FlowMonitor {
    fn observe(&mut self, frame: &Frame<'_>) {
        self.report.push(frame.t, frame.grid, frame.u, frame.u_t, frame.u_r, Some(frame.box_u));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::DataKind;
    use crate::solver::run::{run_radial, RunSettings};
    use alloc::vec;

    #[test]
    fn gas_normalization() {
        let gas = GasParameters::default();
        assert_eq!(gas.a(), 1.0);
        assert_eq!(gas.sound_speed(gas.rho_bar()), 1.0);
        assert_eq!(gas.enthalpy(gas.rho_bar()), 0.0);
        assert!(gas.pressure(gas.rho_bar()) > 0.0);
        assert_eq!(gas.density_floor(), 0.5);
        let g = GasParameters::new(1.5, 4.0).unwrap();
        assert!((g.sound_speed(1.5) - 1.0).abs() < 1e-15);
        assert!(matches!(GasParameters::new(1.0, 1.0), Err(Error::Config { field, .. }) if field == "gas.P0"));
        assert!(matches!(GasParameters::new(-1.0, 1.0), Err(Error::Config { field, .. }) if field == "gas.rho_bar"));
    }

    #[test]
    fn density_examples() {
        let gas = GasParameters::default();
        assert_eq!(density_from_potential(&[0.0; 4], &gas).unwrap(), 1.0);
        let rho = density_from_potential(&[-0.005, 0.0, 0.0, 0.0], &gas).unwrap();
        assert!((rho - 1.0 / 0.99f64.sqrt()).abs() < 1e-15);
        assert!((rho - 1.00504).abs() < 1e-5);
        assert!(matches!(density_from_potential(&[-0.6, 0.0, 0.0, 0.0], &gas), Err(Error::Degenerate(_))));
    }

    #[test]
    fn bernoulli_round_trip() {
        let gas = GasParameters::new(1.3, 3.0).unwrap();
        for &rho in &[0.9, 1.0, 1.29, 1.3, 1.31, 1.7, 2.5] {
            let phi_t = -gas.enthalpy(rho);
            let back = density_from_potential(&[phi_t, 0.0, 0.0, 0.0], &gas).unwrap();
            assert!((back - rho).abs() < 1e-14, "{rho} -> {back}");
        }
        let dphi = [0.01, 0.02, -0.03, 0.005];
        let rho = density_from_potential(&dphi, &gas).unwrap();
        let grad2 = dphi[1] * dphi[1] + dphi[2] * dphi[2] + dphi[3] * dphi[3];
        assert!((dphi[0] + 0.5 * grad2 + gas.enthalpy(rho)).abs() < 1e-15);
    }

    #[test]
    fn flow_state_flags_low_density() {
        let gas = GasParameters::default();
        // rho = 1 / sqrt(1 + 2 * 1.6) < 1/2.
        let err = flow_state(2.0, &[0.0, 1.6], &[0.0, 0.0], &gas).unwrap_err();
        assert!(matches!(err, Error::Physicality { t, .. } if t == 2.0));
        let ok = flow_state(0.0, &[0.0, 0.01], &[0.0, 0.02], &gas).unwrap();
        assert_eq!(ok.velocity, vec![0.0, 0.02]);
    }

    #[test]
    fn report_stops_at_first_violation() {
        let gas = GasParameters::default();
        let grid = RadialGrid::new(0.875, 2.0, 0.05).unwrap();
        let n = grid.len();
        let zero = vec![0.0; n];
        let mut bad = vec![0.0; n];
        bad[3] = 2.0;
        let mut report = FlowReport::new(gas);
        report.push(0.0, &grid, &zero, &zero, &zero, None);
        report.push(1.0, &grid, &zero, &bad, &zero, None);
        report.push(2.0, &grid, &zero, &zero, &zero, None);
        assert_eq!(report.samples.len(), 1);
        assert_eq!(report.violation.as_ref().map(|v| v.t), Some(1.0));
        assert!(!report.is_physical());
    }

    #[test]
    fn zero_run_is_static_background() {
        let ball = ObstacleShape::ball(0.875).unwrap();
        let gas = GasParameters::default();
        let p = chaplygin_scenario(0.0, &DataDescription::default(), &gas, &ball, 0.05, 2.0).unwrap();
        let settings = RunSettings { order_cap: 0, snapshot_times: vec![0.0, 1.0, 2.0], ..Default::default() };
        let mut monitor = FlowMonitor::new(gas);
        let out = run_radial(&p, &settings, Some(&mut monitor)).unwrap();
        let report = flow_report(&out.snapshots, &p.grid, &gas);
        for r in [&report, &monitor.report] {
            assert!(r.is_physical());
            assert_eq!(r.rho_min(), 1.0);
            assert_eq!(r.max_density_deviation(), 0.0);
            assert_eq!(r.max_speed(), 0.0);
        }
        assert!(out.last.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scenario_uses_chaplygin_form() {
        let ball = ObstacleShape::ball(0.875).unwrap();
        let gas = GasParameters::default();
        let data = DataDescription { kind: DataKind::Bump, u1_amp: 0.5, ..Default::default() };
        let p = chaplygin_scenario(0.01, &data, &gas, &ball, 0.02, 5.0).unwrap();
        assert_eq!(p.spec, NullFormSpec::chaplygin());
        assert_eq!(p.data.epsilon, 0.01);
        assert!(p.grid.r_max() >= 0.875 + 4.0 + 6.0 + 2.0);
        let star = ObstacleShape::star(0.875, vec![]).unwrap();
        assert!(matches!(chaplygin_scenario(0.01, &data, &gas, &star, 0.02, 5.0), Err(Error::Config { .. })));
        let close = DataDescription { center: 1.5, ..data };
        assert!(matches!(chaplygin_scenario(0.01, &close, &gas, &ball, 0.02, 5.0), Err(Error::Config { field, .. }) if field == "data.center"));
    }
}
