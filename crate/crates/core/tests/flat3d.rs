use std::sync::Arc;

use nullwave_core::geometry::{Harmonic, ObstacleShape};
use nullwave_core::grid::RadialGrid;
use nullwave_core::initial::{bump, make_bump_data};
use nullwave_core::linalg::Vec3;
use nullwave_core::nullform::NullFormSpec;
use nullwave_core::solver::flat3d::{relative_l2_to_profile, run_3d_linear, Flat3dConfig, Flat3dGrid};
use nullwave_core::solver::radial::{RadialSolver, SolverSettings};

fn radial_reference(dr: f64, r_max: f64, t: f64, center: f64, width: f64) -> (RadialGrid, Vec<f64>) {
    let ball = ObstacleShape::ball(0.875).unwrap();
    let g = RadialGrid::new(0.875, r_max, dr).unwrap();
    let data = make_bump_data(center, width, 1.0, &g, &ball).unwrap();
    let mut s = RadialSolver::new(g.clone(), NullFormSpec::zero(), SolverSettings::default(), t, None).unwrap();
    let mut st = s.initial_state(&data).unwrap();
    while st.t < t - 1e-9 {
        s.step(&mut st).unwrap();
    }
    (g, st.u_curr)
}

#[test]
fn spherical_data_on_ball_matches_radial_solver() {
    let ball = ObstacleShape::ball(0.875).unwrap();
    let grid = Flat3dGrid::new(64, 8, 16, 5.0).unwrap();
    let (c, w, t) = (2.2, 1.2, 1.5);
    let cfg = Flat3dConfig::spherical(ball, grid, t, move |r| bump((r - c) / w), |_| 0.0);
    let (op, out) = run_3d_linear(&cfg).unwrap();
    assert!(out.min_jacobian_determinant > 0.0);
    let (g, u) = radial_reference(grid.d_rho(), 8.0, t, c, w);
    let matched = relative_l2_to_profile(&op, &out.last, |r| g.interpolate(&u, r));
    assert!(matched < 0.05, "{matched}");
    let (g, u) = radial_reference(0.002, 8.0, t, c, w);
    let fine = relative_l2_to_profile(&op, &out.last, |r| g.interpolate(&u, r));
    assert!(fine < 0.05, "{fine}");
    let (e0, e1) = (out.report.rows[0].e00, out.report.rows.last().unwrap().e00);
    assert!(((e1 - e0) / e0).abs() < 1e-10);
}

fn angular_bump(x: &Vec3) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let dir = [0.6, 0.0, 0.8];
    let cos = (x[0] * dir[0] + x[1] * dir[1] + x[2] * dir[2]) / r;
    bump((r - 2.0) / 0.8) * bump((1.0 - cos) / 0.4)
}

#[test]
fn angular_bump_stays_bounded() {
    let star = ObstacleShape::star(0.875, vec![Harmonic { degree: 2, order: 1, coefficient: 0.02 }]).unwrap();
    for shape in [ObstacleShape::ball(0.875).unwrap(), star] {
        let grid = Flat3dGrid::new(32, 16, 32, 6.0).unwrap();
        let cfg = Flat3dConfig {
            u0: Arc::new(angular_bump),
            u1: Arc::new(|_: &Vec3| 0.0),
            sample_every: 0.5,
            ..Flat3dConfig::spherical(shape, grid, 10.0, |_| 0.0, |_| 0.0)
        };
        let (_, out) = run_3d_linear(&cfg).unwrap();
        assert!(out.report.blowup.is_none());
        assert!(out.last.iter().all(|v| v.is_finite()));
        let e0 = out.report.rows[0].e00;
        assert!(e0 > 0.0);
        for row in &out.report.rows {
            assert!((row.e00 / e0 - 1.0).abs() < 0.05, "t = {} ratio {}", row.t, row.e00 / e0);
        }
        assert!(out.report.rows.last().unwrap().t >= 10.0 - 1e-9);
    }
}

#[test]
fn explicit_dt_within_limit_is_used() {
    let ball = ObstacleShape::ball(0.875).unwrap();
    let grid = Flat3dGrid::new(16, 8, 16, 4.0).unwrap();
    let mut cfg = Flat3dConfig::spherical(ball, grid, 1.0, |r| bump((r - 2.0) / 0.8), |_| 0.0);
    cfg.dt = Some(0.01);
    let (_, out) = run_3d_linear(&cfg).unwrap();
    assert_eq!(out.report.steps, 100);
    assert!((out.report.dt - 0.01).abs() < 1e-15);
}
