use std::sync::Arc;

use nullwave_core::geometry::ObstacleShape;
use nullwave_core::grid::RadialGrid;
use nullwave_core::initial::{bump, bump_jet, make_bump_data, make_outgoing_data, DataDescription, InitialData};
use nullwave_core::nullform::{NullFormSpec, RadialJet, RadialNonlinearity};
use nullwave_core::solver::oracle::{spherical_oracle, SphericalOracleProblem};
use nullwave_core::solver::radial::{FieldState, OuterBoundary, RadialSolver, SolverSettings, StepStatus};
use nullwave_core::solver::run::{run_radial, RadialProblem, RunSettings};
use nullwave_core::Error;

fn ball() -> ObstacleShape {
    ObstacleShape::ball(0.875).unwrap()
}

fn linear_solver(grid: &RadialGrid, t_final: f64) -> RadialSolver {
    RadialSolver::new(grid.clone(), NullFormSpec::zero(), SolverSettings::default(), t_final, None).unwrap()
}

fn rel_l2(grid: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    grid.l2_norm(&diff) / grid.l2_norm(b)
}

#[test]
fn zero_state_stays_zero() {
    let g = RadialGrid::new(0.875, 10.0, 0.01).unwrap();
    for spec in [NullFormSpec::zero(), NullFormSpec::chaplygin(), NullFormSpec::nonnull_dt2()] {
        let mut s = RadialSolver::new(g.clone(), spec, SolverSettings::default(), 1.0, None).unwrap();
        let mut st = s.initial_state(&InitialData::zero(&g)).unwrap();
        for _ in 0..20 {
            s.step(&mut st).unwrap();
        }
        assert!(st.u_curr.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn linear_scheme_is_time_reversible() {
    let g = RadialGrid::new(0.875, 12.0, 0.01).unwrap();
    let data = make_bump_data(3.0, 1.0, 1.0, &g, &ball()).unwrap();
    let mut s = linear_solver(&g, 2.0);
    let start = s.initial_state(&data).unwrap();
    let mut st = start.clone();
    for _ in 0..300 {
        s.step(&mut st).unwrap();
    }
    let mut back: FieldState = st.reversed();
    for _ in 0..300 {
        s.step(&mut back).unwrap();
    }
    // After reversal the roles of the two levels are swapped.
    let err = back.u_prev.iter().zip(&start.u_curr).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let err2 = back.u_curr.iter().zip(&start.u_prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-10 && err2 < 1e-10, "{err} {err2}");
}

#[test]
fn outgoing_profile_is_translated() {
    // u = w(r - t) / r solves the radial wave equation exactly.
    let w = |s: f64| bump_jet((s - 6.0) / 1.5);
    let mut errs = Vec::new();
    for &h in &[0.02, 0.01] {
        let g = RadialGrid::new(0.875, 20.0, h).unwrap();
        let u0: Vec<f64> = g.radii().iter().map(|&r| w(r).0 / r).collect();
        let u1: Vec<f64> = g.radii().iter().map(|&r| -w(r).1 / 1.5 / r).collect();
        let data = InitialData { u0, u1, epsilon: 1.0, support_radius: 7.5 };
        let problem = RadialProblem {
            grid: g.clone(),
            spec: NullFormSpec::zero(),
            solver: SolverSettings::default(),
            data,
            forcing: None,
            t_final: 4.0,
        };
        let out = run_radial(&problem, &RunSettings { order_cap: 0, ..Default::default() }, None).unwrap();
        let exact: Vec<f64> = g.radii().iter().map(|&r| w(r - 4.0).0 / r).collect();
        errs.push(rel_l2(&g, &out.last.u, &exact));
    }
    assert!(errs[1] < 1e-3, "{errs:?}");
    let order = (errs[0] / errs[1]).log2();
    assert!((order - 2.0).abs() < 0.3, "{errs:?}");
}

/// Method-of-lines right-hand side for `(u, v = u_t)`.
fn mol_rhs(g: &RadialGrid, nl: &RadialNonlinearity, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut dv = vec![0.0; g.len()];
    for j in 0..g.len() - 1 {
        let jet = RadialJet { u_t: v[j], u_r: g.d_r(u, j), u_tt: 0.0, u_tr: g.d_r(v, j), u_rr: g.d_rr(u, j), r: g.r(j) };
        let lap = g.laplacian(u, j);
        dv[j] = (lap + nl.remainder(&jet)) / (1.0 - nl.time_coefficient(jet.u_t, jet.u_r));
    }
    (v.to_vec(), dv)
}

#[test]
fn one_chaplygin_step_matches_rk4() {
    let g = RadialGrid::new(0.875, 8.0, 0.01).unwrap();
    let spec = NullFormSpec::chaplygin();
    let desc = DataDescription { u0_amp: 1.0, u1_amp: 0.5, epsilon: 0.01, ..Default::default() };
    let data = desc.build(&g, &ball()).unwrap();
    let mut s = RadialSolver::new(g.clone(), spec.clone(), SolverSettings::default(), 1.0, None).unwrap();
    let mut st = s.initial_state(&data).unwrap();
    let dt = st.dt;
    assert!(matches!(s.step(&mut st).unwrap(), StepStatus::Converged { .. }));

    let nl = RadialNonlinearity::new(&spec);
    let (u, v) = (data.psi0(), data.psi1());
    let axpy = |a: &[f64], b: &[f64], c: f64| a.iter().zip(b).map(|(x, y)| x + c * y).collect::<Vec<f64>>();
    let (k1u, k1v) = mol_rhs(&g, &nl, &u, &v);
    let (k2u, k2v) = mol_rhs(&g, &nl, &axpy(&u, &k1u, dt / 2.0), &axpy(&v, &k1v, dt / 2.0));
    let (k3u, k3v) = mol_rhs(&g, &nl, &axpy(&u, &k2u, dt / 2.0), &axpy(&v, &k2v, dt / 2.0));
    let (k4u, _) = mol_rhs(&g, &nl, &axpy(&u, &k3u, dt), &axpy(&v, &k3v, dt));
    let rk: Vec<f64> = (0..g.len()).map(|j| u[j] + dt / 6.0 * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j])).collect();
    let err = rk.iter().zip(&st.u_curr).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("leapfrog vs rk4 max diff {err:e}");
    assert!(err < 1e-6);
}

#[test]
fn causality_in_quasilinear_runs() {
    let eps = 0.02;
    let g = RadialGrid::new(0.875, 30.0, 0.01).unwrap();
    let desc = DataDescription { center: 3.0, width: 0.5, u0_amp: 1.0, u1_amp: 1.0, epsilon: eps, ..Default::default() };
    let data = desc.build(&g, &ball()).unwrap();
    let problem = RadialProblem {
        grid: g.clone(),
        spec: NullFormSpec::chaplygin(),
        solver: SolverSettings::default(),
        data,
        forcing: None,
        t_final: 10.0,
    };
    let settings = RunSettings { order_cap: 0, snapshot_times: vec![2.0, 5.0, 10.0], ..Default::default() };
    let out = run_radial(&problem, &settings, None).unwrap();
    for snap in &out.snapshots {
        let front = 3.5 + snap.t * (1.0 + 10.0 * eps);
        let beyond = (0..g.len()).filter(|&j| g.r(j) > front).fold(0.0f64, |m, j| m.max(snap.u[j].abs()));
        println!("t = {} beyond-front max {beyond:e}", snap.t);
        assert!(beyond <= 1e-12);
    }
}

#[test]
fn sommerfeld_absorbs_outgoing_wave() {
    let g = RadialGrid::new(0.875, 10.0, 0.01).unwrap();
    let data = make_outgoing_data(4.0, 1.0, 1.0, &g, &ball()).unwrap();
    let settings = SolverSettings { outer: OuterBoundary::Sommerfeld, ..Default::default() };
    let problem = RadialProblem { grid: g.clone(), spec: NullFormSpec::zero(), solver: settings, data, forcing: None, t_final: 15.0 };
    let out = run_radial(&problem, &RunSettings { order_cap: 0, ..Default::default() }, None).unwrap();
    let e0 = out.report.rows[0].e00;
    let e_end = out.report.last().unwrap().e00;
    println!("sommerfeld residual energy fraction {:e}", e_end / e0);
    assert!(e_end < 1e-3 * e0);
}

#[test]
fn linear_energy_is_conserved() {
    let g = RadialGrid::new(0.875, RadialGrid::domain_of_dependence_radius(0.875, 4.0, 50.0), 0.005).unwrap();
    let data = make_bump_data(3.0, 1.0, 1.0, &g, &ball()).unwrap();
    let problem = RadialProblem { grid: g, spec: NullFormSpec::zero(), solver: SolverSettings::default(), data, forcing: None, t_final: 50.0 };
    let out = run_radial(&problem, &RunSettings { order_cap: 0, sample_every: 1.0, ..Default::default() }, None).unwrap();
    let drift = out.report.energy_drift().unwrap();
    println!("energy drift {drift:e}");
    assert!(drift <= 1e-3);
    assert!(out.report.blowup.is_none());
}

#[test]
fn forced_run_matches_oracle() {
    let f1 = |t: f64, r: f64| bump(t - 1.0) * bump(r - 2.5);
    let oracle = SphericalOracleProblem {
        f1: Arc::new(f1),
        f2: Arc::new(|_| 0.0),
        f1_support: Some(((0.0, 2.0), (1.5, 3.5))),
        f2_support: None,
        resolution: 200,
    };
    let t_final = 10.0;
    let g = RadialGrid::new(1.0, RadialGrid::domain_of_dependence_radius(1.0, 3.5, t_final), 1.0 / 200.0).unwrap();
    let problem = RadialProblem {
        grid: g.clone(),
        spec: NullFormSpec::zero(),
        solver: SolverSettings::default(),
        data: InitialData::zero(&g),
        forcing: Some(Arc::new(f1)),
        t_final,
    };
    let out = run_radial(&problem, &RunSettings { order_cap: 0, ..Default::default() }, None).unwrap();
    let exact: Vec<f64> = g.radii().iter().map(|&r| spherical_oracle(&oracle, t_final, r)).collect();
    let err = rel_l2(&g, &out.last.u, &exact);
    println!("oracle relative L2 error {err:e}");
    assert!(err < 1e-3);
}

fn mms_error(h: f64) -> f64 {
    let rmin = 0.875;
    let exact = move |t: f64, r: f64| {
        let x = r - rmin;
        (-x * x).exp() * (3.0 * x * x - t).cos()
    };
    let forcing = move |t: f64, r: f64| {
        let x = r - rmin;
        let e = (-x * x).exp();
        let (e1, e2) = (-2.0 * x * e, (4.0 * x * x - 2.0) * e);
        let p = 3.0 * x * x - t;
        let (p1, p2) = (6.0 * x, 6.0);
        let (c, s) = (p.cos(), p.sin());
        let utt = -e * c;
        let ur = e1 * c - e * s * p1;
        let urr = e2 * c - 2.0 * e1 * s * p1 - e * c * p1 * p1 - e * s * p2;
        utt - urr - 2.0 * ur / r
    };
    let g = RadialGrid::new(rmin, rmin + 10.0, h).unwrap();
    let u0: Vec<f64> = g.radii().iter().map(|&r| exact(0.0, r)).collect();
    let u1: Vec<f64> = g.radii().iter().map(|&r| (-(r - rmin).powi(2)).exp() * (3.0 * (r - rmin).powi(2)).sin()).collect();
    let problem = RadialProblem {
        grid: g.clone(),
        spec: NullFormSpec::zero(),
        solver: SolverSettings::default(),
        data: InitialData { u0, u1, epsilon: 1.0, support_radius: rmin + 10.0 },
        forcing: Some(Arc::new(forcing)),
        t_final: 10.0,
    };
    let out = run_radial(&problem, &RunSettings { order_cap: 0, ..Default::default() }, None).unwrap();
    let ex: Vec<f64> = g.radii().iter().map(|&r| exact(10.0, r)).collect();
    rel_l2(&g, &out.last.u, &ex)
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let errs: Vec<f64> = [1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0].iter().map(|&h| mms_error(h)).collect();
    let rates: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    println!("mms errors {errs:?} rates {rates:?}");
    for r in rates {
        assert!((r - 2.0).abs() <= 0.3);
    }
}

#[test]
fn invalid_settings_rejected() {
    let g = RadialGrid::new(0.875, 10.0, 0.01).unwrap();
    let bad = SolverSettings { cfl: 0.7, ..Default::default() };
    let err = RadialSolver::new(g.clone(), NullFormSpec::zero(), bad, 1.0, None).err().unwrap();
    assert!(matches!(err, Error::Config { ref field, .. } if field == "grid.cfl"));
}

#[test]
fn blowup_is_flagged_in_last_row() {
    let shape = ball();
    let data = DataDescription { kind: nullwave_core::initial::DataKind::Outgoing, center: 3.0, width: 1.0, u0_amp: 3.0, u1_amp: 0.0, epsilon: 0.1 };
    let problem =
        RadialProblem::from_description(&shape, NullFormSpec::nonnull_dt2(), &data, 0.01, None, SolverSettings::default(), 40.0).unwrap();
    let out = run_radial(&problem, &RunSettings { order_cap: 0, sample_every: 0.5, ..Default::default() }, None).unwrap();
    let event = out.report.blowup.expect("non-null pulse breaks down");
    let last = out.report.last().unwrap();
    assert!(last.blowup);
    assert_eq!(last.t, event.t);
    assert_eq!(out.report.rows.iter().filter(|r| r.blowup).count(), 1);
}
