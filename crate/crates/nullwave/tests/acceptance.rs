//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nullwave::config::parse_config_str;
use nullwave::scenario::{log_log_slope, oracle_source, ConvergenceMethod};
use nullwave::{compare_null_vs_nonnull, run_scenario, ScenarioConfig};
use nullwave_core::chaplygin::{chaplygin_scenario, FlowMonitor, GasParameters};
use nullwave_core::diagnostics::hardy_check;
use nullwave_core::geometry::ObstacleShape;
use nullwave_core::grid::RadialGrid;
use nullwave_core::initial::{bump, DataDescription, DataKind, InitialData};
use nullwave_core::nullform::{check_admissible, check_null, CubicPart, NullFormSpec, DEFAULT_SAMPLES, DEFAULT_TOLERANCE};
use nullwave_core::solver::run::{run_radial, RadialProblem, RunSettings};
use nullwave_core::solver::SolverSettings;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario(text: &str, dir: &TempDir) -> Result<ScenarioConfig, String> {
    let mut c = parse_config_str(text).map_err(|e| e.to_string())?;
    c.output.dir = dir.path().to_owned();
    Ok(c)
}

fn ball() -> ObstacleShape {
    ObstacleShape::ball(0.875).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let dir = TempDir::new().unwrap();
    let start = Instant::now();
    let config = scenario(r#"{"scenario":"oracle_compare","t_final":10,"grid":{"dr":0.005},"diagnostics":{"order_cap":0}}"#, &dir)?;
    let s = run_scenario(&config).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let o = s.oracle.ok_or("no oracle summary")?;
    check(
        o.relative_l2 < 1e-3 && secs < 60.0,
        format!(
            "relative L2 {:.3e} (< 1e-3), residuals {:.1e}/{:.1e}, {secs:.1} s (< 60 s)",
            o.relative_l2, o.residual_pde, o.residual_boundary
        ),
    )
}

fn convergence_order() -> Outcome {
    let dir = TempDir::new().unwrap();
    let config = scenario(r#"{"scenario":"convergence_study","t_final":10,"convergence":{"dr":[0.02,0.01,0.005]}}"#, &dir)?;
    let s = run_scenario(&config).map_err(|e| e.to_string())?;
    let c = s.convergence.ok_or("no convergence summary")?;
    let ok = c.method == ConvergenceMethod::Manufactured && c.orders.iter().all(|p| (p - 2.0).abs() <= 0.3);
    check(ok, format!("manufactured L2 orders {:?} (2.0 +- 0.3)", c.orders))
}

fn energy_conservation() -> Outcome {
    let data = DataDescription { kind: DataKind::Bump, center: 3.0, width: 1.0, u0_amp: 1.0, u1_amp: 0.0, epsilon: 1.0 };
    let problem = RadialProblem::from_description(&ball(), NullFormSpec::zero(), &data, 0.005, None, SolverSettings::default(), 50.0)
        .map_err(|e| e.to_string())?;
    let out = run_radial(&problem, &RunSettings { order_cap: 0, sample_every: 1.0, ..Default::default() }, None)
        .map_err(|e| e.to_string())?;
    let drift = out.report.energy_drift().ok_or("no energy samples")?;
    check(drift <= 1e-3, format!("relative E00 drift {drift:.3e} over [0, 50] (<= 1e-3)"))
}

fn local_energy_decay() -> Outcome {
    let data = DataDescription { kind: DataKind::Bump, center: 2.5, width: 1.5, u0_amp: 1e-4, u1_amp: 0.0, epsilon: 1.0 };
    let settings = RunSettings { order_cap: 0, sample_every: 0.25, fit_start: 5.0, ..Default::default() };
    let mut fits = Vec::new();
    for dr in [0.005, 0.0025] {
        let problem = RadialProblem::from_description(&ball(), NullFormSpec::zero(), &data, dr, None, SolverSettings::default(), 40.0)
            .map_err(|e| e.to_string())?;
        let out = run_radial(&problem, &settings, None).map_err(|e| e.to_string())?;
        fits.push(out.report.decay_fit.ok_or_else(|| format!("no decay fit at dr {dr}"))?);
    }
    let (a, b) = (&fits[0], &fits[1]);
    let spread = (a.rate - b.rate).abs() / b.rate;
    let ok = fits.iter().all(|f| f.rate > 0.0 && f.r_squared >= 0.95) && spread <= 0.1;
    check(
        ok,
        format!(
            "rates {:.4}/{:.4}, R^2 {:.4}/{:.4}, spread {:.2}% (<= 10%)",
            a.rate,
            b.rate,
            a.r_squared,
            b.r_squared,
            100.0 * spread
        ),
    )
}

fn hardy_inequality() -> Outcome {
    let grid = RadialGrid::new(0.875, 20.0, 0.005).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let terms: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let width = rng.gen_range(0.2..3.0);
                let center = rng.gen_range(0.875 + width * 0.5..19.0 - width);
                (center, width, rng.gen_range(-2.0..2.0))
            })
            .collect();
        let v: Vec<f64> =
            grid.radii().iter().map(|&r| terms.iter().map(|&(c, w, a)| a * bump((r - c) / w)).sum()).collect();
        worst = worst.max(hardy_check(&grid, &v).map_err(|e| e.to_string())?);
    }
    check(worst <= 2.0, format!("largest ||v/r||/||dv|| over 20 fields {worst:.4} (<= 2)"))
}

fn structural_checkers() -> Outcome {
    let chap = NullFormSpec::chaplygin();
    let null = check_null(&chap, DEFAULT_TOLERANCE, DEFAULT_SAMPLES);
    let adm = check_admissible(&chap, &ball(), DEFAULT_TOLERANCE, DEFAULT_SAMPLES);
    let dt2 = check_null(&NullFormSpec::nonnull_dt2(), DEFAULT_TOLERANCE, DEFAULT_SAMPLES);
    let mut q = [[[0.0; 4]; 4]; 4];
    q[1][1][0] = 1.0;
    let coupling = NullFormSpec::new([[0.0; 4]; 4], q, CubicPart::None).map_err(|e| e.to_string())?;
    let bad = check_admissible(&coupling, &ball(), DEFAULT_TOLERANCE, DEFAULT_SAMPLES);
    let ok = null.holds
        && adm.holds
        && null.max_residual <= 1e-12
        && adm.max_residual <= 1e-12
        && !dt2.holds
        && dt2.witness.is_some()
        && !bad.holds
        && bad.witness.is_some();
    check(
        ok,
        format!(
            "chaplygin null {:.1e} admissible {:.1e}; S00-only fails null ({:.2}, witness {}); normal coupling fails admissible ({:.2}, witness {})",
            null.max_residual,
            adm.max_residual,
            dt2.max_residual,
            dt2.witness.is_some(),
            bad.max_residual,
            bad.witness.is_some()
        ),
    )
}

fn small_data_decay() -> Outcome {
    let gas = GasParameters::default();
    let data = DataDescription { kind: DataKind::Bump, u1_amp: 0.5, ..Default::default() };
    let mut points = Vec::new();
    let mut notes = Vec::new();
    let mut ok = true;
    for eps in [0.02, 0.01, 0.005] {
        let p = chaplygin_scenario(eps, &data, &gas, &ball(), 0.02, 100.0).map_err(|e| e.to_string())?;
        let mut monitor = FlowMonitor::new(gas);
        let settings = RunSettings { order_cap: 0, sample_every: 0.5, ..Default::default() };
        let out = run_radial(&p, &settings, Some(&mut monitor)).map_err(|e| e.to_string())?;
        let completed = out.report.blowup.is_none() && out.report.last().is_some_and(|r| r.t >= 100.0);
        let flow = &monitor.report;
        let rho_ok = flow.is_physical() && flow.rho_min() > gas.density_floor();
        ok &= completed && rho_ok;
        let envelope = out.report.max_envelope();
        points.push((eps, envelope));
        notes.push(format!("eps {eps}: sup D {envelope:.3e}, rho_min {:.5}", flow.rho_min()));
    }
    let slope = log_log_slope(&points).ok_or("envelope slope undefined")?;
    ok &= (slope - 1.0).abs() <= 0.25;
    check(
        ok,
        format!("{}; floor A/P0 {:.3}; log-log slope {slope:.4} (1.0 +- 0.25)", notes.join("; "), gas.density_floor()),
    )
}

fn null_nonnull_dichotomy() -> Outcome {
    let r = compare_null_vs_nonnull(0.1, 100.0).map_err(|e| e.to_string())?;
    let null_amp = r.null.amplification.ok_or("null run has no amplification")?;
    let separated = r.nonnull.blew_up() || r.ratio.is_some_and(|x| x >= 2.0);
    check(
        separated && null_amp <= 2.0,
        format!(
            "null amplification {null_amp:.3} (<= 2); non-null amplification {:?}, blowup at {:?} ({})",
            r.nonnull.amplification,
            r.nonnull.blowup_time,
            r.nonnull.blowup_reason.as_deref().unwrap_or("none")
        ),
    )
}

fn kss_ratio(t_final: f64) -> Result<f64, String> {
    let b = 0.875;
    let grid = RadialGrid::new(b, RadialGrid::domain_of_dependence_radius(b, 3.5, t_final), 0.01).map_err(|e| e.to_string())?;
    let problem = RadialProblem {
        grid: grid.clone(),
        spec: NullFormSpec::zero(),
        solver: SolverSettings::default(),
        data: InitialData::zero(&grid),
        forcing: Some(Arc::new(oracle_source)),
        t_final,
    };
    let out = run_radial(&problem, &RunSettings { order_cap: 0, sample_every: 1.0, ..Default::default() }, None)
        .map_err(|e| e.to_string())?;
    let last = out.report.last().ok_or("empty report")?;
    Ok(last.kss_lhs / last.kss_rhs)
}

fn kss_boundedness() -> Outcome {
    let short = kss_ratio(10.0)?;
    let long = kss_ratio(100.0)?;
    let growth = long / short - 1.0;
    check(
        growth <= 0.5,
        format!("lhs/rhs {short:.4} at T = 10, {long:.4} at T = 100, growth {:.1}% (<= 50%)", 100.0 * growth),
    )
}

fn three_d_cross_check() -> Outcome {
    let dir = TempDir::new().unwrap();
    let config = scenario(
        r#"{"scenario":"linear_3d","t_final":1.5,"data":{"center":2.2,"width":1.2,"epsilon":1.0},
            "grid3d":{"radial":64,"polar":8,"azimuthal":16,"y_max":5.0}}"#,
        &dir,
    )?;
    let s = run_scenario(&config).map_err(|e| e.to_string())?;
    let f = s.flat3d.ok_or("no 3-D summary")?;
    let l2 = f.radial_relative_l2.ok_or("no radial comparison")?;
    check(
        l2 <= 0.05 && f.min_jacobian_determinant > 0.0,
        format!("relative L2 to radial {l2:.4} (<= 0.05), min Jacobian determinant {:.4} (> 0)", f.min_jacobian_determinant),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("convergence order", convergence_order),
        ("energy conservation", energy_conservation),
        ("exponential local-energy decay", local_energy_decay),
        ("Hardy inequality", hardy_inequality),
        ("structural checkers", structural_checkers),
        ("small-data decay", small_data_decay),
        ("null vs non-null dichotomy", null_nonnull_dichotomy),
        ("KSS boundedness", kss_boundedness),
        ("3-D/radial cross-check", three_d_cross_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
