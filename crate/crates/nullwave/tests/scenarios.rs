use nullwave::config::parse_config_str;
use nullwave::contrast::compare_null_vs_nonnull;
use nullwave::run_scenario;
use nullwave::scenario::ConvergenceMethod;
use tempfile::TempDir;

fn config(text: &str, dir: &TempDir) -> nullwave::ScenarioConfig {
    let mut c = parse_config_str(text).unwrap();
    c.output.dir = dir.path().join("out");
    c
}

#[test]
fn linear_radial_defaults_conserve_energy() {
    let dir = TempDir::new().unwrap();
    let s = run_scenario(&config(r#"{"scenario":"linear_radial","t_final":10}"#, &dir)).unwrap();
    assert_eq!(s.exit_status, 0);
    assert!(s.energy_drift.unwrap() < 1e-3);
    assert!(s.kss_ratio.is_none());
}

#[test]
fn oracle_compare_matches_quadrature() {
    let dir = TempDir::new().unwrap();
    let s = run_scenario(&config(r#"{"scenario":"oracle_compare","t_final":10,"diagnostics":{"order_cap":0}}"#, &dir)).unwrap();
    let oracle = s.oracle.unwrap();
    assert!(oracle.relative_l2 < 1e-3, "{oracle:?}");
    assert!(oracle.residual_pde < 5e-3 && oracle.residual_boundary < 5e-3);
    assert!(s.kss_ratio.unwrap() > 0.0);
}

#[test]
fn convergence_study_is_second_order() {
    let dir = TempDir::new().unwrap();
    let s = run_scenario(&config(r#"{"scenario":"convergence_study","t_final":10}"#, &dir)).unwrap();
    let c = s.convergence.unwrap();
    assert_eq!(c.method, ConvergenceMethod::Manufactured);
    for order in c.orders {
        assert!((order - 2.0).abs() < 0.3, "{order}");
    }
}

#[test]
fn chaplygin_epsilon_sweep_slope() {
    let dir = TempDir::new().unwrap();
    let text = r#"{"scenario":"epsilon_sweep","t_final":20,"grid":{"dr":0.02},"data":{"u1_amp":0.5},
        "diagnostics":{"order_cap":0}}"#;
    let s = run_scenario(&config(text, &dir)).unwrap();
    assert_eq!(s.exit_status, 0);
    let sweep = s.sweep.unwrap();
    assert!((sweep.envelope_slope.unwrap() - 1.0).abs() < 0.1);
    assert!(sweep.points.iter().all(|p| p.physical == Some(true)));
}

#[test]
fn nonnull_amplification_grows_with_epsilon() {
    let small = compare_null_vs_nonnull(0.05, 100.0).unwrap();
    let large = compare_null_vs_nonnull(0.1, 100.0).unwrap();
    let amp = |r: &nullwave::ContrastReport| r.nonnull.amplification.unwrap();
    assert!(amp(&large) > amp(&small));
    let (a, b) = (small.null.amplification.unwrap(), large.null.amplification.unwrap());
    assert!((a / b - 1.0).abs() <= 0.25, "{a} {b}");
    assert!(large.nonnull.blew_up() || large.ratio.unwrap() >= 2.0);
    assert!(!small.degenerate && !large.degenerate);
}
