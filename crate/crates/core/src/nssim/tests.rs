use super::*;

fn unit_config(n_s: usize, n_r: usize) -> SimConfig {
    let arc = ArcBoundary::centered(1.0, [-0.5, 0.5]).unwrap();
    let params = LaminarParams::new(1.0, 1.0, 1.0).unwrap();
    SimConfig::new(arc, params).with_grid(n_s, n_r)
}

#[test]
fn config_defaults_and_serde() {
    let cfg = unit_config(32, 16);
    assert_eq!(cfg.resolved_outer_offset(), Some(2.0));
    assert_eq!(cfg.resolved_probes(), vec![0.25, 0.125, 0.0625]);
    let json = r#"{"arc": {"delta": 1.0, "s_range": [-0.5, 0.5]},
                   "params": {"alpha1": 1.0, "alpha2": 1.0, "nu": 1.0}}"#;
    let parsed: SimConfig = serde_json::from_str(json).unwrap();
    assert_eq!(parsed.n_s, 128);
    assert_eq!(parsed.end_pressure, EndPressure::WallCompatible);
    assert!(serde_json::from_str::<SimConfig>(r#"{"arc": {"delta": 1.0, "s_range": [0, 1]},
        "params": {"alpha1": 1.0, "alpha2": 1.0, "nu": 1.0}, "bogus": 1}"#)
    .is_err());
}

#[test]
fn config_errors_list_every_violation() {
    let mut cfg = unit_config(8, 8);
    cfg.outer_offset = Some(1.0);
    cfg.record_every = 0;
    match cfg.validate() {
        Err(Error::ConfigError(v)) => assert_eq!(v.len(), 3, "{v:?}"),
        other => panic!("{other:?}"),
    }
    let mut cfg = unit_config(32, 16);
    cfg.dt = Some(1.0);
    match cfg.validate() {
        Err(Error::ConfigError(v)) => assert!(v.iter().any(|m| m.contains("CFL")) && v.iter().any(|m| m.contains("diffusion"))),
        other => panic!("{other:?}"),
    }
    let shear = SimConfig::new(
        ArcBoundary::centered(1.0, [-0.5, 0.5]).unwrap(),
        LaminarParams::pure_shear(1.0, 1.0).unwrap(),
    );
    assert!(matches!(shear.validate(), Err(Error::ConfigError(_))));
    assert!(unit_config(32, 16).validate().is_ok());
}

#[test]
fn initial_state_is_divergence_free_and_no_slip() {
    let s = init_sim(&unit_config(32, 16)).unwrap();
    assert!(s.scaled_divergence() <= 1e-8);
    assert_eq!(s.no_slip_residual(), 0.0);
    assert!(s.last_solve.relative_residual <= 1e-10);
}

/// Worst interior error of the angular Laplacian on `u_theta = exp(rho - delta)`, `u_rho = 0`.
fn laplacian_error(n_s: usize, n_r: usize) -> f64 {
    let cfg = unit_config(n_s, n_r);
    let mut s = init_sim(&cfg).unwrap();
    let g = s.grid;
    for i in 0..=n_s {
        for j in 0..n_r {
            s.u_theta.set(i, j + 1, (g.rho_c(j) - g.delta).exp());
        }
    }
    let mut worst: f64 = 0.0;
    for j in n_r / 4..3 * n_r / 4 {
        let rho = g.rho_c(j);
        let f = (rho - g.delta).exp();
        let exact = f + f / rho - f / (rho * rho);
        worst = worst.max((s.lap_theta(n_s / 2, j) - exact).abs());
    }
    worst
}

#[test]
fn laplacian_stencil_is_second_order() {
    let (e1, e2) = (laplacian_error(32, 16), laplacian_error(64, 32));
    let order = (e1 / e2).log2();
    assert!(order > 1.8, "observed order {order} ({e1:e}, {e2:e})");
}

#[test]
fn near_wall_ratio_is_negative_and_matches_closed_form() {
    let cfg = unit_config(64, 32);
    let s = init_sim(&cfg).unwrap();
    let samples = measure_ratio(&s, &cfg, &cfg.resolved_probes()).unwrap();
    for x in &samples {
        assert!(x.ratio < 0.0, "{x:?}");
        let cf = x.ratio_closed_form.unwrap();
        assert!((x.ratio - cf).abs() < 0.05 * cf.abs(), "{x:?}");
    }
}

#[test]
fn flux_matched_ends_lose_the_deceleration() {
    let mut cfg = unit_config(64, 32);
    cfg.end_pressure = EndPressure::FluxMatched;
    let s = init_sim(&cfg).unwrap();
    let x = measure_ratio(&s, &cfg, &[0.25]).unwrap()[0];
    assert!(x.ratio > 0.0, "{x:?}");
}

#[test]
fn sharper_curvature_decelerates_harder() {
    let ratio = |delta: f64| {
        let mut cfg = unit_config(64, 32);
        cfg.arc = ArcBoundary::centered(delta, [-0.5 * delta, 0.5 * delta]).unwrap();
        let s = init_sim(&cfg).unwrap();
        measure_ratio(&s, &cfg, &[0.125 * delta]).unwrap()[0].ratio
    };
    assert!(ratio(0.5).abs() > ratio(1.0).abs());
}

#[test]
fn tiny_viscosity_gives_small_ratio() {
    let mut cfg = unit_config(64, 32);
    cfg.params = LaminarParams::new(1.0, 1.0, 1e-6).unwrap();
    let s = init_sim(&cfg).unwrap();
    let x = measure_ratio(&s, &cfg, &[0.25]).unwrap()[0];
    assert!(x.ratio.abs() < 1e-4, "{x:?}");
}

#[test]
fn probe_outside_grid_is_rejected() {
    let cfg = unit_config(32, 16);
    let s = init_sim(&cfg).unwrap();
    assert!(matches!(measure_ratio(&s, &cfg, &[1e-4]), Err(Error::ProbeOutsideGrid { .. })));
    assert!(matches!(measure_ratio(&s, &cfg, &[1.99]), Err(Error::ProbeOutsideGrid { .. })));
}

#[test]
fn inviscid_rest_is_a_fixed_point() {
    let mut cfg = unit_config(32, 16);
    cfg.inviscid = true;
    cfg.initial = InitialProfile::Rest;
    cfg.dt = Some(1e-3);
    let mut s = init_sim(&cfg).unwrap();
    for _ in 0..10 {
        step(&mut s, &cfg).unwrap();
    }
    assert_eq!(s.max_speed(), 0.0);
    assert_eq!(s.p.max_abs(), 0.0);
}

#[test]
fn stepping_keeps_constraints_and_energy() {
    let cfg = unit_config(32, 16);
    let mut s = init_sim(&cfg).unwrap();
    let e0 = s.kinetic_energy();
    let mut prev = e0;
    for _ in 0..100 {
        step(&mut s, &cfg).unwrap();
        assert!(s.scaled_divergence() <= 1e-8);
        assert_eq!(s.no_slip_residual(), 0.0);
        let e = s.kinetic_energy();
        assert!(e <= prev * (1.0 + 1e-3), "energy rose from {prev} to {e}");
        prev = e;
    }
    assert!(prev <= e0 * (1.0 + 1e-3));
}

#[test]
fn time_step_refinement_is_first_order() {
    let probe_u = |dt: f64| {
        let mut cfg = unit_config(32, 16);
        cfg.dt = Some(dt);
        cfg.t_end = 2e-4;
        cfg.probes = Some(vec![0.25]);
        let rep = run_experiment(&cfg).unwrap();
        rep.series.last().unwrap().u_t
    };
    let dt = 2e-5;
    let (a, b, c) = (probe_u(dt), probe_u(dt / 2.0), probe_u(dt / 4.0));
    let ratio = (a - b) / (b - c);
    assert!((1.5..3.0).contains(&ratio), "dt-refinement ratio {ratio} ({a}, {b}, {c})");
}

#[test]
fn experiment_records_series_and_csv() {
    let mut cfg = unit_config(32, 16);
    cfg.t_end = 5e-4;
    cfg.record_every = 5;
    let rep = run_experiment(&cfg).unwrap();
    assert!(rep.steps > 0);
    assert_eq!(rep.series.len() % 3, 0);
    assert!(rep.max_scaled_divergence <= 1e-8);
    assert_eq!(rep.series[0].t, 0.0);
    assert!((rep.series.last().unwrap().t - rep.steps as f64 * rep.dt).abs() < 1e-15);
    let mut buf = Vec::new();
    write_series_csv(&rep.series, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,probe_r,u_t,ratio\n"));
    let s = init_sim(&cfg).unwrap();
    let mut buf = Vec::new();
    write_field_csv(&s, [0.0, 0.0], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 32 * 16);
}
